use std::collections::{BTreeMap, VecDeque};

use super::{Allocation, ChargeRequest, CAPACITY_EPS_KW};
use crate::fleet::VehicleId;
use crate::time::Timestamp;

/// Sessions are keyed by vehicle and plug-in time, so a car that leaves and returns re-queues.
#[derive(Debug, Clone, Default)]
pub struct FcfsState {
    waiting: VecDeque<VehicleId>,
    /// Admission order.
    active: Vec<VehicleId>,
    sessions: BTreeMap<VehicleId, Timestamp>,
}

impl FcfsState {
    pub fn waiting(&self) -> impl Iterator<Item = VehicleId> + '_ {
        self.waiting.iter().copied()
    }

    pub fn active(&self) -> &[VehicleId] {
        &self.active
    }
}

/// First come, first served.
///
/// Active sessions keep their full rate. If the budget shrinks below what the active set draws,
/// the most recently admitted sessions go back to the front of the queue. The queue head is then
/// admitted while it fits; admission stops at the first head that does not.
pub fn dispatch_fcfs(
    state: &mut FcfsState,
    requests: &[ChargeRequest],
    capacity_kw: f64,
) -> Allocation {
    let by_id: BTreeMap<VehicleId, &ChargeRequest> =
        requests.iter().map(|r| (r.vehicle, r)).collect();
    let live = |id: &VehicleId, sessions: &BTreeMap<VehicleId, Timestamp>| {
        by_id
            .get(id)
            .is_some_and(|r| sessions.get(id) == Some(&r.arrival))
    };
    let sessions = &state.sessions;
    state.waiting.retain(|id| live(id, sessions));
    state.active.retain(|id| live(id, sessions));
    state
        .sessions
        .retain(|id, arrival| by_id.get(id).is_some_and(|r| r.arrival == *arrival));

    let mut arrivals: Vec<&ChargeRequest> = requests
        .iter()
        .filter(|r| !state.sessions.contains_key(&r.vehicle))
        .collect();
    arrivals.sort_by_key(|r| (r.arrival, r.vehicle));
    for r in arrivals {
        state.sessions.insert(r.vehicle, r.arrival);
        state.waiting.push_back(r.vehicle);
    }

    let rate = |id: &VehicleId| by_id[id].max_rate_kw;
    let mut residual = capacity_kw - state.active.iter().map(rate).sum::<f64>();
    while residual < -CAPACITY_EPS_KW {
        let Some(id) = state.active.pop() else { break };
        residual += rate(&id);
        state.waiting.push_front(id);
    }
    while let Some(head) = state.waiting.front() {
        let need = rate(head);
        if need > residual + CAPACITY_EPS_KW {
            break;
        }
        residual -= need;
        let id = state.waiting.pop_front().expect("non-empty");
        state.active.push(id);
    }

    let mut alloc = Allocation::new();
    for id in &state.active {
        alloc.grant(*id, rate(id));
    }
    alloc
}
