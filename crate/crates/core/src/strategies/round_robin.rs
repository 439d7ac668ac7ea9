use std::collections::{BTreeMap, VecDeque};

use super::{grant_in_order, Allocation, ChargeRequest};
use crate::fleet::VehicleId;
use crate::time::Timestamp;

#[derive(Debug, Clone, Default)]
pub struct RoundRobinState {
    queue: VecDeque<VehicleId>,
    sessions: BTreeMap<VehicleId, Timestamp>,
    /// Consecutive intervals charged, reset to 0 by any interval without a grant.
    streak: BTreeMap<VehicleId, u32>,
}

impl RoundRobinState {
    pub fn queue(&self) -> impl Iterator<Item = VehicleId> + '_ {
        self.queue.iter().copied()
    }

    pub fn streak(&self, vehicle: VehicleId) -> u32 {
        self.streak.get(&vehicle).copied().unwrap_or(0)
    }
}

/// One Round Robin cycle; call once per interval boundary.
///
/// New sessions join the tail. While anyone is left waiting, as many charging vehicles as there
/// are waiting vehicles are paused and moved to the tail. Charging vehicles nearer the head have
/// been served longest and are paused first, keeping their relative order. Grants then go out in queue order at full rate with head-of-line
/// blocking.
pub fn dispatch_round_robin(
    state: &mut RoundRobinState,
    requests: &[ChargeRequest],
    capacity_kw: f64,
) -> Allocation {
    let by_id: BTreeMap<VehicleId, &ChargeRequest> =
        requests.iter().map(|r| (r.vehicle, r)).collect();
    state
        .sessions
        .retain(|id, arrival| by_id.get(id).is_some_and(|r| r.arrival == *arrival));
    let sessions = &state.sessions;
    state.queue.retain(|id| sessions.contains_key(id));
    state.streak.retain(|id, _| sessions.contains_key(id));

    let mut arrivals: Vec<&ChargeRequest> = requests
        .iter()
        .filter(|r| !state.sessions.contains_key(&r.vehicle))
        .collect();
    arrivals.sort_by_key(|r| (r.arrival, r.vehicle));
    for r in arrivals {
        state.sessions.insert(r.vehicle, r.arrival);
        state.streak.insert(r.vehicle, 0);
        state.queue.push_back(r.vehicle);
    }

    let mut alloc = grant_in_order(state.queue.iter().map(|id| by_id[id]), capacity_kw);
    let waiting = state.queue.len() - alloc.len();
    if waiting > 0 {
        let mut paused = 0;
        let mut kept = VecDeque::with_capacity(state.queue.len());
        let mut tail = Vec::new();
        for id in state.queue.drain(..) {
            if paused < waiting && state.streak[&id] > 0 {
                paused += 1;
                tail.push(id);
            } else {
                kept.push_back(id);
            }
        }
        kept.extend(tail);
        state.queue = kept;
        alloc = grant_in_order(state.queue.iter().map(|id| by_id[id]), capacity_kw);
    }

    for (id, streak) in state.streak.iter_mut() {
        if alloc.contains(*id) {
            *streak += 1;
        } else {
            *streak = 0;
        }
    }
    alloc
}
