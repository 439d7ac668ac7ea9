use super::{grant_in_order, Allocation, ChargeRequest};

/// Earliest planned departure first; ties go to the earlier plug-in, then the lower id.
/// Fully preemptive: the order is rebuilt at every decision.
pub fn dispatch_edf(requests: &[ChargeRequest], capacity_kw: f64) -> Allocation {
    let mut order: Vec<&ChargeRequest> = requests.iter().collect();
    order.sort_by_key(|r| (r.planned_departure, r.arrival, r.vehicle));
    grant_in_order(order, capacity_kw)
}
