use super::{Allocation, ChargeRequest};

/// Plug in and charge: everyone at full rate, capacity ignored.
pub fn dispatch_traditional(requests: &[ChargeRequest], _capacity_kw: f64) -> Allocation {
    let mut alloc = Allocation::new();
    for r in requests {
        alloc.grant(r.vehicle, r.max_rate_kw);
    }
    alloc
}
