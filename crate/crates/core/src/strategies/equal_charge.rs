use super::{Allocation, ChargeRequest};

/// Common charging level `lambda` such that `sum(min(cap_i, lambda)) = min(capacity, sum(cap_i))`.
///
/// Returns `None` when the capacity covers every cap (nobody is throttled). Exact: caps are
/// scanned in ascending order and each one either saturates below the running fair share or
/// fixes the level for everyone left.
pub fn water_level(caps: &[f64], capacity_kw: f64) -> Option<f64> {
    let total: f64 = caps.iter().sum();
    if capacity_kw >= total {
        return None;
    }
    let capacity = capacity_kw.max(0.0);
    let mut sorted = caps.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut remaining = capacity;
    let mut left = sorted.len();
    for cap in sorted {
        let share = remaining / left as f64;
        if cap <= share {
            remaining -= cap;
            left -= 1;
        } else {
            return Some(share);
        }
    }
    // Unreachable when capacity < total; kept for float edge cases.
    Some(remaining.max(0.0))
}

/// Share the budget equally, capped at each vehicle's maximum rate.
pub fn dispatch_equal_charge(requests: &[ChargeRequest], capacity_kw: f64) -> Allocation {
    let caps: Vec<f64> = requests.iter().map(|r| r.max_rate_kw).collect();
    let level = water_level(&caps, capacity_kw);
    let mut alloc = Allocation::new();
    for r in requests {
        let kw = match level {
            Some(l) => r.max_rate_kw.min(l),
            None => r.max_rate_kw,
        };
        alloc.grant(r.vehicle, kw);
    }
    alloc
}

#[cfg(test)]
mod tests {
    use super::super::test_support::req;
    use super::super::CAPACITY_EPS_KW;
    use super::*;
    use crate::fleet::VehicleId;
    use proptest::prelude::*;

    /// Independent oracle: bisection on the level.
    fn bisection_grants(caps: &[f64], capacity: f64) -> Vec<f64> {
        let target = capacity.min(caps.iter().sum()).max(0.0);
        let filled = |l: f64| caps.iter().map(|c| c.min(l)).sum::<f64>();
        let (mut lo, mut hi) = (0.0f64, caps.iter().copied().fold(0.0, f64::max));
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if filled(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        caps.iter().map(|c| c.min(hi)).collect()
    }

    fn requests(caps: &[f64]) -> Vec<ChargeRequest> {
        caps.iter()
            .enumerate()
            .map(|(i, &c)| req(i as u32, c, i as i64, 600))
            .collect()
    }

    #[test]
    fn slow_charger_untouched() {
        let alloc = dispatch_equal_charge(&requests(&[11.0, 3.7]), 10.0);
        assert_eq!(alloc.get(VehicleId(0)), 6.3);
        assert_eq!(alloc.get(VehicleId(1)), 3.7);
    }

    #[test]
    fn unconstrained_everyone_at_cap() {
        let alloc = dispatch_equal_charge(&requests(&[11.0, 3.7, 22.0]), 100.0);
        assert_eq!(alloc.get(VehicleId(0)), 11.0);
        assert_eq!(alloc.get(VehicleId(1)), 3.7);
        assert_eq!(alloc.get(VehicleId(2)), 22.0);
    }

    #[test]
    fn symmetric_split() {
        let alloc = dispatch_equal_charge(&requests(&[11.0, 11.0]), 6.0);
        assert_eq!(alloc.get(VehicleId(0)), 3.0);
        assert_eq!(alloc.get(VehicleId(1)), 3.0);
    }

    #[test]
    fn zero_budget() {
        assert!(dispatch_equal_charge(&requests(&[11.0, 3.7]), 0.0).is_empty());
        assert!(dispatch_equal_charge(&[], 10.0).is_empty());
    }

    proptest! {
        #[test]
        fn matches_bisection_oracle(
            caps in prop::collection::vec(prop::sample::select(vec![3.7, 7.4, 11.0, 22.0]), 1..=8),
            frac in 0.0..1.2f64,
        ) {
            let capacity = frac * caps.iter().sum::<f64>();
            let alloc = dispatch_equal_charge(&requests(&caps), capacity);
            let oracle = bisection_grants(&caps, capacity);
            for (i, expected) in oracle.iter().enumerate() {
                prop_assert!((alloc.get(VehicleId(i as u32)) - expected).abs() < 1e-6);
            }
            prop_assert!(alloc.total_kw() <= capacity + CAPACITY_EPS_KW);
        }

        #[test]
        fn unsaturated_vehicles_get_identical_rates(
            caps in prop::collection::vec(1.0..30.0f64, 1..12),
            frac in 0.0..1.0f64,
        ) {
            let capacity = frac * caps.iter().sum::<f64>();
            let alloc = dispatch_equal_charge(&requests(&caps), capacity);
            let unsaturated: Vec<f64> = caps
                .iter()
                .enumerate()
                .map(|(i, &c)| (c, alloc.get(VehicleId(i as u32))))
                .filter(|(c, g)| g < c)
                .map(|(_, g)| g)
                .collect();
            for w in unsaturated.windows(2) {
                prop_assert_eq!(w[0], w[1]);
            }
        }
    }
}
