//! Centralized dispatch: turn the connected vehicles and a kW budget into granted rates.
//!
//! All strategies except [`StrategyKind::Traditional`] keep the sum of grants within the budget.
//! Queue-based strategies (FCFS, Round Robin, EDF) grant full rates in queue order and stop at
//! the first vehicle that does not fit; nobody behind a blocked head is admitted.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::fleet::VehicleId;
use crate::grid::{available_capacity, Transformer};
use crate::time::Timestamp;

mod edf;
mod equal_charge;
mod fcfs;
mod round_robin;
mod traditional;

pub use edf::dispatch_edf;
pub use equal_charge::{dispatch_equal_charge, water_level};
pub use fcfs::{dispatch_fcfs, FcfsState};
pub use round_robin::{dispatch_round_robin, RoundRobinState};
pub use traditional::dispatch_traditional;

/// Slack for floating-point capacity comparisons, kW.
pub const CAPACITY_EPS_KW: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Traditional,
    RoundRobin,
    Fcfs,
    EqualCharge,
    Edf,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Traditional,
        StrategyKind::RoundRobin,
        StrategyKind::Fcfs,
        StrategyKind::EqualCharge,
        StrategyKind::Edf,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Traditional => "traditional",
            StrategyKind::RoundRobin => "round_robin",
            StrategyKind::Fcfs => "fcfs",
            StrategyKind::EqualCharge => "equal_charge",
            StrategyKind::Edf => "edf",
        }
    }

    /// Round Robin cycles every 15 minutes; the others re-decide every minute.
    pub fn default_decision_interval(self) -> i64 {
        match self {
            StrategyKind::RoundRobin => 15,
            _ => 1,
        }
    }

    pub fn is_centralized(self) -> bool {
        self != StrategyKind::Traditional
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = StrategyKind::ALL.iter().map(|k| k.as_str()).collect();
                Error::invalid(format!(
                    "unknown strategy {s:?}; valid names: {}",
                    names.join(", ")
                ))
            })
    }
}

/// A connected vehicle asking for energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeRequest {
    pub vehicle: VehicleId,
    pub max_rate_kw: f64,
    pub remaining_kwh: f64,
    /// Plug-in time of the current session.
    pub arrival: Timestamp,
    pub planned_departure: Timestamp,
}

/// Granted charging rate per vehicle; vehicles not listed get nothing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Allocation {
    grants: BTreeMap<VehicleId, f64>,
}

impl Allocation {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn grant(&mut self, vehicle: VehicleId, kw: f64) {
        if kw > 0.0 {
            self.grants.insert(vehicle, kw);
        }
    }

    pub fn get(&self, vehicle: VehicleId) -> f64 {
        self.grants.get(&vehicle).copied().unwrap_or(0.0)
    }

    pub fn total_kw(&self) -> f64 {
        self.grants.values().sum()
    }

    pub fn len(&self) -> usize {
        self.grants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grants.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VehicleId, f64)> + '_ {
        self.grants.iter().map(|(&v, &kw)| (v, kw))
    }

    pub fn contains(&self, vehicle: VehicleId) -> bool {
        self.grants.contains_key(&vehicle)
    }
}

/// Budget handed to every dispatch call.
pub fn compute_budget(tr: &Transformer, baseload_total_kw: f64) -> f64 {
    available_capacity(tr, baseload_total_kw)
}

/// Full-rate grants in `order`, stopping at the first request that does not fit.
fn grant_in_order<'a>(
    order: impl IntoIterator<Item = &'a ChargeRequest>,
    capacity_kw: f64,
) -> Allocation {
    let mut alloc = Allocation::new();
    let mut residual = capacity_kw;
    for r in order {
        if r.max_rate_kw > residual + CAPACITY_EPS_KW {
            break;
        }
        alloc.grant(r.vehicle, r.max_rate_kw);
        residual -= r.max_rate_kw;
    }
    alloc
}

/// Strategy plus whatever state it carries between decisions.
#[derive(Debug, Clone)]
pub enum Dispatcher {
    Traditional,
    RoundRobin(RoundRobinState),
    Fcfs(FcfsState),
    EqualCharge,
    Edf,
}

impl Dispatcher {
    pub fn new(kind: StrategyKind) -> Self {
        match kind {
            StrategyKind::Traditional => Dispatcher::Traditional,
            StrategyKind::RoundRobin => Dispatcher::RoundRobin(RoundRobinState::default()),
            StrategyKind::Fcfs => Dispatcher::Fcfs(FcfsState::default()),
            StrategyKind::EqualCharge => Dispatcher::EqualCharge,
            StrategyKind::Edf => Dispatcher::Edf,
        }
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            Dispatcher::Traditional => StrategyKind::Traditional,
            Dispatcher::RoundRobin(_) => StrategyKind::RoundRobin,
            Dispatcher::Fcfs(_) => StrategyKind::Fcfs,
            Dispatcher::EqualCharge => StrategyKind::EqualCharge,
            Dispatcher::Edf => StrategyKind::Edf,
        }
    }

    pub fn dispatch(&mut self, requests: &[ChargeRequest], capacity_kw: f64) -> Allocation {
        match self {
            Dispatcher::Traditional => dispatch_traditional(requests, capacity_kw),
            Dispatcher::RoundRobin(state) => dispatch_round_robin(state, requests, capacity_kw),
            Dispatcher::Fcfs(state) => dispatch_fcfs(state, requests, capacity_kw),
            Dispatcher::EqualCharge => dispatch_equal_charge(requests, capacity_kw),
            Dispatcher::Edf => dispatch_edf(requests, capacity_kw),
        }
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    pub fn t(minute: i64) -> Timestamp {
        Timestamp::from_ymd_hm(2039, 1, 3, 0, 0).unwrap() + minute
    }

    pub fn req(id: u32, rate: f64, arrival: i64, departure: i64) -> ChargeRequest {
        ChargeRequest {
            vehicle: VehicleId(id),
            max_rate_kw: rate,
            remaining_kwh: 100.0,
            arrival: t(arrival),
            planned_departure: t(departure),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for k in StrategyKind::ALL {
            assert_eq!(k.as_str().parse::<StrategyKind>().unwrap(), k);
        }
        let err = "lottery".parse::<StrategyKind>().unwrap_err().to_string();
        assert!(
            err.contains("round_robin") && err.contains("equal_charge"),
            "{err}"
        );
    }

    #[test]
    fn budget_examples() {
        let tr = Transformer::new(400.0, 0.0).unwrap();
        assert_eq!(compute_budget(&tr, 250.0), 150.0);
        assert_eq!(compute_budget(&tr.with_buffer(20.0).unwrap(), 250.0), 130.0);
        assert_eq!(compute_budget(&tr, 400.0), 0.0);
    }

    #[test]
    fn zero_budget_starves_centralized_strategies() {
        let requests = [req(1, 11.0, 0, 600), req(2, 3.7, 5, 300)];
        for kind in StrategyKind::ALL.into_iter().filter(|k| k.is_centralized()) {
            let alloc = Dispatcher::new(kind).dispatch(&requests, 0.0);
            assert!(alloc.is_empty(), "{kind} granted with zero budget");
        }
    }

    #[test]
    fn head_of_line_blocking() {
        let requests = [req(1, 11.0, 0, 600), req(2, 3.7, 5, 600)];
        let alloc = grant_in_order(&requests, 5.0);
        assert!(alloc.is_empty());
    }
}
