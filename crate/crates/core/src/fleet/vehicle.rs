use std::fmt;

use super::{EvModel, TripEvent};
use crate::time::Timestamp;

/// Tolerance for "target reached" comparisons, kWh.
pub const SOC_EPS_KWH: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HouseholdId(pub u32);

/// One EV per household, so vehicles share their household's number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VehicleId(pub u32);

impl fmt::Display for HouseholdId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ev{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Home,
    Away,
}

#[derive(Debug, Clone)]
pub struct Vehicle {
    pub id: VehicleId,
    pub household: HouseholdId,
    pub model: EvModel,
    pub soc_kwh: f64,
    pub location: Location,
    pub plugged: bool,
    pub planned_departure: Option<Timestamp>,
    pub desired_target_kwh: f64,
}

impl Vehicle {
    /// A vehicle parked and plugged in at home.
    pub fn at_home(
        household: HouseholdId,
        model: EvModel,
        soc_kwh: f64,
        desired_target_kwh: f64,
    ) -> Self {
        let battery = model.battery_kwh;
        Vehicle {
            id: VehicleId(household.0),
            household,
            model,
            soc_kwh: soc_kwh.clamp(0.0, battery),
            location: Location::Home,
            plugged: true,
            planned_departure: None,
            desired_target_kwh: desired_target_kwh.clamp(0.0, battery),
        }
    }

    pub fn remaining_kwh(&self) -> f64 {
        (self.desired_target_kwh - self.soc_kwh).max(0.0)
    }

    pub fn wants_charge(&self) -> bool {
        self.plugged && self.remaining_kwh() > SOC_EPS_KWH
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeOutcome {
    pub delivered_kwh: f64,
    /// Target reached during this step; the grant is no longer needed.
    pub released: bool,
}

/// Advance charging by `dt_minutes` at `granted_kw`, never past the desired target.
pub fn charge_step(v: &mut Vehicle, granted_kw: f64, dt_minutes: i64) -> ChargeOutcome {
    debug_assert!(granted_kw >= 0.0 && granted_kw <= v.model.max_rate_kw + 1e-9);
    if !v.plugged || granted_kw <= 0.0 {
        return ChargeOutcome {
            delivered_kwh: 0.0,
            released: !v.wants_charge(),
        };
    }
    let before = v.soc_kwh;
    let target = v.desired_target_kwh.max(before);
    let after = (before + granted_kw * dt_minutes as f64 / 60.0).min(target);
    v.soc_kwh = after;
    ChargeOutcome {
        delivered_kwh: after - before,
        released: target - after <= SOC_EPS_KWH,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripOutcome {
    pub consumed_kwh: f64,
    /// Energy the trip needed beyond what the battery held (the floor anomaly).
    pub shortfall_kwh: f64,
}

/// Book a finished trip: subtract its energy and plug the car back in at home.
pub fn apply_trip_energy(v: &mut Vehicle, trip: &TripEvent) -> TripOutcome {
    let consumed = trip.energy_kwh.min(v.soc_kwh);
    let shortfall = trip.energy_kwh - consumed;
    if shortfall > 0.0 {
        log::warn!(
            "{} returned at {} needing {:.3} kWh more than its state of charge; floored at 0",
            v.id,
            trip.arrival,
            shortfall
        );
    }
    v.soc_kwh -= consumed;
    v.location = Location::Home;
    v.plugged = true;
    TripOutcome {
        consumed_kwh: consumed,
        shortfall_kwh: shortfall,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Satisfaction {
    Satisfied,
    Dissatisfied,
}

pub fn record_departure_satisfaction(v: &Vehicle, _at: Timestamp) -> Satisfaction {
    if v.soc_kwh < v.desired_target_kwh - SOC_EPS_KWH {
        Satisfaction::Dissatisfied
    } else {
        Satisfaction::Satisfied
    }
}
