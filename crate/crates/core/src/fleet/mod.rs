//! Vehicles, their models, adoption over time, and daily driving.

mod adoption;
mod driving;
mod model;
mod vehicle;

pub use adoption::{sample_adoptions, Adoption, AdoptionCurve};
pub use driving::{sample_daily_trips, DrivingPattern, TripEvent};
pub use model::{Catalog, EvModel};
pub use vehicle::{
    apply_trip_energy, charge_step, record_departure_satisfaction, ChargeOutcome, HouseholdId,
    Location, Satisfaction, TripOutcome, Vehicle, VehicleId, SOC_EPS_KWH,
};
