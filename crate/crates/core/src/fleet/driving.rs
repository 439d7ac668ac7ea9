use chrono::{Datelike, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Vehicle;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::time::{Timestamp, MINUTES_PER_DAY};

/// A single away-from-home trip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripEvent {
    pub departure: Timestamp,
    pub arrival: Timestamp,
    pub energy_kwh: f64,
}

/// Daily home-away-home cycle. Times are minutes after midnight.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct DrivingPattern {
    pub weekday_trip_probability: f64,
    pub weekend_trip_probability: f64,
    pub departure_mean_min: f64,
    pub departure_std_min: f64,
    pub arrival_mean_min: f64,
    pub arrival_std_min: f64,
    /// Added to both departure and arrival means on Saturdays and Sundays.
    pub weekend_shift_min: f64,
    pub energy_mean_kwh: f64,
    pub energy_std_kwh: f64,
}

impl Default for DrivingPattern {
    fn default() -> Self {
        DrivingPattern {
            weekday_trip_probability: 1.0,
            weekend_trip_probability: 0.5,
            departure_mean_min: 7.5 * 60.0,
            departure_std_min: 60.0,
            arrival_mean_min: 17.0 * 60.0,
            arrival_std_min: 90.0,
            weekend_shift_min: 120.0,
            energy_mean_kwh: 7.0,
            energy_std_kwh: 3.0,
        }
    }
}

const MAX_REJECTIONS: usize = 1000;

impl DrivingPattern {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("weekday_trip_probability", self.weekday_trip_probability),
            ("weekend_trip_probability", self.weekend_trip_probability),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} must be in [0, 1]")));
            }
        }
        for (name, s) in [
            ("departure_std_min", self.departure_std_min),
            ("arrival_std_min", self.arrival_std_min),
            ("energy_std_kwh", self.energy_std_kwh),
        ] {
            if !(s.is_finite() && s >= 0.0) {
                return Err(Error::invalid(format!("{name} must be >= 0")));
            }
        }
        if self.departure_mean_min >= self.arrival_mean_min {
            return Err(Error::invalid(
                "mean arrival must come after mean departure",
            ));
        }
        if self.energy_mean_kwh < 0.0 {
            return Err(Error::invalid("energy_mean_kwh must be >= 0"));
        }
        Ok(())
    }
}

fn normal(mean: f64, std: f64) -> Normal<f64> {
    Normal::new(mean, std).expect("validated pattern parameters")
}

/// Zero or one trip on `day`. Departure and arrival are whole minutes within the day, arrival
/// strictly after departure (redrawn until it is); energy is clamped to `0.9 x battery` when a
/// draw exceeds the battery.
pub fn sample_daily_trips(
    v: &Vehicle,
    day: NaiveDate,
    pattern: &DrivingPattern,
    rng: &mut RngStream,
) -> Vec<TripEvent> {
    let weekend = matches!(day.weekday(), Weekday::Sat | Weekday::Sun);
    let (p, shift) = if weekend {
        (pattern.weekend_trip_probability, pattern.weekend_shift_min)
    } else {
        (pattern.weekday_trip_probability, 0.0)
    };
    let u: f64 = rng.random();
    if u >= p {
        return Vec::new();
    }
    let midnight = Timestamp::from_datetime(day.and_hms_opt(0, 0, 0).expect("midnight"))
        .expect("day after epoch");

    let dep_dist = normal(
        pattern.departure_mean_min + shift,
        pattern.departure_std_min,
    );
    let arr_dist = normal(pattern.arrival_mean_min + shift, pattern.arrival_std_min);
    let last_minute = (MINUTES_PER_DAY - 1) as f64;
    let departure = dep_dist.sample(rng).round().clamp(0.0, last_minute - 1.0) as i64;
    let mut arrival = None;
    for _ in 0..MAX_REJECTIONS {
        let a = arr_dist.sample(rng).round().min(last_minute) as i64;
        if a > departure {
            arrival = Some(a);
            break;
        }
    }
    let arrival = arrival.unwrap_or(departure + 1);

    let battery = v.model.battery_kwh;
    let mut energy = normal(pattern.energy_mean_kwh, pattern.energy_std_kwh)
        .sample(rng)
        .max(0.0);
    if energy > battery {
        log::warn!(
            "{}: trip energy draw {energy:.2} kWh exceeds battery {battery} kWh; clamped",
            v.id
        );
        energy = 0.9 * battery;
    }
    vec![TripEvent {
        departure: midnight + departure,
        arrival: midnight + arrival,
        energy_kwh: energy,
    }]
}
