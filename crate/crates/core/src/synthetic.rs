//! Synthetic stand-ins for measured household consumption, spot prices, CO2 intensity and
//! distribution tariffs.
//!
//! Defaults are calibrated so that 126 households peak at roughly 150-200 kW: comfortably below a
//! 400 kW transformer without EVs, so EV growth is what drives it into saturation.

use std::f64::consts::TAU;

use chrono::{Datelike, Weekday};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::engine::Baseload;
use crate::error::{Error, Result};
use crate::grid::LoadSeries;
use crate::rng::{self, RngStream};
use crate::tariffs::{
    Co2IntensitySeries, DistributionTariff, HourlySeries, Season, SeasonCalendar, SpotPriceSeries,
    TouBand,
};
use crate::time::{Timestamp, MINUTES_PER_DAY, MINUTES_PER_HOUR};

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticBaseloadSpec {
    /// Mean consumption per household and day, averaged over a week.
    pub mean_daily_kwh: f64,
    /// Height of the morning bump relative to the flat night-time level.
    pub morning_weight: f64,
    /// Height of the evening bump relative to the flat night-time level.
    pub evening_weight: f64,
    /// Weekend day consumption relative to a weekday.
    pub weekend_factor: f64,
    /// Standard deviation of the multiplicative per-sample noise.
    pub noise_std: f64,
    pub resolution_min: i64,
}

impl Default for SyntheticBaseloadSpec {
    fn default() -> Self {
        SyntheticBaseloadSpec {
            mean_daily_kwh: 11.0,
            morning_weight: 1.5,
            evening_weight: 4.0,
            weekend_factor: 1.1,
            noise_std: 0.15,
            resolution_min: 60,
        }
    }
}

impl SyntheticBaseloadSpec {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("mean_daily_kwh", self.mean_daily_kwh),
            ("morning_weight", self.morning_weight),
            ("evening_weight", self.evening_weight),
            ("weekend_factor", self.weekend_factor),
            ("noise_std", self.noise_std),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "synthetic baseload {name} = {v} must be >= 0"
                )));
            }
        }
        if self.resolution_min <= 0 || MINUTES_PER_HOUR % self.resolution_min != 0 {
            return Err(Error::invalid(format!(
                "synthetic baseload resolution {} min must divide an hour",
                self.resolution_min
            )));
        }
        Ok(())
    }

    /// Fraction of a day's energy used in each clock hour; sums to 1.
    pub fn diurnal_shape(&self) -> [f64; 24] {
        let bump = |h: f64, centre: f64, width: f64| (-0.5 * ((h - centre) / width).powi(2)).exp();
        let mut shape = [0.0; 24];
        for (h, s) in shape.iter_mut().enumerate() {
            let mid = h as f64 + 0.5;
            *s = 1.0
                + self.morning_weight * bump(mid, 7.5, 1.0)
                + self.evening_weight * bump(mid, 18.5, 1.5);
        }
        let total: f64 = shape.iter().sum();
        shape.map(|s| s / total)
    }

    /// Day scaling such that a week of five weekdays and two weekend days averages to 1.
    pub fn day_factor(&self, weekday: Weekday) -> f64 {
        let weekday_scale = 7.0 / (5.0 + 2.0 * self.weekend_factor);
        match weekday {
            Weekday::Sat | Weekday::Sun => weekday_scale * self.weekend_factor,
            _ => weekday_scale,
        }
    }
}

fn check_whole_days(from: Timestamp, to: Timestamp) -> Result<()> {
    if from >= to || from.minute_of_day() != 0 || to.minute_of_day() != 0 {
        return Err(Error::invalid(format!(
            "synthetic range {from} .. {to} must be whole days"
        )));
    }
    Ok(())
}

/// One series per household over `[from, to)`, each from its own stream so households are
/// independent of one another's ids.
pub fn generate_baseload(
    spec: &SyntheticBaseloadSpec,
    households: u32,
    from: Timestamp,
    to: Timestamp,
    seed: u64,
) -> Result<Baseload> {
    spec.validate()?;
    check_whole_days(from, to)?;
    let shape = spec.diurnal_shape();
    let step = spec.resolution_min;
    let samples = ((to - from) / step) as usize;
    let noise = Normal::new(0.0, spec.noise_std).expect("validated std");
    let series = (0..households)
        .map(|h| {
            let mut stream = RngStream::for_member(seed, rng::BASELOAD, h);
            let values = (0..samples)
                .map(|i| {
                    let t = from + i as i64 * step;
                    let kw = spec.mean_daily_kwh
                        * spec.day_factor(t.weekday())
                        * shape[t.hour_of_day() as usize];
                    let eps = if spec.noise_std > 0.0 {
                        noise.sample(&mut stream)
                    } else {
                        0.0
                    };
                    (kw * (1.0 + eps)).max(0.0)
                })
                .collect();
            LoadSeries::new(from, step, values)
        })
        .collect();
    Baseload::new(series)
}

/// Hourly price-like signal: mean level with a daily two-peak profile, a winter-high annual
/// swing and multiplicative noise.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticHourlySpec {
    pub mean: f64,
    /// Relative swing of the daily profile.
    pub daily_amplitude: f64,
    /// Relative swing between mid-winter and mid-summer.
    pub seasonal_amplitude: f64,
    pub noise_std: f64,
}

impl SyntheticHourlySpec {
    pub fn spot_default() -> Self {
        SyntheticHourlySpec {
            mean: 0.4,
            daily_amplitude: 0.35,
            seasonal_amplitude: 0.2,
            noise_std: 0.15,
        }
    }

    pub fn co2_default() -> Self {
        SyntheticHourlySpec {
            mean: 0.15,
            daily_amplitude: 0.25,
            seasonal_amplitude: 0.3,
            noise_std: 0.1,
        }
    }

    fn validate(&self, what: &str) -> Result<()> {
        for (name, v) in [
            ("mean", self.mean),
            ("daily_amplitude", self.daily_amplitude),
            ("seasonal_amplitude", self.seasonal_amplitude),
            ("noise_std", self.noise_std),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "synthetic {what} {name} = {v} must be >= 0"
                )));
            }
        }
        Ok(())
    }

    fn generate(&self, from: Timestamp, to: Timestamp, stream: &mut RngStream) -> Result<Vec<f64>> {
        check_whole_days(from, to)?;
        let profile = SyntheticBaseloadSpec::default()
            .diurnal_shape()
            .map(|s| s * 24.0 - 1.0);
        let noise = Normal::new(0.0, self.noise_std).expect("validated std");
        let hours = (to - from) / MINUTES_PER_HOUR;
        Ok((0..hours)
            .map(|i| {
                let t = from + i * MINUTES_PER_HOUR;
                let season = (TAU * t.date().ordinal0() as f64 / 365.25).cos();
                let level = self.mean
                    * (1.0 + self.daily_amplitude * profile[t.hour_of_day() as usize])
                    * (1.0 + self.seasonal_amplitude * season);
                let eps = if self.noise_std > 0.0 {
                    noise.sample(stream)
                } else {
                    0.0
                };
                level * (1.0 + eps)
            })
            .collect())
    }
}

impl Default for SyntheticHourlySpec {
    fn default() -> Self {
        Self::spot_default()
    }
}

/// Spot prices may go negative through noise, as real ones occasionally do.
pub fn generate_spot_prices(
    spec: &SyntheticHourlySpec,
    from: Timestamp,
    to: Timestamp,
    seed: u64,
) -> Result<SpotPriceSeries> {
    spec.validate("spot price")?;
    let values = spec.generate(from, to, &mut RngStream::new(seed, rng::SPOT))?;
    Ok(SpotPriceSeries(HourlySeries::new(from, values)?))
}

pub fn generate_co2_intensity(
    spec: &SyntheticHourlySpec,
    from: Timestamp,
    to: Timestamp,
    seed: u64,
) -> Result<Co2IntensitySeries> {
    spec.validate("CO2 intensity")?;
    let values = spec.generate(from, to, &mut RngStream::new(seed, rng::CO2))?;
    Co2IntensitySeries::new(HourlySeries::new(
        from,
        values.into_iter().map(|v| v.max(0.0)).collect(),
    )?)
}

/// Three-level time-of-use table: night, day, and a 17-21 peak; summer rates are scaled down.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticTouSpec {
    pub night_dkk_per_kwh: f64,
    pub day_dkk_per_kwh: f64,
    pub peak_dkk_per_kwh: f64,
    pub summer_factor: f64,
}

impl Default for SyntheticTouSpec {
    fn default() -> Self {
        SyntheticTouSpec {
            night_dkk_per_kwh: 0.15,
            day_dkk_per_kwh: 0.35,
            peak_dkk_per_kwh: 1.05,
            summer_factor: 0.6,
        }
    }
}

impl SyntheticTouSpec {
    pub fn bands(&self) -> Vec<TouBand> {
        let mut bands = Vec::new();
        for (season, k) in [(Season::Winter, 1.0), (Season::Summer, self.summer_factor)] {
            for (start_hour, end_hour, rate) in [
                (0, 6, self.night_dkk_per_kwh),
                (6, 17, self.day_dkk_per_kwh),
                (17, 21, self.peak_dkk_per_kwh),
                (21, 24, self.day_dkk_per_kwh),
            ] {
                bands.push(TouBand {
                    season: Some(season),
                    start_hour,
                    end_hour,
                    dkk_per_kwh: rate * k,
                });
            }
        }
        bands
    }

    pub fn tariff(&self, calendar: SeasonCalendar) -> Result<DistributionTariff> {
        DistributionTariff::time_of_use(self.bands(), calendar)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticFixedTariffSpec {
    pub dkk_per_kwh: f64,
}

impl Default for SyntheticFixedTariffSpec {
    fn default() -> Self {
        SyntheticFixedTariffSpec { dkk_per_kwh: 0.4 }
    }
}

/// Whole days covering `[from, to)`.
pub fn day_range(from: Timestamp, to: Timestamp) -> (Timestamp, Timestamp) {
    let end = if to.minute_of_day() == 0 {
        to
    } else {
        to.floor_day() + MINUTES_PER_DAY
    };
    (from.floor_day(), end)
}
