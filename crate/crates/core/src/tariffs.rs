//! Spot prices, distribution tariffs and CO2 intensity.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::time::{Timestamp, MINUTES_PER_HOUR};

/// Hour-resolution series, constant within each clock hour.
#[derive(Debug, Clone, PartialEq)]
pub struct HourlySeries {
    start: Timestamp,
    values: Vec<f64>,
}

impl HourlySeries {
    pub fn new(start: Timestamp, values: Vec<f64>) -> Result<Self> {
        if start.minute_of_hour() != 0 {
            return Err(Error::invalid(format!(
                "hourly series starts mid-hour at {start}"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at row {}", i + 1)));
        }
        Ok(HourlySeries { start, values })
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }

    pub fn end(&self) -> Timestamp {
        self.start + self.values.len() as i64 * MINUTES_PER_HOUR
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, t: Timestamp) -> Option<f64> {
        if t < self.start {
            return None;
        }
        self.values
            .get(((t - self.start) / MINUTES_PER_HOUR) as usize)
            .copied()
    }

    pub fn covers(&self, from: Timestamp, to: Timestamp) -> bool {
        self.start <= from && to <= self.end()
    }

    /// Missing part of `[from, to)`, if any.
    pub fn gap(&self, from: Timestamp, to: Timestamp) -> Option<(Timestamp, Timestamp)> {
        if from < self.start {
            Some((from, self.start.min(to)))
        } else if to > self.end() {
            Some((self.end().max(from), to))
        } else {
            None
        }
    }
}

/// Hourly spot price, DKK/kWh. Negative prices are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct SpotPriceSeries(pub HourlySeries);

/// Hourly grid CO2 intensity, kg/kWh.
#[derive(Debug, Clone, PartialEq)]
pub struct Co2IntensitySeries(pub HourlySeries);

impl Co2IntensitySeries {
    pub fn new(series: HourlySeries) -> Result<Self> {
        if let Some(i) = series.values().iter().position(|&v| v < 0.0) {
            return Err(Error::invalid(format!(
                "negative CO2 intensity at row {}",
                i + 1
            )));
        }
        Ok(Co2IntensitySeries(series))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TariffMode {
    Fixed,
    TimeOfUse,
}

impl TariffMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TariffMode::Fixed => "fixed",
            TariffMode::TimeOfUse => "time-of-use",
        }
    }
}

impl fmt::Display for TariffMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TariffMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(TariffMode::Fixed),
            "time-of-use" | "tou" => Ok(TariffMode::TimeOfUse),
            _ => Err(Error::invalid(format!(
                "unknown tariff mode {s:?}; valid: fixed, time-of-use"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Season {
    Summer,
    Winter,
}

/// Which months count as summer for seasonal time-of-use bands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeasonCalendar {
    pub summer_months: Vec<u32>,
}

impl Default for SeasonCalendar {
    fn default() -> Self {
        SeasonCalendar {
            summer_months: (4..=9).collect(),
        }
    }
}

impl SeasonCalendar {
    pub fn season_of(&self, t: Timestamp) -> Season {
        if self.summer_months.contains(&t.month()) {
            Season::Summer
        } else {
            Season::Winter
        }
    }
}

/// One row of a time-of-use table: `[start_hour, end_hour)` with wrap-around past midnight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TouBand {
    /// `None` applies to both seasons.
    pub season: Option<Season>,
    pub start_hour: u32,
    pub end_hour: u32,
    pub dkk_per_kwh: f64,
}

impl TouBand {
    fn hours(&self) -> Vec<u32> {
        if self.start_hour < self.end_hour {
            (self.start_hour..self.end_hour).collect()
        } else {
            (self.start_hour..24).chain(0..self.end_hour).collect()
        }
    }

    fn applies_to(&self, season: Season) -> bool {
        self.season.is_none_or(|s| s == season)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DistributionTariff {
    Fixed(f64),
    TimeOfUse {
        bands: Vec<TouBand>,
        calendar: SeasonCalendar,
        /// Resolved rate per season (winter, summer) and hour.
        table: [[f64; 24]; 2],
    },
}

impl DistributionTariff {
    pub fn fixed(dkk_per_kwh: f64) -> Result<Self> {
        if !(dkk_per_kwh.is_finite() && dkk_per_kwh >= 0.0) {
            return Err(Error::invalid(format!(
                "tariff rate {dkk_per_kwh} must be >= 0"
            )));
        }
        Ok(DistributionTariff::Fixed(dkk_per_kwh))
    }

    /// Bands must cover every hour of every season exactly once.
    pub fn time_of_use(bands: Vec<TouBand>, calendar: SeasonCalendar) -> Result<Self> {
        let mut table = [[f64::NAN; 24]; 2];
        for (row, season) in [Season::Winter, Season::Summer].into_iter().enumerate() {
            for band in bands.iter().filter(|b| b.applies_to(season)) {
                if band.start_hour > 23 || band.end_hour > 24 || band.start_hour == band.end_hour {
                    return Err(Error::invalid(format!(
                        "invalid hour range {}-{}",
                        band.start_hour, band.end_hour
                    )));
                }
                if !(band.dkk_per_kwh.is_finite() && band.dkk_per_kwh >= 0.0) {
                    return Err(Error::invalid(format!(
                        "tariff rate {} must be >= 0",
                        band.dkk_per_kwh
                    )));
                }
                for h in band.hours() {
                    let slot = &mut table[row][h as usize];
                    if !slot.is_nan() {
                        return Err(Error::invalid(format!(
                            "{season:?} hour {h} is covered twice"
                        )));
                    }
                    *slot = band.dkk_per_kwh;
                }
            }
            if let Some(h) = table[row].iter().position(|v| v.is_nan()) {
                return Err(Error::invalid(format!(
                    "{season:?} hour {h} has no tariff band"
                )));
            }
        }
        Ok(DistributionTariff::TimeOfUse {
            bands,
            calendar,
            table,
        })
    }

    pub fn rate_at(&self, t: Timestamp) -> f64 {
        match self {
            DistributionTariff::Fixed(r) => *r,
            DistributionTariff::TimeOfUse {
                calendar, table, ..
            } => {
                let row = match calendar.season_of(t) {
                    Season::Winter => 0,
                    Season::Summer => 1,
                };
                table[row][t.hour_of_day() as usize]
            }
        }
    }

    pub fn mode(&self) -> TariffMode {
        match self {
            DistributionTariff::Fixed(_) => TariffMode::Fixed,
            DistributionTariff::TimeOfUse { .. } => TariffMode::TimeOfUse,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceQuote {
    pub spot: f64,
    pub tariff: f64,
    pub addons: f64,
    pub total: f64,
}

/// Consumer price for the hour containing `t`.
pub fn quote_at(
    t: Timestamp,
    spot: &SpotPriceSeries,
    tariff: &DistributionTariff,
    addons: f64,
) -> Result<PriceQuote> {
    let s = spot.0.value_at(t).ok_or(Error::InputCoverage {
        series: "spot price".into(),
        missing_from: t.floor_hour(),
        missing_to: t.floor_hour() + MINUTES_PER_HOUR,
    })?;
    let r = tariff.rate_at(t);
    Ok(PriceQuote {
        spot: s,
        tariff: r,
        addons,
        total: s + r + addons,
    })
}

pub fn cost_of_energy(kwh: f64, quote: &PriceQuote) -> f64 {
    kwh * quote.total
}

pub fn co2_of_energy(kwh: f64, intensity_kg_per_kwh: f64) -> f64 {
    kwh * intensity_kg_per_kwh
}

/// All price and emission inputs of a scenario.
#[derive(Debug, Clone)]
pub struct TariffSet {
    pub spot: SpotPriceSeries,
    pub co2: Co2IntensitySeries,
    pub fixed: Option<DistributionTariff>,
    pub time_of_use: Option<DistributionTariff>,
    pub addons_dkk_per_kwh: f64,
}

impl TariffSet {
    pub fn tariff(&self, mode: TariffMode) -> Result<&DistributionTariff> {
        match mode {
            TariffMode::Fixed => self.fixed.as_ref(),
            TariffMode::TimeOfUse => self.time_of_use.as_ref(),
        }
        .ok_or_else(|| Error::invalid(format!("scenario has no {mode} distribution tariff")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn day() -> Timestamp {
        Timestamp::from_ymd_hm(2039, 1, 10, 0, 0).unwrap()
    }

    fn spot(values: Vec<f64>) -> SpotPriceSeries {
        SpotPriceSeries(HourlySeries::new(day(), values).unwrap())
    }

    fn peak_tou(peak: f64, off: f64) -> DistributionTariff {
        DistributionTariff::time_of_use(
            vec![
                TouBand {
                    season: None,
                    start_hour: 17,
                    end_hour: 20,
                    dkk_per_kwh: peak,
                },
                TouBand {
                    season: None,
                    start_hour: 20,
                    end_hour: 17,
                    dkk_per_kwh: off,
                },
            ],
            SeasonCalendar::default(),
        )
        .unwrap()
    }

    #[test]
    fn fixed_quote_sums() {
        let q = quote_at(
            day() + 90,
            &spot(vec![1.0; 24]),
            &DistributionTariff::fixed(0.30).unwrap(),
            0.0,
        )
        .unwrap();
        assert!((q.total - 1.30).abs() < 1e-12);
        assert_eq!(q.total, q.spot + q.tariff + q.addons);
    }

    #[test]
    fn tou_lookup_in_peak() {
        let tariff = peak_tou(1.2, 0.2);
        let q = quote_at(day() + 18 * 60 + 30, &spot(vec![1.0; 24]), &tariff, 0.0).unwrap();
        assert_eq!(q.tariff, 1.2);
        assert_eq!(tariff.rate_at(day() + 2 * 60), 0.2);
    }

    #[test]
    fn negative_spot_passes_through() {
        let q = quote_at(
            day(),
            &spot(vec![-0.05; 24]),
            &DistributionTariff::fixed(0.3).unwrap(),
            0.0,
        )
        .unwrap();
        assert!(q.total < q.tariff);
    }

    #[test]
    fn outside_coverage_is_an_error() {
        let err = quote_at(
            day() + 25 * 60,
            &spot(vec![1.0; 24]),
            &DistributionTariff::fixed(0.3).unwrap(),
            0.0,
        );
        assert!(matches!(err, Err(Error::InputCoverage { .. })));
    }

    #[test]
    fn cost_and_co2() {
        let q = PriceQuote {
            spot: 1.0,
            tariff: 0.3495,
            addons: 0.0,
            total: 1.3495,
        };
        assert!((cost_of_energy(10.0, &q) - 13.495).abs() < 1e-12);
        assert_eq!(cost_of_energy(0.0, &q), 0.0);
        assert_eq!(co2_of_energy(0.0, 0.5), 0.0);
        assert_eq!(co2_of_energy(2.0, 0.5), 1.0);
    }

    #[test]
    fn tou_partition_is_checked() {
        let gap = DistributionTariff::time_of_use(
            vec![TouBand {
                season: None,
                start_hour: 0,
                end_hour: 23,
                dkk_per_kwh: 0.1,
            }],
            SeasonCalendar::default(),
        );
        assert!(gap.is_err());
        let overlap = DistributionTariff::time_of_use(
            vec![
                TouBand {
                    season: None,
                    start_hour: 0,
                    end_hour: 24,
                    dkk_per_kwh: 0.1,
                },
                TouBand {
                    season: Some(Season::Summer),
                    start_hour: 17,
                    end_hour: 20,
                    dkk_per_kwh: 0.5,
                },
            ],
            SeasonCalendar::default(),
        );
        assert!(overlap.is_err());
        let summer_only = DistributionTariff::time_of_use(
            vec![TouBand {
                season: Some(Season::Summer),
                start_hour: 0,
                end_hour: 24,
                dkk_per_kwh: 0.1,
            }],
            SeasonCalendar::default(),
        );
        assert!(summer_only.is_err(), "winter is uncovered");
    }

    #[test]
    fn seasonal_rates() {
        let tariff = DistributionTariff::time_of_use(
            vec![
                TouBand {
                    season: Some(Season::Winter),
                    start_hour: 0,
                    end_hour: 24,
                    dkk_per_kwh: 0.4,
                },
                TouBand {
                    season: Some(Season::Summer),
                    start_hour: 0,
                    end_hour: 24,
                    dkk_per_kwh: 0.1,
                },
            ],
            SeasonCalendar::default(),
        )
        .unwrap();
        assert_eq!(
            tariff.rate_at(Timestamp::from_ymd_hm(2039, 1, 1, 12, 0).unwrap()),
            0.4
        );
        assert_eq!(
            tariff.rate_at(Timestamp::from_ymd_hm(2039, 7, 1, 12, 0).unwrap()),
            0.1
        );
    }

    proptest! {
        #[test]
        fn cost_is_linear(a in 0.0..100.0f64, b in 0.0..100.0f64, total in -1.0..5.0f64) {
            let q = PriceQuote { spot: total, tariff: 0.0, addons: 0.0, total };
            let lhs = cost_of_energy(a + b, &q);
            let rhs = cost_of_energy(a, &q) + cost_of_energy(b, &q);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn quote_constant_within_hour(hour in 0i64..24, m1 in 0i64..60, m2 in 0i64..60) {
            let s = spot((0..24).map(|h| h as f64 * 0.1).collect());
            let tariff = peak_tou(1.0, 0.25);
            let a = quote_at(day() + hour * 60 + m1, &s, &tariff, 0.1).unwrap();
            let b = quote_at(day() + hour * 60 + m2, &s, &tariff, 0.1).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn every_minute_has_one_tou_rate(m in 0i64..(366 * 1440)) {
            let t = Timestamp::start_of_year(2039).unwrap() + m;
            let rate = peak_tou(1.0, 0.25).rate_at(t);
            prop_assert!(rate == 1.0 || rate == 0.25);
            prop_assert_eq!(rate == 1.0, (17..20).contains(&t.hour_of_day()));
        }
    }
}
