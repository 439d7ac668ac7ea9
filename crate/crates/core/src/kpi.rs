//! Yearly key performance indicators and baseline comparisons.

use std::fmt;
use std::str::FromStr;

use crate::engine::{ScenarioData, SimulationOutput};
use crate::error::{Error, Result};
use crate::grid::{hourly_max, overloaded_hours, LoadSeries, Transformer};
use crate::tariffs::{quote_at, DistributionTariff, PriceQuote, TariffMode, TariffSet};
use crate::time::{Timestamp, MINUTES_PER_HOUR};

/// How overloads in a year are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OverloadCountMode {
    Events,
    /// Clock hours containing at least one overloaded minute.
    #[default]
    Hours,
    Minutes,
}

impl FromStr for OverloadCountMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "events" => Ok(OverloadCountMode::Events),
            "hours" => Ok(OverloadCountMode::Hours),
            "minutes" => Ok(OverloadCountMode::Minutes),
            _ => Err(Error::invalid(format!(
                "unknown overload count mode {s:?}; valid: events, hours, minutes"
            ))),
        }
    }
}

/// One experiment-year. `None` marks a metric that is not applicable (e.g. no EV owners yet).
#[derive(Debug, Clone, PartialEq)]
pub struct KpiReport {
    pub year: i32,
    pub overload_count: u64,
    pub avg_charging_cost_dkk_per_kwh: Option<f64>,
    pub avg_total_bill_dkk: Option<f64>,
    pub avg_total_co2_kg: Option<f64>,
    pub dissatisfaction_count: u64,
    pub load_factor: Option<f64>,
    pub dso_revenue_dkk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    OverloadCount,
    AvgChargingCost,
    AvgTotalBill,
    AvgTotalCo2,
    Dissatisfaction,
    LoadFactor,
    DsoRevenue,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::OverloadCount,
        Metric::AvgChargingCost,
        Metric::AvgTotalBill,
        Metric::AvgTotalCo2,
        Metric::Dissatisfaction,
        Metric::LoadFactor,
        Metric::DsoRevenue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::OverloadCount => "overload_count",
            Metric::AvgChargingCost => "avg_charging_cost",
            Metric::AvgTotalBill => "avg_total_bill",
            Metric::AvgTotalCo2 => "avg_total_co2",
            Metric::Dissatisfaction => "dissatisfaction",
            Metric::LoadFactor => "load_factor",
            Metric::DsoRevenue => "dso_revenue",
        }
    }

    /// Reporting precision: 4 decimals for DKK/kWh, kg and ratios, 2 for DKK amounts.
    pub fn decimals(self) -> usize {
        match self {
            Metric::OverloadCount | Metric::Dissatisfaction => 0,
            Metric::AvgChargingCost | Metric::AvgTotalCo2 | Metric::LoadFactor => 4,
            Metric::AvgTotalBill | Metric::DsoRevenue => 2,
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl KpiReport {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::OverloadCount => Some(self.overload_count as f64),
            Metric::AvgChargingCost => self.avg_charging_cost_dkk_per_kwh,
            Metric::AvgTotalBill => self.avg_total_bill_dkk,
            Metric::AvgTotalCo2 => self.avg_total_co2_kg,
            Metric::Dissatisfaction => Some(self.dissatisfaction_count as f64),
            Metric::LoadFactor => self.load_factor,
            Metric::DsoRevenue => Some(self.dso_revenue_dkk),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub metric: Metric,
    pub value: Option<f64>,
    pub baseline: Option<f64>,
    /// `None` when either side is missing or the baseline is zero.
    pub pct_difference: Option<f64>,
}

/// Round half away from zero to `decimals` places.
pub fn round_to(x: f64, decimals: usize) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    // Adding zero turns a rounded -0.0 into 0.0.
    (x * scale).round() / scale + 0.0
}

/// `(a - b) / b * 100`, rounded to two decimals.
pub fn pct_difference(a: f64, b: f64) -> Option<f64> {
    if b == 0.0 {
        None
    } else {
        Some(round_to((a - b) / b * 100.0, 2))
    }
}

pub fn compare_reports(a: &KpiReport, baseline: &KpiReport) -> Result<Vec<ComparisonRow>> {
    if a.year != baseline.year {
        return Err(Error::invalid(format!(
            "cannot compare {} against baseline year {}",
            a.year, baseline.year
        )));
    }
    Ok(Metric::ALL
        .into_iter()
        .map(|metric| {
            let value = a.get(metric);
            let base = baseline.get(metric);
            let pct = match (value, base) {
                (Some(v), Some(b)) => pct_difference(v, b),
                _ => None,
            };
            ComparisonRow {
                metric,
                value,
                baseline: base,
                pct_difference: pct,
            }
        })
        .collect())
}

/// Mean over peak of an hourly series.
pub fn load_factor(series: &LoadSeries) -> Result<f64> {
    let peak = series.max().ok_or(Error::Undefined("load factor"))?;
    if peak <= 0.0 {
        return Err(Error::Undefined("load factor"));
    }
    Ok(series.mean().expect("non-empty") / peak)
}

/// Energy-weighted mean consumer price of charged energy.
pub fn avg_charging_cost(charges: &[(Timestamp, f64)], quotes: &HourlyQuotes) -> Result<f64> {
    let mut energy = 0.0;
    let mut cost = 0.0;
    for &(t, kwh) in charges {
        energy += kwh;
        cost += kwh * quotes.quote(t)?.total;
    }
    if energy <= 0.0 {
        return Err(Error::Undefined("average charging cost"));
    }
    Ok(cost / energy)
}

/// Distribution-tariff income only: spot and add-ons are excluded.
pub fn dso_revenue(
    consumption: impl IntoIterator<Item = (Timestamp, f64)>,
    tariff: &DistributionTariff,
) -> f64 {
    consumption
        .into_iter()
        .map(|(t, kwh)| kwh * tariff.rate_at(t))
        .sum()
}

/// Quotes and CO2 intensities for each hour of a window, computed once.
#[derive(Debug, Clone)]
pub struct HourlyQuotes {
    start: Timestamp,
    quotes: Vec<PriceQuote>,
    co2: Vec<f64>,
}

impl HourlyQuotes {
    pub fn build(
        tariffs: &TariffSet,
        mode: TariffMode,
        from: Timestamp,
        to: Timestamp,
    ) -> Result<Self> {
        let tariff = tariffs.tariff(mode)?;
        let start = from.floor_hour();
        let mut quotes = Vec::new();
        let mut co2 = Vec::new();
        let mut h = start;
        while h < to {
            quotes.push(quote_at(
                h,
                &tariffs.spot,
                tariff,
                tariffs.addons_dkk_per_kwh,
            )?);
            co2.push(tariffs.co2.0.value_at(h).ok_or(Error::InputCoverage {
                series: "CO2 intensity".into(),
                missing_from: h,
                missing_to: h + MINUTES_PER_HOUR,
            })?);
            h = h + MINUTES_PER_HOUR;
        }
        Ok(HourlyQuotes { start, quotes, co2 })
    }

    fn index(&self, t: Timestamp) -> Result<usize> {
        let i = if t >= self.start {
            ((t - self.start) / MINUTES_PER_HOUR) as usize
        } else {
            usize::MAX
        };
        if i >= self.quotes.len() {
            return Err(Error::InputCoverage {
                series: "price window".into(),
                missing_from: t.floor_hour(),
                missing_to: t.floor_hour() + MINUTES_PER_HOUR,
            });
        }
        Ok(i)
    }

    pub fn quote(&self, t: Timestamp) -> Result<PriceQuote> {
        Ok(self.quotes[self.index(t)?])
    }

    pub fn co2(&self, t: Timestamp) -> Result<f64> {
        Ok(self.co2[self.index(t)?])
    }

    pub fn hours(&self) -> usize {
        self.quotes.len()
    }

    pub fn start(&self) -> Timestamp {
        self.start
    }
}

/// Intersection of a calendar year with `[from, to)`.
pub fn year_window(year: i32, from: Timestamp, to: Timestamp) -> Result<(Timestamp, Timestamp)> {
    let a = Timestamp::start_of_year(year)?.max(from);
    let b = Timestamp::start_of_year(year + 1)?.min(to);
    Ok((a, b))
}

/// All seven KPIs of one calendar year of a run.
///
/// Per-user averages divide by the households owning an EV at the end of the window; their
/// bills and emissions cover all of that household's consumption in the window.
pub fn assemble_report(
    year: i32,
    output: &SimulationOutput,
    data: &ScenarioData,
) -> Result<KpiReport> {
    let spec = &output.experiment;
    let (from, to) = year_window(year, spec.span.start, spec.span.end)?;
    if from >= to {
        return Err(Error::invalid(format!(
            "year {year} lies outside the simulated span"
        )));
    }
    let tr = Transformer::new(data.transformer.capacity_kw, 0.0)?;
    let window = output.load.slice(from, to);

    let overload_count = {
        let events: Vec<_> = output
            .overloads
            .iter()
            .filter(|e| e.start >= from && e.start < to)
            .copied()
            .collect();
        match data.overload_mode {
            OverloadCountMode::Events => events.len() as u64,
            OverloadCountMode::Hours => overloaded_hours(&events)
                .into_iter()
                .filter(|h| *h >= from.floor_hour() && *h < to)
                .count() as u64,
            OverloadCountMode::Minutes => window
                .values
                .iter()
                .filter(|&&v| v > tr.capacity_kw)
                .count() as u64,
        }
    };

    let quotes = HourlyQuotes::build(&data.tariffs, spec.tariff_mode, from, to)?;
    let tariff = data.tariffs.tariff(spec.tariff_mode)?;

    let in_window = |t: &Timestamp| *t >= from.floor_hour() && *t < to;
    let charges: Vec<(Timestamp, f64)> = output
        .vehicles
        .iter()
        .flat_map(|v| v.charging.iter().copied())
        .filter(|(t, _)| in_window(t))
        .collect();
    let avg_charging_cost = match avg_charging_cost(&charges, &quotes) {
        Ok(c) => Some(c),
        Err(Error::Undefined(_)) => None,
        Err(e) => return Err(e),
    };

    // Hourly consumption per household: baseload plus any EV charging.
    let hours = quotes.hours();
    let households = data.households as usize;
    let mut consumption = vec![vec![0.0f64; hours]; households];
    for (h, series) in data.baseload.households().iter().enumerate() {
        let part = series.slice(from, to);
        let step_kwh = part.resolution as f64 / 60.0;
        for (t, kw) in part.iter() {
            let i = ((t - quotes.start()) / MINUTES_PER_HOUR) as usize;
            consumption[h][i] += kw * step_kwh;
        }
    }
    for v in &output.vehicles {
        for &(t, kwh) in v.charging.iter().filter(|(t, _)| in_window(t)) {
            let i = ((t - quotes.start()) / MINUTES_PER_HOUR) as usize;
            consumption[v.household.0 as usize][i] += kwh;
        }
    }
    let hour_at = |i: usize| quotes.start() + i as i64 * MINUTES_PER_HOUR;

    let owners: Vec<usize> = output
        .vehicles
        .iter()
        .filter(|v| v.adopted_at < to)
        .map(|v| v.household.0 as usize)
        .collect();
    let (avg_bill, avg_co2) = if owners.is_empty() {
        (None, None)
    } else {
        let mut bill = 0.0;
        let mut co2 = 0.0;
        for &h in &owners {
            for (i, &kwh) in consumption[h].iter().enumerate() {
                bill += kwh * quotes.quote(hour_at(i))?.total;
                co2 += kwh * quotes.co2(hour_at(i))?;
            }
        }
        let n = owners.len() as f64;
        (Some(bill / n), Some(co2 / n))
    };

    let revenue = dso_revenue(
        consumption
            .iter()
            .flat_map(|row| row.iter().enumerate().map(|(i, &kwh)| (hour_at(i), kwh))),
        tariff,
    );

    let dissatisfaction_count = output
        .departures
        .iter()
        .filter(|d| !d.satisfied && d.at >= from && d.at < to)
        .count() as u64;

    let load_factor = match load_factor(&hourly_max(&window)) {
        Ok(lf) => Some(lf),
        Err(Error::Undefined(_)) => None,
        Err(e) => return Err(e),
    };

    Ok(KpiReport {
        year,
        overload_count,
        avg_charging_cost_dkk_per_kwh: avg_charging_cost,
        avg_total_bill_dkk: avg_bill,
        avg_total_co2_kg: avg_co2,
        dissatisfaction_count,
        load_factor,
        dso_revenue_dkk: revenue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tariffs::{HourlySeries, SeasonCalendar, SpotPriceSeries, TouBand};
    use proptest::prelude::*;

    fn day() -> Timestamp {
        Timestamp::from_ymd_hm(2039, 2, 1, 0, 0).unwrap()
    }

    fn report(year: i32, lf: f64) -> KpiReport {
        KpiReport {
            year,
            overload_count: 543,
            avg_charging_cost_dkk_per_kwh: Some(1.3495),
            avg_total_bill_dkk: Some(11_025.08),
            avg_total_co2_kg: Some(589.4865),
            dissatisfaction_count: 59,
            load_factor: Some(lf),
            dso_revenue_dkk: 168_397.66,
        }
    }

    #[test]
    fn load_factor_examples() {
        let s = |v: Vec<f64>| LoadSeries::new(day(), 60, v);
        assert_eq!(load_factor(&s(vec![5.0; 24])).unwrap(), 1.0);
        assert!((load_factor(&s(vec![100.0, 300.0])).unwrap() - 200.0 / 300.0).abs() < 1e-12);
        assert!(
            (load_factor(&s(vec![50.0, 150.0])).unwrap()
                - load_factor(&s(vec![100.0, 300.0])).unwrap())
            .abs()
                < 1e-12
        );
        assert!(matches!(
            load_factor(&s(vec![0.0; 4])),
            Err(Error::Undefined(_))
        ));
        assert!(load_factor(&s(vec![])).is_err());
    }

    fn quotes(prices: Vec<f64>) -> HourlyQuotes {
        let n = prices.len() as i64;
        let set = TariffSet {
            spot: SpotPriceSeries(HourlySeries::new(day(), prices).unwrap()),
            co2: crate::tariffs::Co2IntensitySeries(
                HourlySeries::new(day(), vec![0.1; n as usize]).unwrap(),
            ),
            fixed: Some(DistributionTariff::fixed(0.0).unwrap()),
            time_of_use: None,
            addons_dkk_per_kwh: 0.0,
        };
        HourlyQuotes::build(&set, TariffMode::Fixed, day(), day() + n * 60).unwrap()
    }

    #[test]
    fn charging_cost_weighted_mean() {
        let q = quotes(vec![1.3495; 4]);
        let charges = [(day(), 3.0), (day() + 60, 7.0)];
        assert!((avg_charging_cost(&charges, &q).unwrap() - 1.3495).abs() < 1e-12);

        let q = quotes(vec![1.0, 2.0]);
        let charges = [(day(), 5.0), (day() + 60, 5.0)];
        assert!((avg_charging_cost(&charges, &q).unwrap() - 1.5).abs() < 1e-12);

        // Shift 2 kWh from the 2.0 hour into the 1.0 hour.
        let shifted = [(day(), 7.0), (day() + 60, 3.0)];
        assert!(avg_charging_cost(&shifted, &q).unwrap() < 1.5);

        assert!(matches!(
            avg_charging_cost(&[], &q),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn dso_revenue_examples() {
        let fixed = DistributionTariff::fixed(0.5).unwrap();
        assert!((dso_revenue([(day(), 400.0), (day() + 60, 600.0)], &fixed) - 500.0).abs() < 1e-9);
        assert_eq!(dso_revenue(std::iter::empty(), &fixed), 0.0);

        let tou = DistributionTariff::time_of_use(
            vec![
                TouBand {
                    season: None,
                    start_hour: 17,
                    end_hour: 21,
                    dkk_per_kwh: 1.2,
                },
                TouBand {
                    season: None,
                    start_hour: 21,
                    end_hour: 17,
                    dkk_per_kwh: 0.3,
                },
            ],
            SeasonCalendar::default(),
        )
        .unwrap();
        let peak = dso_revenue([(day() + 18 * 60, 10.0)], &tou);
        let off = dso_revenue([(day() + 23 * 60, 10.0)], &tou);
        assert!(off < peak);
    }

    #[test]
    fn percentage_differences_from_published_inputs() {
        assert_eq!(pct_difference(0.252, 0.2048), Some(23.05));
        assert_eq!(pct_difference(0.2977, 0.2025), Some(47.01));
        assert_eq!(pct_difference(1.3482, 1.3495), Some(-0.10));
        assert_eq!(pct_difference(147_006.17, 168_397.66), Some(-12.70));
        assert_eq!(pct_difference(1.0, 0.0), None);
    }

    #[test]
    fn compare_rows() {
        let rows = compare_reports(&report(2039, 0.2977), &report(2039, 0.2025)).unwrap();
        assert_eq!(rows.len(), 7);
        let lf = rows
            .iter()
            .find(|r| r.metric == Metric::LoadFactor)
            .unwrap();
        assert_eq!(lf.pct_difference, Some(47.01));
        let same = compare_reports(&report(2039, 0.3), &report(2039, 0.3)).unwrap();
        assert!(same.iter().all(|r| r.pct_difference == Some(0.0)));
        assert!(compare_reports(&report(2038, 0.3), &report(2039, 0.3)).is_err());

        let mut zero = report(2039, 0.3);
        zero.overload_count = 0;
        let rows = compare_reports(&report(2039, 0.3), &zero).unwrap();
        assert_eq!(rows[0].pct_difference, None);
    }

    #[test]
    fn rounding_half_away_from_zero() {
        assert_eq!(round_to(0.125, 2), 0.13);
        assert_eq!(round_to(-0.125, 2), -0.13);
        assert_eq!(round_to(2.5, 0), 3.0);
    }

    proptest! {
        #[test]
        fn load_factor_scale_invariant(values in prop::collection::vec(0.1..500.0f64, 1..100), k in 0.01..100.0f64) {
            let a = load_factor(&LoadSeries::new(day(), 60, values.clone())).unwrap();
            let b = load_factor(&LoadSeries::new(day(), 60, values.iter().map(|v| v * k).collect())).unwrap();
            prop_assert!((a - b).abs() < 1e-9);
            prop_assert!(a > 0.0 && a <= 1.0 + 1e-12);
        }
    }
}
