#![allow(dead_code)]

use evsim::engine::{Baseload, FixedVehicle, FleetSource, ScenarioData, StochasticFleet};
use evsim::fleet::{AdoptionCurve, Catalog, DrivingPattern, EvModel, HouseholdId, TripEvent};
use evsim::grid::{LoadSeries, Transformer};
use evsim::kpi::OverloadCountMode;
use evsim::synthetic::{
    generate_baseload, generate_co2_intensity, generate_spot_prices, SyntheticBaseloadSpec,
    SyntheticHourlySpec, SyntheticTouSpec,
};
use evsim::tariffs::{DistributionTariff, SeasonCalendar, TariffMode, TariffSet};
use evsim::{ExperimentSpec, SimulationSpan, StrategyKind, Timestamp};

pub fn at(year: i32, month: u32, day: u32, hour: u32, minute: u32) -> Timestamp {
    Timestamp::from_ymd_hm(year, month, day, hour, minute).unwrap()
}

pub fn tariffs(from: Timestamp, to: Timestamp, seed: u64) -> TariffSet {
    TariffSet {
        spot: generate_spot_prices(&SyntheticHourlySpec::spot_default(), from, to, seed).unwrap(),
        co2: generate_co2_intensity(&SyntheticHourlySpec::co2_default(), from, to, seed).unwrap(),
        fixed: Some(DistributionTariff::fixed(0.4).unwrap()),
        time_of_use: Some(
            SyntheticTouSpec::default()
                .tariff(SeasonCalendar::default())
                .unwrap(),
        ),
        addons_dkk_per_kwh: 0.75,
    }
}

/// Synthetic households with a stochastic fleet following `curve`; `from`/`to` must be midnights.
pub fn synthetic_data(
    households: u32,
    curve: Vec<(i32, u32)>,
    from: Timestamp,
    to: Timestamp,
    capacity_kw: f64,
    seed: u64,
) -> ScenarioData {
    ScenarioData {
        households,
        transformer: Transformer::new(capacity_kw, 0.0).unwrap(),
        baseload: generate_baseload(
            &SyntheticBaseloadSpec::default(),
            households,
            from,
            to,
            seed,
        )
        .unwrap(),
        tariffs: tariffs(from, to, seed),
        fleet: FleetSource::Stochastic(StochasticFleet {
            catalog: Catalog::placeholder(),
            curve: AdoptionCurve::new(curve).unwrap(),
            pattern: DrivingPattern::default(),
            initial_soc_fraction: 0.8,
            target_fraction: 1.0,
        }),
        overload_mode: OverloadCountMode::Hours,
    }
}

/// Hand-placed vehicles over a flat baseload of `baseload_kw` per household.
pub fn fixed_data(
    households: u32,
    vehicles: Vec<FixedVehicle>,
    from: Timestamp,
    to: Timestamp,
    capacity_kw: f64,
    baseload_kw: f64,
) -> ScenarioData {
    let hours = ((to - from) / 60) as usize;
    let series = LoadSeries::new(from, 60, vec![baseload_kw; hours]);
    ScenarioData {
        households,
        transformer: Transformer::new(capacity_kw, 0.0).unwrap(),
        baseload: Baseload::new(vec![series; households as usize]).unwrap(),
        tariffs: tariffs(from, to, 1),
        fleet: FleetSource::Fixed(vehicles),
        overload_mode: OverloadCountMode::Hours,
    }
}

pub fn vehicle(
    household: u32,
    model: EvModel,
    adopted_at: Timestamp,
    soc: f64,
    target: f64,
    trips: Vec<TripEvent>,
) -> FixedVehicle {
    FixedVehicle {
        household: HouseholdId(household),
        model,
        adopted_at,
        initial_soc_kwh: soc,
        target_kwh: target,
        trips,
    }
}

pub fn trip(departure: Timestamp, arrival: Timestamp, energy_kwh: f64) -> TripEvent {
    TripEvent {
        departure,
        arrival,
        energy_kwh,
    }
}

/// Experiment with the strategy's default decision interval, or `interval` when given.
pub fn experiment(
    strategy: StrategyKind,
    from: Timestamp,
    to: Timestamp,
    seed: u64,
    interval: Option<i64>,
) -> ExperimentSpec {
    let interval = interval.unwrap_or(strategy.default_decision_interval());
    ExperimentSpec {
        id: strategy.as_str().to_string(),
        strategy,
        span: SimulationSpan::minutes(from, to, interval).unwrap(),
        tariff_mode: TariffMode::Fixed,
        seed,
        buffer_kw: 0.0,
    }
}
