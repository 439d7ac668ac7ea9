//! Discrete-time engine.
//!
//! Each tick runs a fixed phase order: trips (departures and arrivals), baseload update,
//! dispatch (decision boundaries only), charging physics, load recording. Agents are stepped
//! in ascending household id. Between boundaries the last allocation stays in force, except
//! that departing vehicles and vehicles reaching their target drop their grant at once.
//! Released capacity is not redistributed before the next boundary.

use std::collections::VecDeque;

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};
use crate::fleet::{
    apply_trip_energy, charge_step, record_departure_satisfaction, sample_adoptions,
    sample_daily_trips, AdoptionCurve, Catalog, DrivingPattern, EvModel, HouseholdId, Location,
    Satisfaction, TripEvent, Vehicle, VehicleId,
};
use crate::grid::{aggregate_load, detect_overloads, LoadSeries, OverloadEvent, Transformer};
use crate::kpi::{assemble_report, KpiReport, OverloadCountMode};
use crate::rng::{self, RngStream};
use crate::strategies::{compute_budget, ChargeRequest, Dispatcher, StrategyKind};
use crate::tariffs::{TariffMode, TariffSet};
use crate::time::{SimulationSpan, Timestamp, MINUTES_PER_HOUR};

/// Per-household baseload, all series sharing start and resolution.
#[derive(Debug, Clone)]
pub struct Baseload {
    households: Vec<LoadSeries>,
    total: LoadSeries,
}

impl Baseload {
    pub fn new(households: Vec<LoadSeries>) -> Result<Self> {
        let first = households
            .first()
            .ok_or_else(|| Error::invalid("baseload has no households"))?;
        if first.resolution <= 0 || MINUTES_PER_HOUR % first.resolution != 0 {
            return Err(Error::invalid(format!(
                "baseload resolution {} min does not divide an hour",
                first.resolution
            )));
        }
        for (i, s) in households.iter().enumerate() {
            if s.start != first.start || s.resolution != first.resolution || s.len() != first.len()
            {
                return Err(Error::invalid(format!(
                    "baseload series of household {i} is misaligned"
                )));
            }
            if let Some(j) = s.values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::invalid(format!(
                    "household {i} baseload at {} is negative or not finite",
                    s.time_at(j)
                )));
            }
        }
        let total_values = (0..first.len())
            .map(|j| {
                let column: Vec<f64> = households.iter().map(|s| s.values[j]).collect();
                aggregate_load(&column, &[])
            })
            .collect();
        let total = LoadSeries::new(first.start, first.resolution, total_values);
        Ok(Baseload { households, total })
    }

    pub fn households(&self) -> &[LoadSeries] {
        &self.households
    }

    pub fn total(&self) -> &LoadSeries {
        &self.total
    }
}

/// A vehicle with a predetermined adoption time and trip list.
#[derive(Debug, Clone)]
pub struct FixedVehicle {
    pub household: HouseholdId,
    pub model: EvModel,
    pub adopted_at: Timestamp,
    pub initial_soc_kwh: f64,
    pub target_kwh: f64,
    pub trips: Vec<TripEvent>,
}

#[derive(Debug, Clone)]
pub struct StochasticFleet {
    pub catalog: Catalog,
    pub curve: AdoptionCurve,
    pub pattern: DrivingPattern,
    /// State of charge at adoption during the span, as a fraction of the battery.
    pub initial_soc_fraction: f64,
    /// Desired state of charge at departure, as a fraction of the battery.
    pub target_fraction: f64,
}

#[derive(Debug, Clone)]
pub enum FleetSource {
    Stochastic(StochasticFleet),
    Fixed(Vec<FixedVehicle>),
}

/// Immutable inputs shared by every experiment of a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    pub households: u32,
    pub transformer: Transformer,
    pub baseload: Baseload,
    pub tariffs: TariffSet,
    pub fleet: FleetSource,
    pub overload_mode: OverloadCountMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: String,
    pub strategy: StrategyKind,
    pub span: SimulationSpan,
    pub tariff_mode: TariffMode,
    pub seed: u64,
    pub buffer_kw: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DepartureRecord {
    pub vehicle: VehicleId,
    pub at: Timestamp,
    pub satisfied: bool,
}

/// Per-vehicle summary and hourly charging log.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleRecord {
    pub id: VehicleId,
    pub household: HouseholdId,
    pub model: String,
    pub adopted_at: Timestamp,
    pub initial_soc_kwh: f64,
    pub final_soc_kwh: f64,
    pub delivered_kwh: f64,
    /// Trip energy actually drawn from the battery.
    pub trip_kwh: f64,
    /// Trip energy beyond an empty battery (floor anomalies).
    pub shortfall_kwh: f64,
    /// `(clock hour, kWh delivered in that hour)`, hours without charging omitted.
    pub charging: Vec<(Timestamp, f64)>,
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub experiment: ExperimentSpec,
    /// Transformer load at tick resolution.
    pub load: LoadSeries,
    pub overloads: Vec<OverloadEvent>,
    pub vehicles: Vec<VehicleRecord>,
    pub departures: Vec<DepartureRecord>,
    pub reports: Vec<KpiReport>,
}

/// Hook called after every tick; used by tests to check per-tick invariants.
pub trait TickObserver {
    fn observe(&mut self, world: &World<'_>, t: Timestamp);
}

impl<F: FnMut(&World<'_>, Timestamp)> TickObserver for F {
    fn observe(&mut self, world: &World<'_>, t: Timestamp) {
        self(world, t)
    }
}

struct Agent {
    vehicle: Vehicle,
    adopted_at: Timestamp,
    plugged_at: Timestamp,
    grant_kw: f64,
    schedule: VecDeque<TripEvent>,
    on_trip: Option<TripEvent>,
    trips: Option<(RngStream, NaiveDate)>,
    record: VehicleRecord,
}

struct PendingVehicle {
    at: Timestamp,
    vehicle: Vehicle,
    trips: Vec<TripEvent>,
}

pub struct World<'a> {
    data: &'a ScenarioData,
    span: SimulationSpan,
    transformer: Transformer,
    dispatcher: Dispatcher,
    pattern: Option<&'a DrivingPattern>,
    seed: u64,
    agents: Vec<Agent>,
    pending: VecDeque<PendingVehicle>,
    baseload_kw: f64,
    budget_kw: f64,
    last_load_kw: f64,
    charging_kw: Vec<f64>,
    load: Vec<f64>,
    departures: Vec<DepartureRecord>,
}

impl<'a> World<'a> {
    pub fn new(spec: &ExperimentSpec, data: &'a ScenarioData) -> Result<Self> {
        check_inputs(spec, data)?;
        let transformer = data.transformer.with_buffer(spec.buffer_kw)?;
        let (pending, pattern) = match &data.fleet {
            FleetSource::Stochastic(fleet) => (
                stochastic_pending(fleet, data.households, spec)?,
                Some(&fleet.pattern),
            ),
            FleetSource::Fixed(list) => (fixed_pending(list, data.households)?, None),
        };
        Ok(World {
            data,
            span: spec.span,
            transformer,
            dispatcher: Dispatcher::new(spec.strategy),
            pattern,
            seed: spec.seed,
            agents: Vec::new(),
            pending: pending
                .into_iter()
                .filter(|p| p.at < spec.span.end)
                .collect(),
            baseload_kw: 0.0,
            budget_kw: 0.0,
            last_load_kw: 0.0,
            charging_kw: Vec::new(),
            load: Vec::with_capacity(spec.span.tick_count()),
            departures: Vec::new(),
        })
    }

    pub fn vehicles(&self) -> impl Iterator<Item = (&Vehicle, f64)> + '_ {
        self.agents.iter().map(|a| (&a.vehicle, a.grant_kw))
    }

    pub fn baseload_kw(&self) -> f64 {
        self.baseload_kw
    }

    /// Budget handed to the most recent dispatch.
    pub fn budget_kw(&self) -> f64 {
        self.budget_kw
    }

    /// Transformer load recorded for the latest tick.
    pub fn load_kw(&self) -> f64 {
        self.last_load_kw
    }

    pub fn transformer(&self) -> &Transformer {
        &self.transformer
    }

    /// Advance the world by one tick starting at `t`.
    pub fn step_tick(&mut self, t: Timestamp) {
        self.admit_adoptions(t);
        self.trips_phase(t);
        self.baseload_kw = self.data.baseload.total().value_at(t).unwrap_or(0.0);
        if self.span.is_decision_boundary(t) {
            self.dispatch_phase(t);
        }
        self.charge_phase(t);
    }

    fn admit_adoptions(&mut self, t: Timestamp) {
        while self.pending.front().is_some_and(|p| p.at <= t) {
            let p = self.pending.pop_front().expect("non-empty");
            let since = p.at.max(self.span.start);
            let mut agent = Agent {
                record: VehicleRecord {
                    id: p.vehicle.id,
                    household: p.vehicle.household,
                    model: p.vehicle.model.name.clone(),
                    adopted_at: p.at,
                    initial_soc_kwh: p.vehicle.soc_kwh,
                    final_soc_kwh: p.vehicle.soc_kwh,
                    delivered_kwh: 0.0,
                    trip_kwh: 0.0,
                    shortfall_kwh: 0.0,
                    charging: Vec::new(),
                },
                vehicle: p.vehicle,
                adopted_at: p.at,
                plugged_at: since,
                grant_kw: 0.0,
                schedule: p
                    .trips
                    .into_iter()
                    .filter(|trip| trip.departure > since)
                    .collect(),
                on_trip: None,
                trips: None,
            };
            if let Some(pattern) = self.pattern {
                let mut stream =
                    RngStream::for_member(self.seed, rng::TRIPS, agent.vehicle.household.0);
                let today = since.date();
                let mut day = today;
                while day <= today + Days::new(1) {
                    extend_schedule(&mut agent, day, since, pattern, &mut stream);
                    day = day + Days::new(1);
                }
                agent.trips = Some((stream, today + Days::new(1)));
            }
            let pos = self
                .agents
                .partition_point(|a| a.vehicle.household < agent.vehicle.household);
            self.agents.insert(pos, agent);
        }
    }

    fn trips_phase(&mut self, t: Timestamp) {
        let midnight = t.minute_of_day() == 0;
        for agent in &mut self.agents {
            if midnight {
                if let (Some(pattern), Some((stream, through))) =
                    (self.pattern, agent.trips.as_mut())
                {
                    let tomorrow = t.date() + Days::new(1);
                    while *through < tomorrow {
                        *through = *through + Days::new(1);
                        let day = *through;
                        let trips = sample_daily_trips(&agent.vehicle, day, pattern, stream);
                        agent
                            .schedule
                            .extend(trips.into_iter().filter(|trip| trip.departure > t));
                    }
                }
            }
            if let Some(trip) = agent.on_trip.filter(|trip| trip.arrival == t) {
                let out = apply_trip_energy(&mut agent.vehicle, &trip);
                agent.record.trip_kwh += out.consumed_kwh;
                agent.record.shortfall_kwh += out.shortfall_kwh;
                agent.on_trip = None;
                agent.plugged_at = t;
            } else if let Some(trip) = agent
                .schedule
                .front()
                .copied()
                .filter(|trip| trip.departure <= t)
            {
                agent.schedule.pop_front();
                if agent.vehicle.location == Location::Home && trip.departure == t {
                    let satisfied =
                        record_departure_satisfaction(&agent.vehicle, t) == Satisfaction::Satisfied;
                    self.departures.push(DepartureRecord {
                        vehicle: agent.vehicle.id,
                        at: t,
                        satisfied,
                    });
                    agent.vehicle.plugged = false;
                    agent.vehicle.location = Location::Away;
                    agent.grant_kw = 0.0;
                    agent.on_trip = Some(trip);
                } else {
                    log::debug!(
                        "{}: skipping trip at {} while away",
                        agent.vehicle.id,
                        trip.departure
                    );
                }
            }
            agent.vehicle.planned_departure = agent.schedule.front().map(|trip| trip.departure);
        }
    }

    fn dispatch_phase(&mut self, _t: Timestamp) {
        let unknown_departure = self.span.end;
        let requests: Vec<ChargeRequest> = self
            .agents
            .iter()
            .filter(|a| a.vehicle.wants_charge())
            .map(|a| ChargeRequest {
                vehicle: a.vehicle.id,
                max_rate_kw: a.vehicle.model.max_rate_kw,
                remaining_kwh: a.vehicle.remaining_kwh(),
                arrival: a.plugged_at,
                planned_departure: a.vehicle.planned_departure.unwrap_or(unknown_departure),
            })
            .collect();
        self.budget_kw = compute_budget(&self.transformer, self.baseload_kw);
        let alloc = self.dispatcher.dispatch(&requests, self.budget_kw);
        for agent in &mut self.agents {
            agent.grant_kw = alloc.get(agent.vehicle.id);
        }
    }

    fn charge_phase(&mut self, t: Timestamp) {
        let dt = self.span.tick;
        let hour = t.floor_hour();
        self.charging_kw.clear();
        for agent in &mut self.agents {
            if agent.grant_kw <= 0.0 {
                continue;
            }
            let out = charge_step(&mut agent.vehicle, agent.grant_kw, dt);
            if out.released {
                agent.grant_kw = 0.0;
            }
            if out.delivered_kwh > 0.0 {
                agent.record.delivered_kwh += out.delivered_kwh;
                match agent.record.charging.last_mut() {
                    Some((h, kwh)) if *h == hour => *kwh += out.delivered_kwh,
                    _ => agent.record.charging.push((hour, out.delivered_kwh)),
                }
                self.charging_kw.push(out.delivered_kwh * 60.0 / dt as f64);
            }
        }
        self.last_load_kw =
            aggregate_load(std::slice::from_ref(&self.baseload_kw), &self.charging_kw);
        self.load.push(self.last_load_kw);
    }

    fn finish(
        self,
        spec: &ExperimentSpec,
    ) -> (LoadSeries, Vec<VehicleRecord>, Vec<DepartureRecord>) {
        let load = LoadSeries::new(spec.span.start, spec.span.tick, self.load);
        let vehicles = self
            .agents
            .into_iter()
            .map(|a| {
                let mut r = a.record;
                r.final_soc_kwh = a.vehicle.soc_kwh;
                debug_assert_eq!(r.adopted_at, a.adopted_at);
                r
            })
            .collect();
        (load, vehicles, self.departures)
    }
}

fn extend_schedule(
    agent: &mut Agent,
    day: NaiveDate,
    after: Timestamp,
    pattern: &DrivingPattern,
    stream: &mut RngStream,
) {
    let trips = sample_daily_trips(&agent.vehicle, day, pattern, stream);
    agent
        .schedule
        .extend(trips.into_iter().filter(|trip| trip.departure > after));
}

/// Check that the inputs cover `spec` and that the tariff it needs exists.
pub fn check_inputs(spec: &ExperimentSpec, data: &ScenarioData) -> Result<()> {
    let (from, to) = (spec.span.start, spec.span.end);
    let base = data.baseload.total();
    if !base.covers(from, to) {
        let (a, b) = if from < base.start {
            (from, base.start.min(to))
        } else {
            (base.end().max(from), to)
        };
        return Err(Error::InputCoverage {
            series: "baseload".into(),
            missing_from: a,
            missing_to: b,
        });
    }
    if data.baseload.households().len() != data.households as usize {
        return Err(Error::invalid(format!(
            "baseload has {} households, scenario declares {}",
            data.baseload.households().len(),
            data.households
        )));
    }
    let hour_to = if to.minute_of_hour() == 0 {
        to
    } else {
        to.floor_hour() + MINUTES_PER_HOUR
    };
    for (name, series) in [
        ("spot price", &data.tariffs.spot.0),
        ("CO2 intensity", &data.tariffs.co2.0),
    ] {
        if let Some((a, b)) = series.gap(from.floor_hour(), hour_to) {
            return Err(Error::InputCoverage {
                series: name.into(),
                missing_from: a,
                missing_to: b,
            });
        }
    }
    data.tariffs.tariff(spec.tariff_mode)?;
    Ok(())
}

fn stochastic_pending(
    fleet: &StochasticFleet,
    households: u32,
    spec: &ExperimentSpec,
) -> Result<Vec<PendingVehicle>> {
    let ids: Vec<HouseholdId> = (0..households).map(HouseholdId).collect();
    let adoptions = sample_adoptions(
        &fleet.curve,
        &ids,
        &fleet.catalog,
        &mut RngStream::new(spec.seed, rng::ADOPTION),
        &mut RngStream::new(spec.seed, rng::MODEL_CHOICE),
    )?;
    Ok(adoptions
        .into_iter()
        .map(|a| {
            let battery = a.model.battery_kwh;
            let target = fleet.target_fraction * battery;
            // Stock owned when the span opens starts at its target rather than all charging at once.
            let soc = if a.at <= spec.span.start {
                target
            } else {
                fleet.initial_soc_fraction * battery
            };
            PendingVehicle {
                at: a.at,
                vehicle: Vehicle::at_home(a.household, a.model, soc, target),
                trips: Vec::new(),
            }
        })
        .collect())
}

fn fixed_pending(list: &[FixedVehicle], households: u32) -> Result<Vec<PendingVehicle>> {
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::with_capacity(list.len());
    for fv in list {
        let who = format!("vehicle of household {}", fv.household);
        if fv.household.0 >= households {
            return Err(Error::invalid(format!("{who}: household id out of range")));
        }
        if !seen.insert(fv.household) {
            return Err(Error::invalid(format!(
                "{who}: household already has a vehicle"
            )));
        }
        fv.model.validate()?;
        let battery = fv.model.battery_kwh;
        if !(0.0..=battery).contains(&fv.initial_soc_kwh)
            || !(0.0..=battery).contains(&fv.target_kwh)
        {
            return Err(Error::invalid(format!(
                "{who}: state of charge outside [0, {battery}] kWh"
            )));
        }
        for trip in &fv.trips {
            if trip.arrival <= trip.departure || trip.energy_kwh.is_nan() || trip.energy_kwh < 0.0 {
                return Err(Error::invalid(format!(
                    "{who}: malformed trip at {}",
                    trip.departure
                )));
            }
        }
        for w in fv.trips.windows(2) {
            if w[1].departure <= w[0].arrival {
                return Err(Error::invalid(format!(
                    "{who}: trip at {} overlaps the previous one",
                    w[1].departure
                )));
            }
        }
        out.push(PendingVehicle {
            at: fv.adopted_at,
            vehicle: Vehicle::at_home(
                fv.household,
                fv.model.clone(),
                fv.initial_soc_kwh,
                fv.target_kwh,
            ),
            trips: fv.trips.clone(),
        });
    }
    out.sort_by_key(|p| (p.at, p.vehicle.household));
    Ok(out)
}

pub fn run_experiment(spec: &ExperimentSpec, data: &ScenarioData) -> Result<SimulationOutput> {
    run_experiment_observed(spec, data, &mut |_: &World<'_>, _| {})
}

pub fn run_experiment_observed(
    spec: &ExperimentSpec,
    data: &ScenarioData,
    observer: &mut dyn TickObserver,
) -> Result<SimulationOutput> {
    let mut world = World::new(spec, data)?;
    for t in spec.span.ticks() {
        world.step_tick(t);
        observer.observe(&world, t);
    }
    let (load, vehicles, departures) = world.finish(spec);
    let raw = Transformer::new(data.transformer.capacity_kw, 0.0)?;
    let overloads = detect_overloads(&load, &raw);
    let mut output = SimulationOutput {
        experiment: spec.clone(),
        load,
        overloads,
        vehicles,
        departures,
        reports: Vec::new(),
    };
    output.reports = spec
        .span
        .years()
        .into_iter()
        .map(|year| assemble_report(year, &output, data))
        .collect::<Result<_>>()?;
    Ok(output)
}
