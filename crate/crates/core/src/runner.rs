//! Run a scenario's experiment matrix and write each experiment's outputs to its own directory.
//!
//! Baselines run first so their minute-level load is at hand for the day-zoom plots; the
//! remaining experiments then run in parallel. Outputs depend only on the scenario file and
//! seed, never on thread count or timing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::csvio;
use crate::engine::{run_experiment, ExperimentSpec, SimulationOutput};
use crate::error::{Error, Result};
use crate::grid::{hourly_max, LoadSeries};
use crate::kpi::{compare_reports, KpiReport};
use crate::plot;
use crate::scenario::Scenario;
use crate::time::{Timestamp, MINUTES_PER_DAY};

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Experiment ids to run; empty runs all. Baselines of selected experiments always run.
    pub experiments: Vec<String>,
    /// Worker threads; 0 uses all cores.
    pub parallel: usize,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub id: String,
    pub dir: PathBuf,
    pub result: Result<Vec<KpiReport>>,
}

#[derive(Debug)]
pub struct RunReport {
    pub outcomes: Vec<ExperimentOutcome>,
}

impl RunReport {
    pub fn failures(&self) -> impl Iterator<Item = &ExperimentOutcome> {
        self.outcomes.iter().filter(|o| o.result.is_err())
    }

    pub fn is_success(&self) -> bool {
        self.failures().next().is_none()
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    scenario: String,
    scenario_sha256: &'a str,
    seed: u64,
    experiments: Vec<ManifestEntry<'a>>,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    id: &'a str,
    strategy: &'a str,
    start: String,
    end: String,
    decision_interval_min: i64,
    tariff_mode: &'a str,
    buffer_kw: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseline: Option<&'a str>,
    status: String,
}

/// Select the experiments to run, pulling in baselines of the selection.
fn select<'a>(scenario: &'a Scenario, wanted: &[String]) -> Result<Vec<&'a ExperimentSpec>> {
    if wanted.is_empty() {
        return Ok(scenario.experiments.iter().collect());
    }
    for id in wanted {
        if scenario.experiment(id).is_none() {
            let known: Vec<&str> = scenario.experiments.iter().map(|e| e.id.as_str()).collect();
            return Err(Error::invalid(format!(
                "unknown experiment {id:?}; known: {}",
                known.join(", ")
            )));
        }
    }
    Ok(scenario
        .experiments
        .iter()
        .filter(|e| {
            wanted.contains(&e.id)
                || wanted
                    .iter()
                    .any(|w| scenario.baselines.get(w) == Some(&e.id))
        })
        .collect())
}

pub fn run_matrix(scenario: &Scenario, out_dir: &Path, options: &RunOptions) -> Result<RunReport> {
    let selected = select(scenario, &options.experiments)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.parallel)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;

    let (baselines, others): (Vec<&ExperimentSpec>, Vec<&ExperimentSpec>) = selected
        .iter()
        .copied()
        .partition(|e| scenario.baselines.values().any(|b| *b == e.id));

    let first: Vec<(ExperimentOutcome, Option<Kept>)> = pool.install(|| {
        baselines
            .par_iter()
            .map(|spec| run_one(scenario, spec, out_dir, &BTreeMap::new(), true))
            .collect()
    });
    let mut kept = BTreeMap::new();
    let mut outcomes = Vec::new();
    for (outcome, k) in first {
        if let Some(k) = k {
            kept.insert(outcome.id.clone(), k);
        }
        outcomes.push(outcome);
    }
    let rest: Vec<ExperimentOutcome> = pool.install(|| {
        others
            .par_iter()
            .map(|spec| run_one(scenario, spec, out_dir, &kept, false).0)
            .collect()
    });
    outcomes.extend(rest);
    let order: BTreeMap<&str, usize> = selected
        .iter()
        .enumerate()
        .map(|(i, e)| (e.id.as_str(), i))
        .collect();
    outcomes.sort_by_key(|o| order[o.id.as_str()]);

    write_manifest(scenario, out_dir, &selected, &outcomes)?;
    Ok(RunReport { outcomes })
}

/// What a baseline keeps for the experiments compared against it.
struct Kept {
    load: LoadSeries,
    reports: Vec<KpiReport>,
    zoom_day: Timestamp,
}

fn run_one(
    scenario: &Scenario,
    spec: &ExperimentSpec,
    out_dir: &Path,
    baselines: &BTreeMap<String, Kept>,
    keep: bool,
) -> (ExperimentOutcome, Option<Kept>) {
    let dir = out_dir.join(&spec.id);
    log::info!("running experiment {} ({})", spec.id, spec.strategy);
    let baseline = scenario
        .baselines
        .get(&spec.id)
        .and_then(|b| baselines.get(b).map(|k| (b.as_str(), k)));
    let result = run_experiment(spec, &scenario.data).and_then(|output| {
        write_outputs(scenario, &dir, &output, baseline)?;
        let reports = output.reports.clone();
        let kept = keep.then(|| Kept {
            zoom_day: zoom_day(&output),
            reports: output.reports,
            load: output.load,
        });
        Ok((reports, kept))
    });
    let (result, kept) = match result {
        Ok((reports, kept)) => (Ok(reports), kept),
        Err(e) => {
            log::error!("experiment {} failed: {e}", spec.id);
            (
                Err(Error::Experiment {
                    id: spec.id.clone(),
                    source: Box::new(e),
                }),
                None,
            )
        }
    };
    (
        ExperimentOutcome {
            id: spec.id.clone(),
            dir,
            result,
        },
        kept,
    )
}

/// Midnight of the day holding the run's highest load in its final year.
fn zoom_day(output: &SimulationOutput) -> Timestamp {
    let load = &output.load;
    let last_year = output
        .experiment
        .span
        .years()
        .last()
        .copied()
        .unwrap_or(load.start.year());
    let from = Timestamp::start_of_year(last_year)
        .map(|t| t.max(load.start))
        .unwrap_or(load.start);
    let window = load.slice(from, load.end());
    let peak = window
        .iter()
        .fold(None, |best: Option<(Timestamp, f64)>, (t, v)| match best {
            Some((_, b)) if b >= v => best,
            _ => Some((t, v)),
        })
        .map(|(t, _)| t)
        .unwrap_or(load.start);
    peak.floor_day()
}

fn write_outputs(
    scenario: &Scenario,
    dir: &Path,
    output: &SimulationOutput,
    baseline: Option<(&str, &Kept)>,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let spec = &output.experiment;
    let capacity = scenario.data.transformer.capacity_kw;
    let hourly = hourly_max(&output.load);

    csvio::write_load_series(&dir.join("load_minute.csv"), &output.load)?;
    csvio::write_load_series(&dir.join("load_hourly_max.csv"), &hourly)?;
    let rows: Vec<(String, KpiReport)> = output
        .reports
        .iter()
        .map(|r| (spec.id.clone(), r.clone()))
        .collect();
    csvio::write_kpi_csv(&dir.join("kpi.csv"), &rows)?;
    write_vehicle_summary(&dir.join("vehicles.csv"), output)?;

    for year in spec.span.years() {
        let (a, b) = (
            Timestamp::start_of_year(year)?,
            Timestamp::start_of_year(year + 1)?,
        );
        let series = hourly.slice(a, b);
        if series.is_empty() {
            continue;
        }
        let title = format!("{}: hourly maximum load {year}", spec.id);
        csvio::write_text(
            &dir.join(format!("load_{year}.svg")),
            &plot::load_profile_svg(&series, capacity, &title),
        )?;
    }
    let mut per_user: BTreeMap<_, u64> = output.vehicles.iter().map(|v| (v.id, 0)).collect();
    for d in output.departures.iter().filter(|d| !d.satisfied) {
        *per_user.entry(d.vehicle).or_default() += 1;
    }
    let counts: Vec<u64> = per_user.into_values().collect();
    csvio::write_text(
        &dir.join("dissatisfaction.svg"),
        &plot::dissatisfaction_svg(
            &counts,
            &format!("{}: dissatisfied departures per EV user", spec.id),
        ),
    )?;

    if let Some((base_id, base)) = baseline {
        // Compare the last year both runs report.
        if let Some(report) = output
            .reports
            .iter()
            .rev()
            .find(|r| base.reports.iter().any(|b| b.year == r.year))
        {
            let b = base
                .reports
                .iter()
                .find(|b| b.year == report.year)
                .expect("matched year");
            csvio::write_comparison_csv(&dir.join("comparison.csv"), &compare_reports(report, b)?)?;
        }
        let (a, b) = (base.zoom_day, base.zoom_day + MINUTES_PER_DAY);
        let (top, bottom) = (base.load.slice(a, b), output.load.slice(a, b));
        if !top.is_empty() && !bottom.is_empty() {
            let title = format!("{} vs {} on {}", base_id, spec.id, a.date());
            csvio::write_text(
                &dir.join("day_zoom.svg"),
                &plot::day_zoom_svg((base_id, &top), (&spec.id, &bottom), capacity, &title),
            )?;
        }
    }
    Ok(())
}

fn write_vehicle_summary(path: &Path, output: &SimulationOutput) -> Result<()> {
    let mut dissatisfied: BTreeMap<_, (u64, u64)> = BTreeMap::new();
    for d in &output.departures {
        let e = dissatisfied.entry(d.vehicle).or_default();
        e.0 += 1;
        e.1 += u64::from(!d.satisfied);
    }
    let mut text = String::from(
        "vehicle,household,model,adopted_at,initial_soc_kwh,final_soc_kwh,delivered_kwh,trip_kwh,shortfall_kwh,departures,dissatisfied\n",
    );
    for v in &output.vehicles {
        let (deps, bad) = dissatisfied.get(&v.id).copied().unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{}\n",
            v.id,
            v.household,
            v.model,
            v.adopted_at,
            v.initial_soc_kwh,
            v.final_soc_kwh,
            v.delivered_kwh,
            v.trip_kwh,
            v.shortfall_kwh,
            deps,
            bad
        ));
    }
    csvio::write_text(path, &text)
}

fn write_manifest(
    scenario: &Scenario,
    out_dir: &Path,
    selected: &[&ExperimentSpec],
    outcomes: &[ExperimentOutcome],
) -> Result<()> {
    let status: BTreeMap<&str, String> = outcomes
        .iter()
        .map(|o| {
            let s = match &o.result {
                Ok(_) => "ok".to_string(),
                Err(e) => format!("failed: {e}"),
            };
            (o.id.as_str(), s)
        })
        .collect();
    let manifest = Manifest {
        scenario: scenario.path.display().to_string(),
        scenario_sha256: &scenario.hash,
        seed: scenario.seed,
        experiments: selected
            .iter()
            .map(|e| ManifestEntry {
                id: &e.id,
                strategy: e.strategy.as_str(),
                start: e.span.start.to_string(),
                end: e.span.end.to_string(),
                decision_interval_min: e.span.decision_interval,
                tariff_mode: e.tariff_mode.as_str(),
                buffer_kw: e.buffer_kw,
                baseline: scenario.baselines.get(&e.id).map(String::as_str),
                status: status[e.id.as_str()].clone(),
            })
            .collect(),
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::invalid(e.to_string()))?;
    csvio::write_text(&out_dir.join(MANIFEST_FILE), &text)
}
