//! Scenario files: TOML with a `[transformer]` table, one `[data.*]` source per input dataset,
//! optional `[fleet]` and `[driving]` tables and an `[[experiments]]` list.
//!
//! Every data source is either `{ path = "..." }` (relative to the scenario file) or
//! `{ synthetic = { ... } }`. Loading reads and validates everything eagerly, so a scenario that
//! loads is ready to run.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::Range;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::csvio;
use crate::engine::{ExperimentSpec, FleetSource, ScenarioData, StochasticFleet};
use crate::error::{Error, Result};
use crate::fleet::{AdoptionCurve, Catalog, DrivingPattern};
use crate::grid::Transformer;
use crate::kpi::OverloadCountMode;
use crate::strategies::StrategyKind;
use crate::synthetic::{
    day_range, generate_baseload, generate_co2_intensity, generate_spot_prices,
    SyntheticBaseloadSpec, SyntheticFixedTariffSpec, SyntheticHourlySpec, SyntheticTouSpec,
};
use crate::tariffs::{DistributionTariff, SeasonCalendar, TariffMode, TariffSet};
use crate::time::{SimulationSpan, Timestamp};

/// Environment variable that overrides the scenario seed.
pub const SEED_ENV: &str = "EVSIM_SEED";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub households: u32,
    pub seed: u64,
    /// Default comparison baseline for experiments that name none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    #[serde(default = "default_overload_count")]
    pub overload_count: Spanned<String>,
    #[serde(default)]
    pub addons_dkk_per_kwh: f64,
    #[serde(default = "default_summer_months")]
    pub summer_months: Vec<u32>,
    pub transformer: TransformerConfig,
    pub data: DataConfig,
    #[serde(default)]
    pub fleet: FleetConfig,
    #[serde(default)]
    pub driving: DrivingPattern,
    pub experiments: Vec<ExperimentConfig>,
}

fn default_overload_count() -> Spanned<String> {
    Spanned::new(0..0, "hours".to_string())
}

fn default_summer_months() -> Vec<u32> {
    SeasonCalendar::default().summer_months
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerConfig {
    pub capacity_kw: f64,
    #[serde(default)]
    pub buffer_kw: f64,
}

/// A dataset read from a file or generated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source<S> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic: Option<S>,
}

impl<S> Source<S> {
    pub fn file(path: impl Into<PathBuf>) -> Self {
        Source {
            path: Some(path.into()),
            synthetic: None,
        }
    }

    fn resolve(&self, name: &str, dir: &Path) -> Result<Either<PathBuf, &S>> {
        match (&self.path, &self.synthetic) {
            (Some(p), None) => Ok(Either::Path(dir.join(p))),
            (None, Some(s)) => Ok(Either::Synthetic(s)),
            _ => Err(Error::invalid(format!(
                "data source {name} needs exactly one of `path` or `synthetic`"
            ))),
        }
    }
}

enum Either<P, S> {
    Path(P),
    Synthetic(S),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceholderSpec {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticCurveSpec {
    /// `[year, cumulative adopters]` pairs; empty selects the built-in placeholder curve.
    pub points: Vec<(i32, u32)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticCo2Spec {
    pub mean: f64,
    pub daily_amplitude: f64,
    pub seasonal_amplitude: f64,
    pub noise_std: f64,
}

impl Default for SyntheticCo2Spec {
    fn default() -> Self {
        let d = SyntheticHourlySpec::co2_default();
        SyntheticCo2Spec {
            mean: d.mean,
            daily_amplitude: d.daily_amplitude,
            seasonal_amplitude: d.seasonal_amplitude,
            noise_std: d.noise_std,
        }
    }
}

impl From<&SyntheticCo2Spec> for SyntheticHourlySpec {
    fn from(s: &SyntheticCo2Spec) -> Self {
        SyntheticHourlySpec {
            mean: s.mean,
            daily_amplitude: s.daily_amplitude,
            seasonal_amplitude: s.seasonal_amplitude,
            noise_std: s.noise_std,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub baseload: Source<SyntheticBaseloadSpec>,
    pub spot: Source<SyntheticHourlySpec>,
    pub co2: Source<SyntheticCo2Spec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_tariff: Option<Source<SyntheticFixedTariffSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tou_tariff: Option<Source<SyntheticTouSpec>>,
    pub catalog: Source<PlaceholderSpec>,
    pub adoption_curve: Source<SyntheticCurveSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FleetConfig {
    pub initial_soc_fraction: f64,
    pub target_fraction: f64,
}

impl Default for FleetConfig {
    fn default() -> Self {
        FleetConfig {
            initial_soc_fraction: 0.8,
            target_fraction: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub strategy: Spanned<String>,
    pub start: Spanned<String>,
    pub end: Spanned<String>,
    #[serde(default = "default_tariff_mode")]
    pub tariff_mode: Spanned<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision_interval_min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub buffer_kw: Option<f64>,
    #[serde(default = "default_tick")]
    pub tick_min: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
}

fn default_tariff_mode() -> Spanned<String> {
    Spanned::new(0..0, "fixed".to_string())
}

fn default_tick() -> i64 {
    1
}

/// A loaded, validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub path: PathBuf,
    /// SHA-256 of the scenario file bytes, hex.
    pub hash: String,
    /// Effective seed after any environment override.
    pub seed: u64,
    pub config: ScenarioConfig,
    pub experiments: Vec<ExperimentSpec>,
    /// Comparison baseline of each experiment that has one, by id.
    pub baselines: BTreeMap<String, String>,
    pub data: ScenarioData,
}

impl Scenario {
    pub fn experiment(&self, id: &str) -> Option<&ExperimentSpec> {
        self.experiments.iter().find(|e| e.id == id)
    }

    pub fn baseline_of(&self, id: &str) -> Option<&ExperimentSpec> {
        self.baselines.get(id).and_then(|b| self.experiment(b))
    }

    /// Whole days covering every experiment; synthetic data is generated over this range.
    pub fn data_range(&self) -> (Timestamp, Timestamp) {
        data_range(&self.experiments)
    }
}

fn data_range(experiments: &[ExperimentSpec]) -> (Timestamp, Timestamp) {
    let from = experiments
        .iter()
        .map(|e| e.span.start)
        .min()
        .expect("at least one experiment");
    let to = experiments
        .iter()
        .map(|e| e.span.end)
        .max()
        .expect("at least one experiment");
    day_range(from, to)
}

/// Seed from [`SEED_ENV`], if set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| {
            Error::invalid(format!(
                "{SEED_ENV}={s:?} is not an unsigned 64-bit integer"
            ))
        }),
        Err(_) => Ok(None),
    }
}

/// Load a scenario, applying the [`SEED_ENV`] override.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    load_scenario_with_seed(path, seed_from_env()?)
}

pub fn load_scenario_with_seed(path: &Path, seed_override: Option<u64>) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let config: ScenarioConfig = toml::from_str(&text).map_err(|e| {
        let line = e.span().map(|s| line_of(&text, s.start));
        Error::invalid_at(path, line, e.message().to_string())
    })?;
    let hash = hex_sha256(text.as_bytes());
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    build(path, &text, &dir, config, hash, seed_override)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

fn spanned_parse<T>(
    path: &Path,
    text: &str,
    v: &Spanned<String>,
    parse: impl Fn(&str) -> Result<T>,
) -> Result<T> {
    parse(v.get_ref()).map_err(|e| {
        let Range { start, .. } = v.span();
        let line = (start > 0 || v.span().end > 0).then(|| line_of(text, start));
        let message = match e {
            Error::Validation { message, .. } => message,
            other => other.to_string(),
        };
        Error::invalid_at(path, line, message)
    })
}

fn build(
    path: &Path,
    text: &str,
    dir: &Path,
    config: ScenarioConfig,
    hash: String,
    seed_override: Option<u64>,
) -> Result<Scenario> {
    let seed = seed_override.unwrap_or(config.seed);
    let at = |m: String| Error::invalid_at(path, None, m);
    if config.households == 0 {
        return Err(at("households must be at least 1".into()));
    }
    let transformer =
        Transformer::new(config.transformer.capacity_kw, config.transformer.buffer_kw)
            .map_err(|e| e.in_file(path))?;
    let overload_mode = spanned_parse(path, text, &config.overload_count, |s| {
        s.parse::<OverloadCountMode>()
    })?;
    if !(config.addons_dkk_per_kwh.is_finite() && config.addons_dkk_per_kwh >= 0.0) {
        return Err(at(format!(
            "addons_dkk_per_kwh {} must be >= 0",
            config.addons_dkk_per_kwh
        )));
    }
    if let Some(m) = config.summer_months.iter().find(|m| !(1..=12).contains(*m)) {
        return Err(at(format!("summer month {m} is not in 1..=12")));
    }
    let fleet_cfg = &config.fleet;
    for (name, v) in [
        ("initial_soc_fraction", fleet_cfg.initial_soc_fraction),
        ("target_fraction", fleet_cfg.target_fraction),
    ] {
        if !(0.0..=1.0).contains(&v) {
            return Err(at(format!("fleet {name} {v} must be in [0, 1]")));
        }
    }
    config.driving.validate().map_err(|e| e.in_file(path))?;

    if config.experiments.is_empty() {
        return Err(at("scenario has no experiments".into()));
    }
    let mut ids = BTreeSet::new();
    let mut experiments = Vec::with_capacity(config.experiments.len());
    for e in &config.experiments {
        if e.id.is_empty() || e.id.contains(['/', '\\']) || e.id == "." || e.id == ".." {
            return Err(at(format!(
                "experiment id {:?} is not a valid directory name",
                e.id
            )));
        }
        if !ids.insert(e.id.clone()) {
            return Err(at(format!("experiment id {:?} is used twice", e.id)));
        }
        let strategy = spanned_parse(path, text, &e.strategy, |s| s.parse::<StrategyKind>())?;
        let start = spanned_parse(path, text, &e.start, Timestamp::parse)?;
        let end = spanned_parse(path, text, &e.end, Timestamp::parse)?;
        let tariff_mode = spanned_parse(path, text, &e.tariff_mode, |s| s.parse::<TariffMode>())?;
        let interval = e
            .decision_interval_min
            .unwrap_or(strategy.default_decision_interval());
        let span = SimulationSpan::new(start, end, e.tick_min, interval)
            .map_err(|err| at(format!("experiment {}: {}", e.id, strip(err))))?;
        let buffer_kw = e.buffer_kw.unwrap_or(config.transformer.buffer_kw);
        transformer
            .with_buffer(buffer_kw)
            .map_err(|err| at(format!("experiment {}: {}", e.id, strip(err))))?;
        experiments.push(ExperimentSpec {
            id: e.id.clone(),
            strategy,
            span,
            tariff_mode,
            seed,
            buffer_kw,
        });
    }
    let baselines = resolve_baselines(&config, &experiments).map_err(|e| e.in_file(path))?;

    let (from, to) = data_range(&experiments);
    let calendar = SeasonCalendar {
        summer_months: config.summer_months.clone(),
    };
    let data = &config.data;
    let in_scenario = |e: Error| e.in_file(path);

    let baseload = match data
        .baseload
        .resolve("baseload", dir)
        .map_err(in_scenario)?
    {
        Either::Path(p) => csvio::read_baseload(&p, config.households)?,
        Either::Synthetic(s) => {
            generate_baseload(s, config.households, from, to, seed).map_err(in_scenario)?
        }
    };
    let spot = match data.spot.resolve("spot", dir).map_err(in_scenario)? {
        Either::Path(p) => csvio::read_spot_prices(&p)?,
        Either::Synthetic(s) => generate_spot_prices(s, from, to, seed).map_err(in_scenario)?,
    };
    let co2 = match data.co2.resolve("co2", dir).map_err(in_scenario)? {
        Either::Path(p) => csvio::read_co2_intensity(&p)?,
        Either::Synthetic(s) => {
            generate_co2_intensity(&s.into(), from, to, seed).map_err(in_scenario)?
        }
    };
    let fixed = match &data.fixed_tariff {
        None => None,
        Some(src) => Some(
            match src.resolve("fixed_tariff", dir).map_err(in_scenario)? {
                Either::Path(p) => csvio::read_fixed_tariff(&p)?,
                Either::Synthetic(s) => {
                    DistributionTariff::fixed(s.dkk_per_kwh).map_err(in_scenario)?
                }
            },
        ),
    };
    let time_of_use = match &data.tou_tariff {
        None => None,
        Some(src) => Some(match src.resolve("tou_tariff", dir).map_err(in_scenario)? {
            Either::Path(p) => csvio::read_tou_tariff(&p, calendar.clone())?,
            Either::Synthetic(s) => s.tariff(calendar.clone()).map_err(in_scenario)?,
        }),
    };
    let catalog = match data.catalog.resolve("catalog", dir).map_err(in_scenario)? {
        Either::Path(p) => csvio::read_catalog(&p)?,
        Either::Synthetic(_) => Catalog::placeholder(),
    };
    let curve = match data
        .adoption_curve
        .resolve("adoption_curve", dir)
        .map_err(in_scenario)?
    {
        Either::Path(p) => csvio::read_adoption_curve(&p)?,
        Either::Synthetic(s) if s.points.is_empty() => AdoptionCurve::placeholder(),
        Either::Synthetic(s) => AdoptionCurve::new(s.points.clone()).map_err(in_scenario)?,
    };
    if curve.final_value() > config.households {
        return Err(at(format!(
            "adoption curve reaches {} adopters but there are only {} households",
            curve.final_value(),
            config.households
        )));
    }

    let scenario_data = ScenarioData {
        households: config.households,
        transformer,
        baseload,
        tariffs: TariffSet {
            spot,
            co2,
            fixed,
            time_of_use,
            addons_dkk_per_kwh: config.addons_dkk_per_kwh,
        },
        fleet: FleetSource::Stochastic(StochasticFleet {
            catalog,
            curve,
            pattern: config.driving.clone(),
            initial_soc_fraction: fleet_cfg.initial_soc_fraction,
            target_fraction: fleet_cfg.target_fraction,
        }),
        overload_mode,
    };
    for spec in &experiments {
        crate::engine::check_inputs(spec, &scenario_data)
            .map_err(|err| at(format!("experiment {}: {}", spec.id, strip(err))))?;
    }

    Ok(Scenario {
        path: path.to_path_buf(),
        hash,
        seed,
        config,
        experiments,
        baselines,
        data: scenario_data,
    })
}

/// An experiment's own `baseline`, else the scenario default, else a traditional experiment
/// over the same span. Experiments are never their own baseline.
fn resolve_baselines(
    config: &ScenarioConfig,
    experiments: &[ExperimentSpec],
) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (cfg, spec) in config.experiments.iter().zip(experiments) {
        let named = cfg.baseline.as_ref().or(config.baseline.as_ref());
        let chosen = match named {
            Some(b) => {
                let base = experiments.iter().find(|e| &e.id == b).ok_or_else(|| {
                    Error::invalid(format!("baseline {b:?} is not an experiment id"))
                })?;
                if base.span.years() != spec.span.years() && base.id != spec.id {
                    return Err(Error::invalid(format!(
                        "baseline {b:?} does not cover the same years as experiment {:?}",
                        spec.id
                    )));
                }
                Some(b.clone())
            }
            None => experiments
                .iter()
                .find(|e| {
                    e.strategy == StrategyKind::Traditional
                        && (e.span.start, e.span.end) == (spec.span.start, spec.span.end)
                })
                .map(|e| e.id.clone()),
        };
        if let Some(b) = chosen.filter(|b| *b != spec.id) {
            out.insert(spec.id.clone(), b);
        }
    }
    Ok(out)
}

fn strip(e: Error) -> String {
    match e {
        Error::Validation {
            file: None,
            line: None,
            message,
        } => message,
        other => other.to_string(),
    }
}

/// Write every input of `scenario` as data files into `dir`, plus a `scenario.toml` that reads
/// them. Running the written scenario reproduces the original's results.
pub fn write_data_files(scenario: &Scenario, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let data = &scenario.data;
    csvio::write_baseload(&dir.join("baseload.csv"), &data.baseload)?;
    csvio::write_hourly(&dir.join("spot.csv"), "dkk_per_kwh", &data.tariffs.spot.0)?;
    csvio::write_hourly(&dir.join("co2.csv"), "kg_per_kwh", &data.tariffs.co2.0)?;
    let mut config = scenario.config.clone();
    config.seed = scenario.seed;
    if let Some(DistributionTariff::Fixed(rate)) = &data.tariffs.fixed {
        csvio::write_fixed_tariff(&dir.join("fixed_tariff.txt"), *rate)?;
        config.data.fixed_tariff = Some(Source::file("fixed_tariff.txt"));
    }
    if let Some(DistributionTariff::TimeOfUse { bands, .. }) = &data.tariffs.time_of_use {
        csvio::write_tou_tariff(&dir.join("tou_tariff.csv"), bands)?;
        config.data.tou_tariff = Some(Source::file("tou_tariff.csv"));
    }
    let FleetSource::Stochastic(fleet) = &data.fleet else {
        return Err(Error::invalid("only stochastic fleets can be written"));
    };
    csvio::write_catalog(&dir.join("catalog.csv"), &fleet.catalog)?;
    csvio::write_adoption_curve(&dir.join("adoption_curve.csv"), &fleet.curve)?;
    config.data.baseload = Source::file("baseload.csv");
    config.data.spot = Source::file("spot.csv");
    config.data.co2 = Source::file("co2.csv");
    config.data.catalog = Source::file("catalog.csv");
    config.data.adoption_curve = Source::file("adoption_curve.csv");
    let text = toml::to_string(&config).map_err(|e| Error::invalid(e.to_string()))?;
    let out = dir.join("scenario.toml");
    csvio::write_text(&out, &text)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
households = 3
seed = 7

[transformer]
capacity_kw = 400

[data]
baseload = { synthetic = {} }
spot = { synthetic = {} }
co2 = { synthetic = {} }
fixed_tariff = { synthetic = { dkk_per_kwh = 0.3 } }
catalog = { synthetic = {} }
adoption_curve = { synthetic = { points = [[2021, 1], [2022, 3]] } }

[[experiments]]
id = "trad"
strategy = "traditional"
start = "2021-01-01"
end = "2021-01-08"
"#;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    fn line(e: &Error) -> Option<usize> {
        match e {
            Error::Validation { line, .. } => *line,
            _ => None,
        }
    }

    #[test]
    fn minimal_synthetic_scenario_loads() {
        let dir = tempfile::tempdir().unwrap();
        let s = load_scenario_with_seed(&write(&dir, "s.toml", MINIMAL), None).unwrap();
        assert_eq!(s.seed, 7);
        assert_eq!(s.experiments.len(), 1);
        assert_eq!(s.experiments[0].span.decision_interval, 1);
        assert_eq!(s.data.baseload.households().len(), 3);
        assert_eq!(s.hash.len(), 64);
        let overridden = load_scenario_with_seed(&dir.path().join("s.toml"), Some(99)).unwrap();
        assert_eq!(overridden.seed, 99);
        assert_eq!(overridden.experiments[0].seed, 99);
    }

    #[test]
    fn unknown_strategy_lists_valid_names_with_line() {
        let dir = tempfile::tempdir().unwrap();
        let text = MINIMAL.replace("\"traditional\"", "\"greedy\"");
        let e = load_scenario_with_seed(&write(&dir, "s.toml", &text), None).unwrap_err();
        assert_eq!(line(&e), Some(18));
        let msg = e.to_string();
        for name in ["traditional", "round_robin", "fcfs", "equal_charge", "edf"] {
            assert!(msg.contains(name), "{msg}");
        }
    }

    #[test]
    fn both_path_and_synthetic_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let text = MINIMAL.replace(
            "spot = { synthetic = {} }",
            "spot = { synthetic = {}, path = \"x.csv\" }",
        );
        let e = load_scenario_with_seed(&write(&dir, "s.toml", &text), None).unwrap_err();
        assert!(e.to_string().contains("exactly one"), "{e}");
    }

    #[test]
    fn missing_spot_file_is_path_error() {
        let dir = tempfile::tempdir().unwrap();
        let text = MINIMAL.replace(
            "spot = { synthetic = {} }",
            "spot = { path = \"nope.csv\" }",
        );
        let e = load_scenario_with_seed(&write(&dir, "s.toml", &text), None).unwrap_err();
        assert!(matches!(e, Error::Io { .. }), "{e}");
        assert!(e.to_string().contains("nope.csv"));
    }

    #[test]
    fn bad_catalog_names_catalog_file() {
        let dir = tempfile::tempdir().unwrap();
        write(
            &dir,
            "cat.csv",
            "name,battery_kwh,max_rate_kw,market_share\nA,40,3.7,0.5\nB,60,11,0.4\n",
        );
        let text = MINIMAL.replace(
            "catalog = { synthetic = {} }",
            "catalog = { path = \"cat.csv\" }",
        );
        let e = load_scenario_with_seed(&write(&dir, "s.toml", &text), None).unwrap_err();
        assert!(e.is_validation());
        assert!(e.to_string().contains("cat.csv"), "{e}");
    }

    #[test]
    fn uncovered_span_rejected_at_load() {
        let dir = tempfile::tempdir().unwrap();
        write(
            &dir,
            "spot.csv",
            "timestamp_iso8601,dkk_per_kwh\n2021-01-01T00:00,0.3\n",
        );
        let text = MINIMAL.replace(
            "spot = { synthetic = {} }",
            "spot = { path = \"spot.csv\" }",
        );
        let e = load_scenario_with_seed(&write(&dir, "s.toml", &text), None).unwrap_err();
        assert!(e.to_string().contains("spot"), "{e}");
    }

    #[test]
    fn syntax_error_has_line() {
        let dir = tempfile::tempdir().unwrap();
        let text = MINIMAL.replace("capacity_kw = 400", "capacity_kw = = 400");
        let e = load_scenario_with_seed(&write(&dir, "s.toml", &text), None).unwrap_err();
        assert_eq!(line(&e), Some(6));
    }

    #[test]
    fn missing_tariff_for_mode_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let text = MINIMAL.replace(
            "end = \"2021-01-08\"",
            "end = \"2021-01-08\"\ntariff_mode = \"time-of-use\"",
        );
        assert!(load_scenario_with_seed(&write(&dir, "s.toml", &text), None).is_err());
    }

    #[test]
    fn written_data_files_reload_identically() {
        let dir = tempfile::tempdir().unwrap();
        let s = load_scenario_with_seed(&write(&dir, "s.toml", MINIMAL), None).unwrap();
        let out = write_data_files(&s, &dir.path().join("data")).unwrap();
        let back = load_scenario_with_seed(&out, None).unwrap();
        assert_eq!(
            back.data.baseload.households(),
            s.data.baseload.households()
        );
        assert_eq!(back.data.tariffs.spot, s.data.tariffs.spot);
        assert_eq!(back.data.tariffs.co2, s.data.tariffs.co2);
        assert_eq!(back.experiments, s.experiments);
    }
}
