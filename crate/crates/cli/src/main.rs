use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use evsim::csvio;
use evsim::kpi::{compare_reports, round_to};
use evsim::runner::{run_matrix, RunOptions};
use evsim::scenario::{load_scenario, write_data_files};

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUNTIME: u8 = 2;

/// Simulate centralized EV home-charging strategies behind a shared transformer.
#[derive(Debug, Parser)]
#[command(name = "evsim", version)]
struct Cli {
    /// Log progress (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the scenario's experiments and write outputs.
    Run {
        scenario: PathBuf,
        /// Only run these experiments (their baselines run too).
        #[arg(long = "experiment", value_name = "ID")]
        experiments: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        parallel: usize,
    },
    /// Load and check a scenario and every file it references.
    Validate { scenario: PathBuf },
    /// Write the scenario's inputs, synthetic or not, as data files plus a scenario that reads them.
    GenSynthetic {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Percentage differences between two KPI files, matched by year.
    Compare { kpi_a: PathBuf, kpi_b: PathBuf },
}

/// Some experiments of a run failed; the others completed.
#[derive(Debug)]
struct RunFailed(usize);

impl std::fmt::Display for RunFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} experiment(s) failed", self.0)
    }
}

impl std::error::Error for RunFailed {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<RunFailed>().is_some() {
        return EXIT_RUNTIME;
    }
    match e.chain().find_map(|c| c.downcast_ref::<evsim::Error>()) {
        Some(err) if err.is_validation() => EXIT_VALIDATION,
        _ => EXIT_RUNTIME,
    }
}

fn dispatch(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run {
            scenario,
            experiments,
            out,
            parallel,
        } => run(&scenario, experiments, &out, parallel),
        Command::Validate { scenario } => validate(&scenario),
        Command::GenSynthetic { scenario, out } => {
            let s = load_scenario(&scenario)?;
            let written = write_data_files(&s, &out)?;
            println!("wrote {}", written.display());
            Ok(())
        }
        Command::Compare { kpi_a, kpi_b } => compare(&kpi_a, &kpi_b),
    }
}

fn run(
    scenario: &Path,
    experiments: Vec<String>,
    out: &Path,
    parallel: usize,
) -> anyhow::Result<()> {
    let s = load_scenario(scenario)?;
    let report = run_matrix(
        &s,
        out,
        &RunOptions {
            experiments,
            parallel,
        },
    )?;
    for o in &report.outcomes {
        match &o.result {
            Ok(_) => println!("{}: ok ({})", o.id, o.dir.display()),
            Err(e) => println!("{}: FAILED: {e}", o.id),
        }
    }
    let failed = report.failures().count();
    if failed > 0 {
        return Err(RunFailed(failed).into());
    }
    Ok(())
}

fn validate(scenario: &Path) -> anyhow::Result<()> {
    let s = load_scenario(scenario)?;
    println!(
        "{}: ok ({} households, {} kW, seed {}, sha256 {})",
        scenario.display(),
        s.data.households,
        s.data.transformer.capacity_kw,
        s.seed,
        s.hash
    );
    for e in &s.experiments {
        let baseline = s
            .baselines
            .get(&e.id)
            .map(|b| format!(", baseline {b}"))
            .unwrap_or_default();
        println!(
            "  {}: {} {} .. {} every {} min, {} tariff{baseline}",
            e.id, e.strategy, e.span.start, e.span.end, e.span.decision_interval, e.tariff_mode
        );
    }
    Ok(())
}

fn compare(a: &Path, b: &Path) -> anyhow::Result<()> {
    let rows_a = csvio::read_kpi_csv(a)?;
    let rows_b = csvio::read_kpi_csv(b)?;
    let mut matched = 0;
    println!("year,metric,value,baseline,pct_difference");
    for (_, ra) in &rows_a {
        let Some((_, rb)) = rows_b.iter().find(|(_, rb)| rb.year == ra.year) else {
            continue;
        };
        matched += 1;
        for row in compare_reports(ra, rb).with_context(|| format!("comparing year {}", ra.year))? {
            let cell = |v: Option<f64>, d: usize| {
                v.map(|v| format!("{:.d$}", round_to(v, d)))
                    .unwrap_or_else(|| "NA".into())
            };
            let d = row.metric.decimals();
            println!(
                "{},{},{},{},{}",
                ra.year,
                row.metric,
                cell(row.value, d),
                cell(row.baseline, d),
                cell(row.pct_difference, 2)
            );
        }
    }
    if matched == 0 {
        bail!(evsim::Error::invalid(format!(
            "{} and {} share no year",
            a.display(),
            b.display()
        )));
    }
    Ok(())
}
