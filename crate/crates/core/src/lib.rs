//! Deterministic multi-agent simulation of EV home charging behind a shared transformer.
//!
//! The [`engine`] steps households, vehicles and a central dispatcher minute by minute;
//! [`strategies`] holds the dispatch policies, [`kpi`] turns a run into yearly indicators, and
//! [`scenario`], [`csvio`] and [`runner`] handle configuration, data files and experiment matrices.

pub mod csvio;
pub mod engine;
pub mod error;
pub mod fleet;
pub mod grid;
pub mod kpi;
pub mod plot;
pub mod rng;
pub mod runner;
pub mod scenario;
pub mod strategies;
pub mod synthetic;
pub mod tariffs;
pub mod time;

pub use engine::{run_experiment, ExperimentSpec, ScenarioData, SimulationOutput};
pub use error::{Error, Result};
pub use strategies::StrategyKind;
pub use time::{SimulationSpan, Timestamp};
