//! Experiment driver: configs in, result tables and plotter scripts out.

pub mod config;
pub mod error;
pub mod plots;
pub mod results;
pub mod run;
pub mod validate;

pub use config::{EngineChoice, ExperimentConfig, SweepVariable};
pub use error::{CliError, Result};
pub use results::{Engine, Metric, ResultRow, Strategy, SweepResult};
