//! Sweep result files.
//!
//! One CSV per sweep with the header
//!
//! ```text
//! sweep_variable,sweep_value,strategy,metric,engine,value,ci_half_width,diverged
//! ```
//!
//! `strategy` is `hybrid`, `mpc` or `ldc`; `metric` is `stp` or `delay`
//! (slots); `engine` is `analytic` or `montecarlo`. `ci_half_width` is 0 for
//! analytic rows. `diverged` marks delays that reached the divergence
//! criterion, whose value is then dominated by the delay cap.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const COLUMNS: [&str; 8] = [
    "sweep_variable",
    "sweep_value",
    "strategy",
    "metric",
    "engine",
    "value",
    "ci_half_width",
    "diverged",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Hybrid,
    Mpc,
    Ldc,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Hybrid, Strategy::Mpc, Strategy::Ldc];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Stp,
    Delay,
}

impl Metric {
    pub const ALL: [Metric; 2] = [Metric::Stp, Metric::Delay];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Montecarlo,
}

macro_rules! display_as_serde {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let s = format!("{self:?}").to_lowercase();
                f.write_str(&s)
            }
        }
    )*};
}

display_as_serde!(Strategy, Metric, Engine);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_variable: String,
    pub sweep_value: f64,
    pub strategy: Strategy,
    pub metric: Metric,
    pub engine: Engine,
    pub value: f64,
    pub ci_half_width: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<ResultRow>,
}

impl SweepResult {
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(COLUMNS)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.into_inner().map_err(|e| CliError::io(Path::new("<buffer>"), e.into_error()))
    }

    pub fn from_csv(bytes: &[u8], origin: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_reader(bytes);
        let headers = r.headers()?.clone();
        for col in COLUMNS {
            if !headers.iter().any(|h| h == col) {
                return Err(CliError::Schema {
                    file: origin.to_path_buf(),
                    column: col.to_string(),
                });
            }
        }
        let rows = r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
        Ok(SweepResult { rows })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()?).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::from_csv(&bytes, path)
    }

    /// Values of one curve in grid order.
    pub fn series(&self, strategy: Strategy, metric: Metric, engine: Engine) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .filter(|r| r.strategy == strategy && r.metric == metric && r.engine == engine)
            .collect()
    }

    pub fn get(&self, value: f64, strategy: Strategy, metric: Metric, engine: Engine) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.sweep_value == value && r.strategy == strategy && r.metric == metric && r.engine == engine
        })
    }
}
