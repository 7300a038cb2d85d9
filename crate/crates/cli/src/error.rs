use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("result file: {0}")]
    Csv(#[from] csv::Error),

    #[error("{file}: missing column `{column}`")]
    Schema { file: PathBuf, column: String },

    #[error(transparent)]
    Core(#[from] mmcache_core::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Prefixes a library validation error with its config section.
    pub fn section(section: &str, e: mmcache_core::Error) -> Self {
        match e {
            mmcache_core::Error::InvalidParameter { field, reason } => CliError::Config {
                field: format!("{section}.{}", config_name(field)),
                reason,
            },
            other => CliError::Config {
                field: section.to_string(),
                reason: other.to_string(),
            },
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Config key of a library parameter whose unit differs in the file.
fn config_name(field: &str) -> &str {
    match field {
        "tx_power" => "tx_power_dbm",
        "bandwidth" => "bandwidth_hz",
        "slot_length" => "slot_length_s",
        "noise_power" => "noise_power_dbm",
        "kappa_los" | "kappa_nlos" => "carrier_hz",
        "mainlobe_gain" => "mainlobe_gain_db",
        "sidelobe_gain" => "sidelobe_gain_db",
        "serving_gain" => "serving_gain_db",
        "beamwidth" => "beamwidth_deg",
        "file_size" => "file_size_bits",
        other => other,
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
