//! Experiment configuration files.
//!
//! Powers are given in dBm and gains in dB; conversion to linear units
//! happens here and nowhere else. Every field is optional and falls back to
//! the default operating point.

use std::path::{Path, PathBuf};

use mmcache_core::montecarlo::TrialPlan;
use mmcache_core::{
    db_to_linear, dbm_to_watts, free_space_intercept, thermal_noise_watts, CacheConfig, ContentModel,
    SystemParams, TABLE1_FILE_SIZE,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    /// BSs per m².
    pub bs_density: f64,
    /// Gateways per m².
    pub gateway_density: f64,
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub slot_length_s: f64,
    /// Receiver noise figure; the noise power is −174 dBm/Hz over the band
    /// plus this figure.
    pub noise_figure_db: f64,
    /// Replaces the noise-figure rule when set.
    pub noise_power_dbm: Option<f64>,
    /// Blockage parameter, 1/m.
    pub blockage: f64,
    /// Sets the free-space path-loss intercept of both link states.
    pub carrier_hz: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub nakagami_los: u32,
    pub nakagami_nlos: u32,
    pub mainlobe_gain_db: f64,
    pub sidelobe_gain_db: f64,
    pub beamwidth_deg: f64,
    pub serving_gain_db: f64,
    pub backhaul_scale: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        SystemSection {
            bs_density: SystemParams::table1().bs_density,
            gateway_density: 1e-5,
            tx_power_dbm: 33.0,
            bandwidth_hz: 1e9,
            slot_length_s: 1e-3,
            noise_figure_db: 10.0,
            noise_power_dbm: None,
            blockage: 0.01,
            carrier_hz: 28e9,
            alpha_los: 2.0,
            alpha_nlos: 4.0,
            nakagami_los: 3,
            nakagami_nlos: 2,
            mainlobe_gain_db: 10.0,
            sidelobe_gain_db: -10.0,
            beamwidth_deg: 30.0,
            serving_gain_db: 10.0,
            backhaul_scale: 1e-5,
        }
    }
}

impl SystemSection {
    pub fn params(&self) -> Result<SystemParams> {
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(CliError::config("system.carrier_hz", "must be finite and > 0"));
        }
        let kappa = free_space_intercept(self.carrier_hz);
        let p = SystemParams {
            bs_density: self.bs_density,
            gateway_density: self.gateway_density,
            tx_power: dbm_to_watts(self.tx_power_dbm),
            bandwidth: self.bandwidth_hz,
            slot_length: self.slot_length_s,
            noise_power: match self.noise_power_dbm {
                Some(dbm) => dbm_to_watts(dbm),
                None => thermal_noise_watts(self.bandwidth_hz, self.noise_figure_db),
            },
            blockage: self.blockage,
            kappa_los: kappa,
            kappa_nlos: kappa,
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            nakagami_los: self.nakagami_los,
            nakagami_nlos: self.nakagami_nlos,
            mainlobe_gain: db_to_linear(self.mainlobe_gain_db),
            sidelobe_gain: db_to_linear(self.sidelobe_gain_db),
            beamwidth: self.beamwidth_deg.to_radians(),
            serving_gain: db_to_linear(self.serving_gain_db),
            backhaul_scale: self.backhaul_scale,
        };
        p.validate().map_err(|e| CliError::section("system", e))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContentSection {
    pub file_count: usize,
    pub zipf_exponent: f64,
    pub file_size_bits: f64,
}

impl Default for ContentSection {
    fn default() -> Self {
        ContentSection {
            file_count: 50,
            zipf_exponent: 0.6,
            file_size_bits: TABLE1_FILE_SIZE,
        }
    }
}

impl ContentSection {
    pub fn model(&self) -> Result<ContentModel> {
        ContentModel::zipf(self.file_count, self.zipf_exponent, self.file_size_bits)
            .map_err(|e| CliError::section("content", e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CacheSection {
    pub cache_size: u32,
    pub sic_capability: u32,
}

impl Default for CacheSection {
    fn default() -> Self {
        let c = CacheConfig::table1();
        CacheSection {
            cache_size: c.cache_size,
            sic_capability: c.sic_capability,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    CacheSize,
    BsDensity,
    ZipfExponent,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::CacheSize => "cache_size",
            SweepVariable::BsDensity => "bs_density",
            SweepVariable::ZipfExponent => "zipf_exponent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EngineChoice {
    #[default]
    Analytic,
    Montecarlo,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialsSection {
    pub geometries: usize,
    pub fading_draws: usize,
    pub confidence: f64,
    pub seed: u64,
    /// Per-geometry cap on the local delay, slots. Also caps analytic delays.
    pub delay_cap: f64,
}

impl Default for TrialsSection {
    fn default() -> Self {
        let p = TrialPlan::default();
        TrialsSection {
            geometries: p.geometries,
            fading_draws: p.fading_draws,
            confidence: p.confidence,
            seed: p.seed,
            delay_cap: p.delay_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("results"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSection,
    pub content: ContentSection,
    pub cache: CacheSection,
    pub sweep: Option<SweepSection>,
    pub engine: EngineChoice,
    pub trials: TrialsSection,
    pub output: OutputSection,
}

/// Linear-unit view of a validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub params: SystemParams,
    pub content: ContentModel,
    pub cache: CacheConfig,
    pub plan: TrialPlan,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.resolve()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn plan(&self) -> Result<TrialPlan> {
        let t = &self.trials;
        let plan = TrialPlan {
            geometries: t.geometries,
            fading_draws: t.fading_draws,
            confidence: t.confidence,
            seed: t.seed,
            delay_cap: t.delay_cap,
            window_radius: None,
        };
        plan.validate().map_err(|e| CliError::section("trials", e))?;
        Ok(plan)
    }

    /// Validates every block and converts to library types.
    pub fn resolve(&self) -> Result<Resolved> {
        let params = self.system.params()?;
        let content = self.content.model()?;
        let cache = CacheConfig::new(self.cache.cache_size, self.cache.sic_capability, content.file_count())
            .map_err(|e| CliError::section("cache", e))?;
        let plan = self.plan()?;
        if let Some(s) = &self.sweep {
            self.check_sweep(s, content.file_count())?;
        }
        Ok(Resolved {
            params,
            content,
            cache,
            plan,
        })
    }

    fn check_sweep(&self, s: &SweepSection, file_count: usize) -> Result<()> {
        if s.values.is_empty() {
            return Err(CliError::config("sweep.values", "grid is empty"));
        }
        if s.values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::config("sweep.values", "grid values must be finite"));
        }
        if s.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::config("sweep.values", "grid must be strictly increasing"));
        }
        for &v in &s.values {
            let mut point = self.clone();
            point.sweep = None;
            match s.variable {
                SweepVariable::CacheSize => {
                    if v.fract() != 0.0 || v < 1.0 || v > file_count as f64 {
                        return Err(CliError::config(
                            "sweep.values",
                            format!("cache sizes must be integers in 1..={file_count}, got {v}"),
                        ));
                    }
                    point.cache.cache_size = v as u32;
                }
                SweepVariable::BsDensity => point.system.bs_density = v,
                SweepVariable::ZipfExponent => point.content.zipf_exponent = v,
            }
            point.resolve().map_err(|e| CliError::config("sweep.values", format!("at {v}: {e}")))?;
        }
        Ok(())
    }

    /// The configuration at one grid value.
    pub fn at(&self, variable: SweepVariable, value: f64) -> Self {
        let mut point = self.clone();
        point.sweep = None;
        match variable {
            SweepVariable::CacheSize => point.cache.cache_size = value as u32,
            SweepVariable::BsDensity => point.system.bs_density = value,
            SweepVariable::ZipfExponent => point.content.zipf_exponent = value,
        }
        point
    }
}

/// Simulation-table values written out, with a cache-size sweep.
pub fn table1_toml() -> String {
    let cfg = ExperimentConfig {
        sweep: Some(SweepSection {
            variable: SweepVariable::CacheSize,
            values: (1..=10).map(|k| 5.0 * k as f64).collect(),
        }),
        ..ExperimentConfig::default()
    };
    cfg.to_toml()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn defaults_are_the_table() {
        let r = ExperimentConfig::default().resolve().unwrap();
        let t = SystemParams::table1();
        assert!((r.params.tx_power - t.tx_power).abs() < 1e-15);
        assert!((r.params.noise_power / t.noise_power - 1.0).abs() < 1e-12);
        assert!((r.params.beamwidth - PI / 6.0).abs() < 1e-15);
        assert!((r.params.mainlobe_gain - 10.0).abs() < 1e-12);
        assert_eq!(r.params.kappa_los, t.kappa_los);
        assert_eq!(r.content, ContentModel::table1());
        assert_eq!(r.cache, CacheConfig::table1());
    }

    #[test]
    fn dbm_converted_once() {
        let cfg = ExperimentConfig::from_toml("[system]\ntx_power_dbm = 30.0\nnoise_power_dbm = -70.0\n").unwrap();
        let p = cfg.resolve().unwrap().params;
        assert!((p.tx_power - 1.0).abs() < 1e-12);
        assert!((p.noise_power - 1e-10).abs() < 1e-22);
    }

    #[test]
    fn field_level_diagnostics() {
        let e = ExperimentConfig::from_toml("[system]\nblockage = -1.0\n").unwrap_err();
        assert!(e.to_string().contains("blockage"), "{e}");
        let e = ExperimentConfig::from_toml("[cache]\ncache_size = 80\n").unwrap_err();
        assert!(e.to_string().contains("cache_size"), "{e}");
        let e = ExperimentConfig::from_toml("[sweep]\nvariable = \"cache_size\"\nvalues = [10.0, 5.0]\n").unwrap_err();
        assert!(e.to_string().contains("sweep.values"), "{e}");
        let e = ExperimentConfig::from_toml("[system]\nbs_densty = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("bs_densty"), "{e}");
    }

    #[test]
    fn toml_round_trip() {
        let text = table1_toml();
        let back = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(back.to_toml(), text);
        assert_eq!(back.sweep.unwrap().values.len(), 10);
    }
}
