//! Physical and content parameters shared by the analytic engine, the
//! simulator and the optimizer.
//!
//! Units are SI throughout: densities per m², distances in m, powers in W,
//! bandwidth in Hz and slot length in s. Decibel quantities are converted at
//! the configuration boundary with [`dbm_to_watts`] and [`db_to_linear`].

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant times 290 K, expressed in dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Thermal noise power over `bandwidth` Hz with the given receiver noise figure.
pub fn thermal_noise_watts(bandwidth: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth.log10() + noise_figure_db)
}

/// Free-space loss at the 1 m reference distance, `(4π f_c / c)²`.
pub fn free_space_intercept(carrier_hz: f64) -> f64 {
    (4.0 * PI * carrier_hz / SPEED_OF_LIGHT).powi(2)
}

/// Blockage state of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    pub const BOTH: [LinkState; 2] = [LinkState::Los, LinkState::Nlos];
}

/// Physical-layer constants of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// BS density λ, per m².
    pub bs_density: f64,
    /// Gateway density λ_G, per m².
    pub gateway_density: f64,
    /// BS transmit power P, W.
    pub tx_power: f64,
    /// Bandwidth W, Hz.
    pub bandwidth: f64,
    /// Slot length T, s.
    pub slot_length: f64,
    /// Noise power σ², W.
    pub noise_power: f64,
    /// Blockage parameter β, 1/m.
    pub blockage: f64,
    pub kappa_los: f64,
    pub kappa_nlos: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    /// Nakagami shape of LOS links. Also the serving-link shape used by the
    /// analytic engine.
    pub nakagami_los: u32,
    pub nakagami_nlos: u32,
    pub mainlobe_gain: f64,
    pub sidelobe_gain: f64,
    /// Half-power beamwidth θ_T, rad.
    pub beamwidth: f64,
    /// Gain of a serving (beam-aligned) link.
    pub serving_gain: f64,
    /// Backhaul scaling factor υ; the backhaul delay ½·υ·λ·λ_G^(−3/2) is in seconds.
    pub backhaul_scale: f64,
}

impl SystemParams {
    /// Simulation-table defaults, verbatim where the table gives a value
    /// (including `alpha_los = 2`).
    pub fn table1() -> Self {
        let bandwidth = 1e9;
        let mainlobe = db_to_linear(10.0);
        let kappa = free_space_intercept(28e9);
        SystemParams {
            bs_density: 50.0 / (500.0 * 500.0 * PI),
            gateway_density: 1e-5,
            tx_power: dbm_to_watts(33.0),
            bandwidth,
            slot_length: 1e-3,
            noise_power: thermal_noise_watts(bandwidth, 10.0),
            blockage: 0.01,
            kappa_los: kappa,
            kappa_nlos: kappa,
            alpha_los: 2.0,
            alpha_nlos: 4.0,
            nakagami_los: 3,
            nakagami_nlos: 2,
            mainlobe_gain: mainlobe,
            sidelobe_gain: db_to_linear(-10.0),
            beamwidth: PI / 6.0,
            serving_gain: mainlobe,
            backhaul_scale: 1e-5,
        }
    }

    /// [`SystemParams::table1`] with `alpha_los = 2.1`, the companion setting
    /// for closed-form comparisons (the hypergeometric forms are singular at 2).
    pub fn table1_companion() -> Self {
        SystemParams {
            alpha_los: 2.1,
            ..Self::table1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be finite and > 0, got {v}")))
            }
        }
        positive("bs_density", self.bs_density)?;
        positive("gateway_density", self.gateway_density)?;
        positive("tx_power", self.tx_power)?;
        positive("bandwidth", self.bandwidth)?;
        positive("slot_length", self.slot_length)?;
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return Err(invalid("noise_power", "must be finite and >= 0"));
        }
        if !(self.blockage.is_finite() && self.blockage >= 0.0) {
            return Err(invalid("blockage", "must be finite and >= 0"));
        }
        positive("kappa_los", self.kappa_los)?;
        positive("kappa_nlos", self.kappa_nlos)?;
        if !(self.alpha_los >= 2.0 && self.alpha_los.is_finite()) {
            return Err(invalid("alpha_los", format!("must be >= 2, got {}", self.alpha_los)));
        }
        if !(self.alpha_nlos >= self.alpha_los && self.alpha_nlos.is_finite()) {
            return Err(invalid(
                "alpha_nlos",
                format!("must be >= alpha_los ({}), got {}", self.alpha_los, self.alpha_nlos),
            ));
        }
        if self.nakagami_los == 0 {
            return Err(invalid("nakagami_los", "must be >= 1"));
        }
        if self.nakagami_nlos == 0 {
            return Err(invalid("nakagami_nlos", "must be >= 1"));
        }
        positive("sidelobe_gain", self.sidelobe_gain)?;
        if !(self.mainlobe_gain >= self.sidelobe_gain && self.mainlobe_gain.is_finite()) {
            return Err(invalid("mainlobe_gain", "must be >= sidelobe_gain"));
        }
        if !(self.beamwidth > 0.0 && self.beamwidth < 2.0 * PI) {
            return Err(invalid("beamwidth", "must lie in (0, 2π)"));
        }
        positive("serving_gain", self.serving_gain)?;
        if !(self.backhaul_scale.is_finite() && self.backhaul_scale >= 0.0) {
            return Err(invalid("backhaul_scale", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn kappa(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.kappa_los,
            LinkState::Nlos => self.kappa_nlos,
        }
    }

    pub fn alpha(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.alpha_los,
            LinkState::Nlos => self.alpha_nlos,
        }
    }

    pub fn nakagami(&self, state: LinkState) -> u32 {
        match state {
            LinkState::Los => self.nakagami_los,
            LinkState::Nlos => self.nakagami_nlos,
        }
    }

    /// Gamma shape of the serving signal (Toeplitz dimension per serving BS).
    pub fn serving_nakagami(&self) -> u32 {
        self.nakagami_los
    }

    /// Probability that a link at distance `d` is in `state`.
    pub fn state_probability(&self, d: f64, state: LinkState) -> f64 {
        match state {
            LinkState::Los => (-self.blockage * d).exp(),
            LinkState::Nlos => -(-self.blockage * d).exp_m1(),
        }
    }

    /// Distance at which a `state` link has path loss `x`.
    pub fn radius_for_loss(&self, x: f64, state: LinkState) -> f64 {
        (x / self.kappa(state)).powf(1.0 / self.alpha(state))
    }

    pub fn gain_law(&self) -> AntennaGainLaw {
        AntennaGainLaw::sectored(self.mainlobe_gain, self.sidelobe_gain, self.beamwidth)
    }

    pub fn noise_to_power(&self) -> f64 {
        self.noise_power / self.tx_power
    }

    /// SINR threshold for a file split into `parts` subfiles.
    pub fn threshold(&self, content: &ContentModel, parts: u32) -> f64 {
        sinr_threshold_unchecked(content.file_size, self.slot_length, self.bandwidth, parts)
    }

    /// Backhaul delay ½·υ·λ·λ_G^(−3/2) expressed in slots.
    pub fn backhaul_delay_slots(&self) -> f64 {
        0.5 * self.backhaul_scale * self.bs_density * self.gateway_density.powf(-1.5)
            / self.slot_length
    }
}

/// Catalog and request statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ContentModel {
    /// File size S, bits.
    pub file_size: f64,
    /// Request probabilities, nonincreasing, summing to one.
    pub popularity: Vec<f64>,
    /// Zipf exponent the popularity was generated from, when it was.
    pub zipf_exponent: Option<f64>,
}

/// File size of the simulation-table setup, bits: 6 bit/s/Hz over one slot.
pub const TABLE1_FILE_SIZE: f64 = 6e6;

impl ContentModel {
    /// F = 50 files, δ = 0.6, S = [`TABLE1_FILE_SIZE`].
    pub fn table1() -> Self {
        Self::zipf(50, 0.6, TABLE1_FILE_SIZE).expect("valid table defaults")
    }

    pub fn zipf(file_count: usize, exponent: f64, file_size: f64) -> Result<Self> {
        let popularity = zipf_popularity(file_count, exponent)?;
        Self::new(popularity, file_size).map(|c| ContentModel {
            zipf_exponent: Some(exponent),
            ..c
        })
    }

    pub fn new(popularity: Vec<f64>, file_size: f64) -> Result<Self> {
        if popularity.is_empty() {
            return Err(Error::InvalidCatalog("no files".into()));
        }
        if !(file_size.is_finite() && file_size > 0.0) {
            return Err(invalid("file_size", "must be finite and > 0"));
        }
        if popularity.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidCatalog("popularity entries must be finite and >= 0".into()));
        }
        if popularity.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidCatalog("popularity must be nonincreasing".into()));
        }
        let total: f64 = popularity.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidCatalog(format!("popularity sums to {total}, not 1")));
        }
        Ok(ContentModel {
            file_size,
            popularity,
            zipf_exponent: None,
        })
    }

    pub fn file_count(&self) -> usize {
        self.popularity.len()
    }
}

/// Cache size and SIC capability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CacheConfig {
    /// C, in whole files.
    pub cache_size: u32,
    /// N: both the JT cluster size and the largest number of subfiles.
    pub sic_capability: u32,
}

impl CacheConfig {
    /// C = 35, N = 3.
    pub fn table1() -> Self {
        CacheConfig {
            cache_size: 35,
            sic_capability: 3,
        }
    }

    pub fn new(cache_size: u32, sic_capability: u32, file_count: usize) -> Result<Self> {
        let cfg = CacheConfig {
            cache_size,
            sic_capability,
        };
        cfg.validate(file_count)?;
        Ok(cfg)
    }

    pub fn validate(&self, file_count: usize) -> Result<()> {
        if self.cache_size == 0 || self.cache_size as usize > file_count {
            return Err(invalid(
                "cache_size",
                format!("must lie in 1..={file_count}, got {}", self.cache_size),
            ));
        }
        if self.sic_capability == 0 {
            return Err(invalid("sic_capability", "must be >= 1"));
        }
        Ok(())
    }
}

/// Per-file caching status: 0 = uncached, 1 = whole (JT), n ≥ 2 = n coded
/// subfiles (PT).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CachingVector(pub Vec<u32>);

impl CachingVector {
    pub fn empty(file_count: usize) -> Self {
        CachingVector(vec![0; file_count])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn statuses(&self) -> &[u32] {
        &self.0
    }

    /// Cache occupancy Σ_{s_f ≥ 1} 1/s_f.
    pub fn weight(&self) -> f64 {
        self.0.iter().filter(|&&s| s > 0).map(|&s| 1.0 / s as f64).sum()
    }

    pub fn cached_files(&self) -> usize {
        self.0.iter().filter(|&&s| s > 0).count()
    }
}

impl std::fmt::Display for CachingVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "]")
    }
}

/// Two-point gain law of the sectored antenna model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaGainLaw {
    pub values: [f64; 2],
    pub probabilities: [f64; 2],
}

impl AntennaGainLaw {
    pub fn sectored(mainlobe: f64, sidelobe: f64, beamwidth: f64) -> Self {
        let p_main = beamwidth / (2.0 * PI);
        AntennaGainLaw {
            values: [mainlobe, sidelobe],
            probabilities: [p_main, 1.0 - p_main],
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probabilities.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(g, p)| g * p).sum()
    }
}

/// Zipf request probabilities `f^(−δ) / Σ k^(−δ)`.
pub fn zipf_popularity(file_count: usize, exponent: f64) -> Result<Vec<f64>> {
    if file_count == 0 {
        return Err(Error::InvalidCatalog("file count must be >= 1".into()));
    }
    if !(exponent.is_finite() && exponent >= 0.0) {
        return Err(invalid("zipf_exponent", "must be finite and >= 0"));
    }
    let weights: Vec<f64> = (1..=file_count).map(|f| (f as f64).powf(-exponent)).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// LOS probability e^(−βd).
pub fn los_probability(distance: f64, blockage: f64) -> Result<f64> {
    if !(distance >= 0.0) {
        return Err(Error::Domain(format!("negative distance {distance}")));
    }
    Ok((-blockage * distance).exp())
}

/// Path loss κ·d^α of a link in `state`.
pub fn path_loss(distance: f64, state: LinkState, params: &SystemParams) -> Result<f64> {
    if distance == 0.0 {
        return Err(Error::SingularDistance(distance));
    }
    if !(distance > 0.0) {
        return Err(Error::Domain(format!("negative distance {distance}")));
    }
    Ok(params.kappa(state) * distance.powf(params.alpha(state)))
}

/// SINR threshold θ = 2^(S/(s_f·T·W)) − 1 of the Shannon-rate success event.
pub fn sinr_threshold(file_size: f64, slot_length: f64, bandwidth: f64, parts: u32) -> Result<f64> {
    if parts == 0 {
        return Err(Error::Domain("a file needs at least one part".into()));
    }
    Ok(sinr_threshold_unchecked(file_size, slot_length, bandwidth, parts))
}

fn sinr_threshold_unchecked(file_size: f64, slot_length: f64, bandwidth: f64, parts: u32) -> f64 {
    let spectral = file_size / (parts as f64 * slot_length * bandwidth);
    (spectral * std::f64::consts::LN_2).exp_m1()
}

/// Outcome of checking a caching vector against the cache constraints.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible { slack: f64 },
    StatusOutOfRange { index: usize, status: u32, max: u32 },
    OverCapacity { weight: f64, capacity: f64, excess: f64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Checks `s_f ∈ {0..N}` and `Σ 1/s_f ≤ C`.
///
/// The capacity test is exact: occupancies are compared as integers scaled by
/// lcm(1..N) whenever that fits in 128 bits.
pub fn validate_caching_vector(
    s: &CachingVector,
    cfg: &CacheConfig,
    file_count: usize,
) -> Result<Feasibility> {
    if s.len() != file_count {
        return Err(Error::Shape {
            expected: file_count,
            got: s.len(),
        });
    }
    let n_max = cfg.sic_capability;
    if let Some((index, &status)) = s.0.iter().enumerate().find(|(_, &v)| v > n_max) {
        return Ok(Feasibility::StatusOutOfRange {
            index,
            status,
            max: n_max,
        });
    }
    let capacity = cfg.cache_size as f64;
    let weight = s.weight();
    let within = match lcm_upto(n_max) {
        Some(l) => {
            let scaled: u128 = s.0.iter().filter(|&&v| v > 0).map(|&v| l / v as u128).sum();
            scaled <= l * cfg.cache_size as u128
        }
        None => weight <= capacity + 1e-9,
    };
    if within {
        Ok(Feasibility::Feasible {
            slack: (capacity - weight).max(0.0),
        })
    } else {
        Ok(Feasibility::OverCapacity {
            weight,
            capacity,
            excess: weight - capacity,
        })
    }
}

fn lcm_upto(n: u32) -> Option<u128> {
    fn gcd(mut a: u128, mut b: u128) -> u128 {
        while b != 0 {
            (a, b) = (b, a % b);
        }
        a
    }
    let mut l: u128 = 1;
    for k in 2..=n as u128 {
        l = (l / gcd(l, k)).checked_mul(k)?;
        if l > u64::MAX as u128 {
            return None;
        }
    }
    Some(l)
}
