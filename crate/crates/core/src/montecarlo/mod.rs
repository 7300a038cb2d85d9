//! Monte Carlo simulator of the typical user's downlink.
//!
//! Every geometry owns one ChaCha8 stream (the master seed with the geometry
//! index as stream id), so estimates do not depend on the worker count.
//! All probes of a run share geometries and fading draws.

mod realization;

use std::fmt;
use std::io::Write;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

pub use realization::{
    sample_realization, sample_with, window_radius, BaseStation, NetworkRealization,
    MIN_WINDOW_STATIONS, WINDOW_MISS,
};

use crate::analytic::{DEFAULT_DELAY_CAP, DIVERGENCE_MASS};
use crate::error::{invalid, Error, Result};
use crate::model::{ContentModel, LinkState, SystemParams};

/// How a file reaches the user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transmission {
    /// The `links` BSs with the smallest path losses send the whole file
    /// coherently.
    Joint { links: u32 },
    /// `parts` subfiles from the `parts` nearest BSs, decoded by SIC.
    Parallel { parts: u32 },
}

impl Transmission {
    /// Number of serving BSs.
    pub fn rank(&self) -> u32 {
        match *self {
            Transmission::Joint { links } => links,
            Transmission::Parallel { parts } => parts,
        }
    }

    /// Subfile count used for the SINR threshold.
    pub fn parts(&self) -> u32 {
        match *self {
            Transmission::Joint { .. } => 1,
            Transmission::Parallel { parts } => parts,
        }
    }
}

impl fmt::Display for Transmission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Transmission::Joint { links } => write!(f, "jt{links}"),
            Transmission::Parallel { parts } => write!(f, "pt{parts}"),
        }
    }
}

/// A transmission scheme evaluated at a fixed SINR threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub transmission: Transmission,
    pub theta: f64,
}

impl Probe {
    pub fn new(transmission: Transmission, theta: f64) -> Self {
        Probe { transmission, theta }
    }

    /// The probe at the threshold a file of `content` needs.
    pub fn for_content(transmission: Transmission, params: &SystemParams, content: &ContentModel) -> Self {
        Probe {
            transmission,
            theta: params.threshold(content, transmission.parts()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialPlan {
    pub geometries: usize,
    /// Fading draws (slots) per geometry.
    pub fading_draws: usize,
    /// Two-sided confidence level of the reported half-widths.
    pub confidence: f64,
    pub seed: u64,
    /// Cap on a geometry's local delay, slots.
    pub delay_cap: f64,
    /// Overrides the automatic window radius, m.
    pub window_radius: Option<f64>,
}

impl Default for TrialPlan {
    fn default() -> Self {
        TrialPlan {
            geometries: 10_000,
            fading_draws: 200,
            confidence: 0.95,
            seed: 1,
            delay_cap: DEFAULT_DELAY_CAP,
            window_radius: None,
        }
    }
}

impl TrialPlan {
    pub fn validate(&self) -> Result<()> {
        if self.geometries == 0 {
            return Err(invalid("geometries", "must be >= 1"));
        }
        if self.fading_draws == 0 || self.fading_draws > u32::MAX as usize {
            return Err(invalid("fading_draws", "must lie in 1..=u32::MAX"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(invalid("confidence", format!("must lie in (0, 1), got {}", self.confidence)));
        }
        if !(self.delay_cap >= 1.0 && self.delay_cap.is_finite()) {
            return Err(invalid("delay_cap", "must be finite and >= 1"));
        }
        if let Some(r) = self.window_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(invalid("window_radius", "must be finite and > 0"));
            }
        }
        Ok(())
    }

    fn z(&self) -> f64 {
        Normal::standard().inverse_cdf(0.5 + 0.5 * self.confidence)
    }
}

/// A sample mean with its confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub estimate: f64,
    pub half_width: f64,
    /// Number of (geometry, slot) trials behind the estimate.
    pub samples: usize,
    /// Delays only: at least 1% of geometries hit the cap.
    pub diverged: bool,
}

impl EstimateWithCI {
    pub fn contains(&self, value: f64, widths: f64) -> bool {
        (value - self.estimate).abs() <= widths * self.half_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    /// Per probe, in input order.
    pub stp: Vec<EstimateWithCI>,
    /// Per-probe mean local delay, capped at the plan's cap.
    pub delay: Vec<EstimateWithCI>,
    pub radius: f64,
    /// Geometries redrawn in a doubled window because they held too few BSs.
    pub enlarged_windows: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct TraceRecord {
    geometry: usize,
    trial: usize,
    probe: usize,
    success: bool,
    sinr: f64,
}

struct GeometryOutcome {
    successes: Vec<u32>,
    enlarged: usize,
    trace: Vec<TraceRecord>,
}

fn validate_probes(probes: &[Probe]) -> Result<u32> {
    let mut rank = 0;
    for p in probes {
        if p.transmission.rank() == 0 {
            return Err(invalid("transmission", "needs at least one serving BS"));
        }
        if !(p.theta >= 0.0) {
            return Err(Error::Domain(format!("SINR threshold {} must be >= 0", p.theta)));
        }
        rank = rank.max(p.transmission.rank());
    }
    Ok(rank)
}

const MAX_ENLARGEMENTS: usize = 40;

/// Normalized Nakagami power gain |h|² ~ Gamma(M, 1/M) of a `state` link.
pub fn fading_power(params: &SystemParams, state: LinkState) -> Result<Gamma<f64>> {
    let m = params.nakagami(state) as f64;
    Gamma::new(m, 1.0 / m).map_err(|e| invalid("nakagami", e.to_string()))
}

fn run_geometry(
    params: &SystemParams,
    probes: &[Probe],
    plan: &TrialPlan,
    radius: f64,
    rank: usize,
    geometry: usize,
    trace: bool,
) -> Result<GeometryOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(geometry as u64);
    let mut r = radius;
    let mut enlarged = 0;
    let geo = loop {
        let geo = sample_with(params, r, plan.seed, &mut rng)?;
        if geo.len() >= rank {
            break geo;
        }
        enlarged += 1;
        if enlarged > MAX_ENLARGEMENTS {
            return Err(Error::Domain(format!(
                "could not place {rank} BSs in a window of radius {r} m"
            )));
        }
        r *= 2.0;
    };
    let laws = [fading_power(params, LinkState::Los)?, fading_power(params, LinkState::Nlos)?];
    let noise = params.noise_to_power();
    let g0 = params.serving_gain;
    let n = geo.len();
    let mut rx = vec![0.0; n];
    // interference[j]: received power from ranks j.. (0-based), j ≤ rank
    let mut interference = vec![0.0; rank + 1];
    let mut successes = vec![0u32; probes.len()];
    let mut records = Vec::new();
    for trial in 0..plan.fading_draws {
        for (x, b) in rx.iter_mut().zip(&geo.stations) {
            let law = match b.state {
                LinkState::Los => &laws[0],
                LinkState::Nlos => &laws[1],
            };
            *x = law.sample(&mut rng) / b.path_loss;
        }
        let mut tail = 0.0;
        for (x, b) in rx[rank..].iter().zip(&geo.stations[rank..]) {
            tail += b.interferer_gain * x;
        }
        interference[rank] = tail;
        for j in (0..rank).rev() {
            interference[j] = interference[j + 1] + geo.stations[j].interferer_gain * rx[j];
        }
        for (k, probe) in probes.iter().enumerate() {
            let sinr = match probe.transmission {
                Transmission::Joint { links } => {
                    let l = links as usize;
                    let amp: f64 = rx[..l].iter().map(|x| x.sqrt()).sum();
                    g0 * amp * amp / (interference[l] + noise)
                }
                Transmission::Parallel { parts } => (0..parts as usize)
                    .map(|i| g0 * rx[i] / (interference[i + 1] + noise))
                    .fold(f64::INFINITY, f64::min),
            };
            let success = sinr >= probe.theta;
            successes[k] += success as u32;
            if trace {
                records.push(TraceRecord {
                    geometry,
                    trial,
                    probe: k,
                    success,
                    sinr,
                });
            }
        }
    }
    Ok(GeometryOutcome {
        successes,
        enlarged,
        trace: records,
    })
}

fn mean_with_ci(values: impl Iterator<Item = f64> + Clone, count: usize, z: f64) -> (f64, f64) {
    let g = count as f64;
    let mean = values.clone().sum::<f64>() / g;
    if count < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (g - 1.0);
    (mean, z * (var / g).sqrt())
}

fn run(
    params: &SystemParams,
    probes: &[Probe],
    plan: &TrialPlan,
    trace: bool,
) -> Result<(SimulationReport, Vec<TraceRecord>)> {
    params.validate()?;
    plan.validate()?;
    let rank = validate_probes(probes)?;
    let radius = match plan.window_radius {
        Some(r) => r,
        None => window_radius(params, rank.max(1))?,
    };
    let outcomes = (0..plan.geometries)
        .into_par_iter()
        .map(|g| run_geometry(params, probes, plan, radius, rank as usize, g, trace))
        .collect::<Result<Vec<_>>>()?;

    let z = plan.z();
    let draws = plan.fading_draws as f64;
    let samples = plan.geometries * plan.fading_draws;
    let mut stp = Vec::with_capacity(probes.len());
    let mut delay = Vec::with_capacity(probes.len());
    for k in 0..probes.len() {
        let p = outcomes.iter().map(|o| o.successes[k] as f64 / draws);
        let (mean, mut half) = mean_with_ci(p, outcomes.len(), z);
        if outcomes.len() < 2 {
            half = z * (mean * (1.0 - mean) / samples as f64).sqrt();
        }
        stp.push(EstimateWithCI {
            estimate: mean,
            half_width: half,
            samples,
            diverged: false,
        });

        let cap = plan.delay_cap;
        let d = outcomes.iter().map(|o| match o.successes[k] {
            0 => cap,
            s => (draws / s as f64).min(cap),
        });
        let capped = d.clone().filter(|&v| v >= cap).count();
        let (mean, half) = mean_with_ci(d, outcomes.len(), z);
        delay.push(EstimateWithCI {
            estimate: mean,
            half_width: half,
            samples,
            diverged: capped as f64 >= DIVERGENCE_MASS * outcomes.len() as f64,
        });
    }
    let enlarged_windows = outcomes.iter().map(|o| o.enlarged).sum();
    let records = if trace {
        outcomes.into_iter().flat_map(|o| o.trace).collect()
    } else {
        Vec::new()
    };
    Ok((
        SimulationReport {
            stp,
            delay,
            radius,
            enlarged_windows,
        },
        records,
    ))
}

/// STP and local delay of every probe over one set of geometries and fading
/// draws.
pub fn simulate(params: &SystemParams, probes: &[Probe], plan: &TrialPlan) -> Result<SimulationReport> {
    run(params, probes, plan, false).map(|(r, _)| r)
}

/// Header of the per-trial trace.
pub const TRACE_HEADER: &str = "seed,geometry,trial,strategy,success,sinr_db";

/// [`simulate`], also writing one comma-separated line per trial and probe
/// to `out`.
pub fn simulate_traced<W: Write>(
    params: &SystemParams,
    probes: &[Probe],
    plan: &TrialPlan,
    out: &mut W,
) -> Result<SimulationReport> {
    let (report, records) = run(params, probes, plan, true)?;
    let io = |e: std::io::Error| Error::Domain(format!("writing trace: {e}"));
    writeln!(out, "{TRACE_HEADER}").map_err(io)?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            plan.seed,
            r.geometry,
            r.trial,
            probes[r.probe].transmission,
            r.success as u8,
            10.0 * r.sinr.log10()
        )
        .map_err(io)?;
    }
    Ok(report)
}

fn single(params: &SystemParams, probe: Probe, plan: &TrialPlan) -> Result<SimulationReport> {
    simulate(params, &[probe], plan)
}

pub fn simulate_stp_jt_at(params: &SystemParams, links: u32, theta: f64, plan: &TrialPlan) -> Result<EstimateWithCI> {
    Ok(single(params, Probe::new(Transmission::Joint { links }, theta), plan)?.stp[0])
}

/// Fraction of trials in which the coherent sum of the `links` strongest BSs
/// meets the whole-file threshold.
pub fn simulate_stp_jt(
    params: &SystemParams,
    content: &ContentModel,
    links: u32,
    plan: &TrialPlan,
) -> Result<EstimateWithCI> {
    simulate_stp_jt_at(params, links, params.threshold(content, 1), plan)
}

pub fn simulate_stp_pt_at(params: &SystemParams, parts: u32, theta: f64, plan: &TrialPlan) -> Result<EstimateWithCI> {
    Ok(single(params, Probe::new(Transmission::Parallel { parts }, theta), plan)?.stp[0])
}

/// Fraction of trials in which every subfile stream clears the per-subfile
/// threshold, each stream seeing the BSs beyond it as interference.
pub fn simulate_stp_pt(
    params: &SystemParams,
    content: &ContentModel,
    parts: u32,
    plan: &TrialPlan,
) -> Result<EstimateWithCI> {
    simulate_stp_pt_at(params, parts, params.threshold(content, parts), plan)
}

/// Mean over geometries of min(1/p̂, cap), p̂ the per-geometry success rate.
pub fn estimate_local_delay(
    params: &SystemParams,
    content: &ContentModel,
    transmission: Transmission,
    plan: &TrialPlan,
) -> Result<EstimateWithCI> {
    if plan.fading_draws < 100 {
        return Err(invalid("fading_draws", "local delay needs at least 100 draws per geometry"));
    }
    let probe = Probe::for_content(transmission, params, content);
    Ok(single(params, probe, plan)?.delay[0])
}

/// Backhaul delay plus the single-BS local delay.
pub fn estimate_ut_delay(params: &SystemParams, content: &ContentModel, plan: &TrialPlan) -> Result<EstimateWithCI> {
    if !(params.gateway_density > 0.0) {
        return Err(Error::Domain("gateway density must be > 0".into()));
    }
    let local = estimate_local_delay(params, content, Transmission::Joint { links: 1 }, plan)?;
    Ok(EstimateWithCI {
        estimate: local.estimate + params.backhaul_delay_slots(),
        ..local
    })
}
