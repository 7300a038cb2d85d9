//! Success probability and mean local delay under joint, parallel and
//! uncached transmission.

use crate::analytic::cone::{cone_expectation, gamma_expectation};
use crate::analytic::intensity::IntensityMeasure;
use crate::analytic::laplace::{omega_jt, omega_pt};
use crate::error::{invalid, Error, Result};
use crate::model::{ContentModel, SystemParams};
use crate::quadrature::QuadratureSpec;

/// Default truncation of the mean local delay, in slots.
pub const DEFAULT_DELAY_CAP: f64 = 1e4;

/// Share of probability mass at the cap above which a delay is flagged as
/// divergent.
pub const DIVERGENCE_MASS: f64 = 0.01;

/// A truncated mean local delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayValue {
    /// Mean slots, each conditional delay capped at the configured maximum.
    pub mean: f64,
    /// Probability mass of geometries whose conditional delay hit the cap.
    pub capped_mass: f64,
    pub diverged: bool,
}

impl DelayValue {
    fn from_parts(mean: f64, capped_mass: f64) -> Self {
        let capped_mass = capped_mass.clamp(0.0, 1.0);
        DelayValue {
            mean,
            capped_mass,
            diverged: capped_mass >= DIVERGENCE_MASS,
        }
    }
}

fn check_cap(cap: f64) -> Result<()> {
    if cap >= 1.0 && cap.is_finite() {
        Ok(())
    } else {
        Err(invalid("delay_cap", format!("must be finite and >= 1, got {cap}")))
    }
}

fn check_links(n: u32) -> Result<()> {
    if n == 0 {
        Err(invalid("sic_capability", "need at least one serving BS"))
    } else {
        Ok(())
    }
}

fn jt_conditional(
    measure: &IntensityMeasure,
    u: &[f64],
    theta: f64,
    params: &SystemParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let losses = u.iter().map(|&ui| measure.inverse(ui)).collect::<Result<Vec<_>>>()?;
    Ok(omega_jt(&losses, theta, params, spec)?.success_probability())
}

fn pt_conditional(
    measure: &IntensityMeasure,
    u: f64,
    theta: f64,
    params: &SystemParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let l = measure.inverse(u)?;
    Ok(omega_pt(l, theta, params, spec)?.success_probability())
}

// The cap indicator is carried at a small scale so that its discontinuity
// does not drive the adaptive error control of the mean.
const INDICATOR_SCALE: f64 = 1e-6;

fn delay_integrand(p: f64, cap: f64, out: &mut [f64]) {
    let d = if p > 0.0 { (1.0 / p).min(cap) } else { cap };
    out[0] = d;
    out[1] = if d >= cap { INDICATOR_SCALE } else { 0.0 };
}

/// STP of joint transmission by the `n` BSs with the smallest path losses at
/// SINR threshold `theta`.
pub fn stp_jt_at(params: &SystemParams, n: u32, theta: f64, spec: &QuadratureSpec) -> Result<f64> {
    params.validate()?;
    spec.validate()?;
    check_links(n)?;
    if theta == 0.0 {
        return Ok(1.0);
    }
    let measure = IntensityMeasure::new(params);
    let v = cone_expectation(n as usize, 1, spec, |u, out| {
        out[0] = jt_conditional(&measure, u, theta, params, spec)?;
        Ok(())
    })?;
    Ok(v[0].clamp(0.0, 1.0))
}

/// STP of a whole file delivered by joint transmission from `n` BSs.
pub fn stp_jt(
    params: &SystemParams,
    content: &ContentModel,
    n: u32,
    spec: &QuadratureSpec,
) -> Result<f64> {
    stp_jt_at(params, n, params.threshold(content, 1), spec)
}

/// Success probability of the stream from the BS with the `n`-th smallest
/// path loss, interference from the BSs beyond it.
pub fn stream_stp(params: &SystemParams, n: u32, theta: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_links(n)?;
    if theta == 0.0 {
        return Ok(1.0);
    }
    let measure = IntensityMeasure::new(params);
    let v = gamma_expectation(n as usize, 1, spec, |u, out| {
        out[0] = pt_conditional(&measure, u, theta, params, spec)?;
        Ok(())
    })?;
    Ok(v[0].clamp(0.0, 1.0))
}

/// STP of a file split into `parts` subfiles sent in parallel, decoded by SIC
/// in path-loss order. `parts = 1` is single-BS transmission.
pub fn stp_pt_at(params: &SystemParams, parts: u32, theta: f64, spec: &QuadratureSpec) -> Result<f64> {
    params.validate()?;
    spec.validate()?;
    check_links(parts)?;
    let mut p = 1.0;
    for n in 1..=parts {
        p *= stream_stp(params, n, theta, spec)?;
    }
    Ok(p)
}

pub fn stp_pt(
    parts: u32,
    params: &SystemParams,
    content: &ContentModel,
    spec: &QuadratureSpec,
) -> Result<f64> {
    stp_pt_at(params, parts, params.threshold(content, parts), spec)
}

/// STP of `parts` subfiles with the streams coupled through their shared
/// serving path losses: E_l[Π_n P_n(l_n)] over the ordered cone rather than
/// Π_n E[P_n]. Never below [`stp_pt_at`].
pub fn stp_pt_coupled_at(
    params: &SystemParams,
    parts: u32,
    theta: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    params.validate()?;
    spec.validate()?;
    check_links(parts)?;
    if theta == 0.0 {
        return Ok(1.0);
    }
    let measure = IntensityMeasure::new(params);
    let v = cone_expectation(parts as usize, 1, spec, |u, out| {
        let mut p = 1.0;
        for &ui in u {
            p *= pt_conditional(&measure, ui, theta, params, spec)?;
        }
        out[0] = p;
        Ok(())
    })?;
    Ok(v[0].clamp(0.0, 1.0))
}

pub fn stp_pt_coupled(
    parts: u32,
    params: &SystemParams,
    content: &ContentModel,
    spec: &QuadratureSpec,
) -> Result<f64> {
    stp_pt_coupled_at(params, parts, params.threshold(content, parts), spec)
}

pub fn delay_jt_at(
    params: &SystemParams,
    n: u32,
    theta: f64,
    cap: f64,
    spec: &QuadratureSpec,
) -> Result<DelayValue> {
    params.validate()?;
    spec.validate()?;
    check_links(n)?;
    check_cap(cap)?;
    if theta == 0.0 {
        return Ok(DelayValue::from_parts(1.0, 0.0));
    }
    let measure = IntensityMeasure::new(params);
    let v = cone_expectation(n as usize, 2, spec, |u, out| {
        let p = jt_conditional(&measure, u, theta, params, spec)?;
        delay_integrand(p, cap, out);
        Ok(())
    })?;
    Ok(DelayValue::from_parts(v[0].max(1.0), v[1] / INDICATOR_SCALE))
}

/// Mean local delay of joint transmission from `n` BSs, in slots.
pub fn delay_jt(
    params: &SystemParams,
    content: &ContentModel,
    n: u32,
    cap: f64,
    spec: &QuadratureSpec,
) -> Result<DelayValue> {
    delay_jt_at(params, n, params.threshold(content, 1), cap, spec)
}

pub fn delay_pt_at(
    params: &SystemParams,
    parts: u32,
    theta: f64,
    cap: f64,
    spec: &QuadratureSpec,
) -> Result<DelayValue> {
    params.validate()?;
    spec.validate()?;
    check_links(parts)?;
    check_cap(cap)?;
    if theta == 0.0 {
        return Ok(DelayValue::from_parts(1.0, 0.0));
    }
    let measure = IntensityMeasure::new(params);
    let mut mean = 1.0;
    let mut uncapped = 1.0;
    for n in 1..=parts {
        let v = gamma_expectation(n as usize, 2, spec, |u, out| {
            let p = pt_conditional(&measure, u, theta, params, spec)?;
            delay_integrand(p, cap, out);
            Ok(())
        })?;
        mean *= v[0].max(1.0);
        uncapped *= 1.0 - (v[1] / INDICATOR_SCALE).clamp(0.0, 1.0);
    }
    let mut value = DelayValue::from_parts(mean.min(cap), 1.0 - uncapped);
    if mean >= cap {
        value.diverged = true;
    }
    Ok(value)
}

/// Mean local delay of a file split into `parts` subfiles, in slots.
pub fn delay_pt(
    parts: u32,
    params: &SystemParams,
    content: &ContentModel,
    cap: f64,
    spec: &QuadratureSpec,
) -> Result<DelayValue> {
    delay_pt_at(params, parts, params.threshold(content, parts), cap, spec)
}

/// Backhaul fetch plus single-BS local delay, in slots.
pub fn delay_ut(
    params: &SystemParams,
    content: &ContentModel,
    cap: f64,
    spec: &QuadratureSpec,
) -> Result<DelayValue> {
    if !(params.gateway_density > 0.0) {
        return Err(Error::Domain("gateway density must be > 0".into()));
    }
    let local = delay_jt(params, content, 1, cap, spec)?;
    Ok(DelayValue {
        mean: local.mean + params.backhaul_delay_slots(),
        ..local
    })
}
