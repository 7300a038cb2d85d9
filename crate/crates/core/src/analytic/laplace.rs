//! Log-Laplace Taylor coefficients of the aggregate interference, and the
//! conditional success probabilities built from them.

use std::f64::consts::PI;

use crate::analytic::intensity::IntensityMeasure;
use crate::error::{Error, Result};
use crate::model::{LinkState, SystemParams};
use crate::quadrature::{integrate_vec, QuadratureSpec};
use crate::toeplitz::toeplitz_exp_l1;

/// First column of the Toeplitz exponent: ω_0 ≤ 0, then ω_j ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzLogCoeffs(pub Vec<f64>);

impl ToeplitzLogCoeffs {
    /// ‖exp(Ω)‖₁, clamped to [0, 1].
    pub fn success_probability(&self) -> f64 {
        toeplitz_exp_l1(&self.0).clamp(0.0, 1.0)
    }
}

fn rising_over_factorial(m: u32, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m as f64 + i as f64) / (i as f64 + 1.0))
}

/// Coefficients ω_0..ω_{k−1} for Laplace argument `s`, with interferers at
/// path losses above `l_last`.
///
/// ω_0 = −s σ²/P − Σ_ν Σ_G p_G ∫ (1 − (1 + t)^{−M_ν}) Λ_ν(dx)
/// ω_j = [j = 1] s σ²/P + Σ_ν (M_ν)_j/j! Σ_G p_G ∫ t^j (1 + t)^{−M_ν−j} Λ_ν(dx)
///
/// with t = sG/(M_ν x).
pub fn interference_coeffs(
    s: f64,
    l_last: f64,
    k: usize,
    params: &SystemParams,
    spec: &QuadratureSpec,
) -> Result<ToeplitzLogCoeffs> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("Laplace argument {s} must be finite and >= 0")));
    }
    if k == 0 {
        return Err(Error::Domain("need at least one coefficient".into()));
    }
    let mut omega = vec![0.0; k];
    let noise = s * params.noise_to_power();
    omega[0] -= noise;
    if k > 1 {
        omega[1] += noise;
    }
    if s == 0.0 {
        return Ok(ToeplitzLogCoeffs(omega));
    }
    let measure = IntensityMeasure::new(params);
    let law = params.gain_law();
    struct StateTerms {
        state: LinkState,
        r0: f64,
        alpha: f64,
        m: u32,
        weights: Vec<f64>,
    }
    let states: Vec<StateTerms> = LinkState::BOTH
        .iter()
        .map(|&state| {
            let m = params.nakagami(state);
            StateTerms {
                state,
                r0: measure.radius(l_last, state),
                alpha: params.alpha(state),
                m,
                weights: (0..k).map(|j| rising_over_factorial(m, j)).collect(),
            }
        })
        .collect();
    let lam2pi = 2.0 * PI * params.bs_density;
    // Radius r = r0/w maps (r0, ∞) onto (0, 1]; x/l_last = w^{−α}.
    let integrand = |w: f64, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        for st in &states {
            let r = st.r0 / w;
            let p = measure.state_probability(r, st.state);
            if p == 0.0 {
                continue;
            }
            let jac = lam2pi * st.r0 * st.r0 / (w * w * w) * p;
            let walpha = w.powf(st.alpha);
            for (g, pg) in law.iter() {
                let t = s * g / (st.m as f64 * l_last) * walpha;
                let base = jac * pg;
                // 1 − (1+t)^{−M} without cancellation for small t.
                let ln1p = t.ln_1p();
                out[0] -= base * -(-(st.m as f64) * ln1p).exp_m1();
                if k > 1 {
                    let ratio = t / (1.0 + t);
                    let mut term = (-(st.m as f64) * ln1p).exp();
                    for j in 1..k {
                        term *= ratio;
                        out[j] += base * st.weights[j] * term;
                    }
                }
            }
        }
    };
    let r = integrate_vec(integrand, 0.0, 1.0, k, spec.rel_tol, spec.abs_tol, spec.max_evals)?;
    for (o, v) in omega.iter_mut().zip(r.value) {
        *o += v;
    }
    Ok(ToeplitzLogCoeffs(omega))
}

/// Coefficients for joint transmission from the N BSs with the smallest path
/// losses `losses` (increasing). Length is M·N with M the serving shape.
pub fn omega_jt(
    losses: &[f64],
    theta: f64,
    params: &SystemParams,
    spec: &QuadratureSpec,
) -> Result<ToeplitzLogCoeffs> {
    let Some(&last) = losses.last() else {
        return Err(Error::Domain("joint transmission needs at least one BS".into()));
    };
    if losses[0] <= 0.0 || losses.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("path losses must be positive and ordered".into()));
    }
    if !(theta >= 0.0) {
        return Err(Error::Domain(format!("threshold {theta} must be >= 0")));
    }
    let m = params.serving_nakagami();
    let inv_sum: f64 = losses.iter().map(|l| 1.0 / l).sum();
    let s = m as f64 * theta / (params.serving_gain * inv_sum);
    interference_coeffs(s, last, m as usize * losses.len(), params, spec)
}

/// Coefficients for the stream served by the BS at path loss `l_n` after the
/// nearer streams have been cancelled. Length is M.
pub fn omega_pt(
    l_n: f64,
    theta: f64,
    params: &SystemParams,
    spec: &QuadratureSpec,
) -> Result<ToeplitzLogCoeffs> {
    if !(l_n > 0.0) {
        return Err(Error::Domain(format!("path loss {l_n} must be > 0")));
    }
    if !(theta >= 0.0) {
        return Err(Error::Domain(format!("threshold {theta} must be >= 0")));
    }
    let m = params.serving_nakagami();
    let s = m as f64 * theta * l_n / params.serving_gain;
    interference_coeffs(s, l_n, m as usize, params, spec)
}
