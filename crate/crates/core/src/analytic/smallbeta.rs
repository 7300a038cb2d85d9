//! Closed forms in the blockage-free, Rayleigh, interference-limited limit.
//!
//! With β → 0, M = 1 and σ² = 0 the intensity is πλ(x/κ)^{2/α}, so in the
//! scale u = Λ(l) every interference integral becomes a Gauss hypergeometric
//! function of the threshold alone.

use crate::analytic::cone::cone_expectation;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::special::gauss_2f1;
use crate::toeplitz::toeplitz_exp_l1;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::UnsupportedRegime(format!(
            "closed forms need a LOS path-loss exponent above 2, got {alpha}"
        )))
    }
}

/// ₂F₁(−2/α, 1; 1 − 2/α; −θ): one plus the normalized interference
/// functional, ∫_1^∞ θ/(v^{α/2} + θ) dv = F − 1.
pub fn interference_factor(theta: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let d = 2.0 / alpha;
    gauss_2f1(-d, 1.0, 1.0 - d, -theta)
}

/// STP of a file split into `parts` subfiles with spectral load
/// S/(T·W) bits/s/Hz: F(θ_parts)^{−parts(parts+1)/2}.
pub fn stp_pt_smallbeta(parts: u32, spectral_load: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if parts == 0 {
        return Err(Error::Domain("a file needs at least one part".into()));
    }
    if !(spectral_load >= 0.0) {
        return Err(Error::Domain(format!("spectral load {spectral_load} must be >= 0")));
    }
    let theta = (spectral_load / parts as f64 * std::f64::consts::LN_2).exp_m1();
    let f = interference_factor(theta, alpha)?;
    let exponent = parts as f64 * (parts as f64 + 1.0) / 2.0;
    Ok(f.powf(-exponent))
}

/// Toeplitz coefficients of N-BS joint transmission conditional on the
/// intensity-scale serving losses `u` (increasing).
pub fn smallbeta_jt_coeffs(u: &[f64], theta: f64, alpha: f64) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let Some(&un) = u.last() else {
        return Err(Error::Domain("need at least one serving link".into()));
    };
    let d = 2.0 / alpha;
    let half = alpha / 2.0;
    let c = theta / u.iter().map(|&ui| (un / ui).powf(half)).sum::<f64>();
    let mut omega = Vec::with_capacity(u.len());
    omega.push(-un * (gauss_2f1(-d, 1.0, 1.0 - d, -c)? - 1.0));
    for j in 1..u.len() {
        let jf = j as f64;
        let f = gauss_2f1(jf + 1.0, jf - d, jf + 1.0 - d, -c)?;
        omega.push(un * c.powi(j as i32) * 2.0 / (jf * alpha - 2.0) * f);
    }
    Ok(omega)
}

/// STP of N-BS joint transmission in the limit, integrated over the ordered
/// cone of intensity-scale serving losses.
pub fn stp_jt_smallbeta(n: u32, theta: f64, alpha: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::Domain("need at least one serving link".into()));
    }
    if theta == 0.0 {
        return Ok(1.0);
    }
    let v = cone_expectation(n as usize, 1, spec, |u, out| {
        let omega = smallbeta_jt_coeffs(u, theta, alpha)?;
        out[0] = toeplitz_exp_l1(&omega).clamp(0.0, 1.0);
        Ok(())
    })?;
    Ok(v[0].clamp(0.0, 1.0))
}
