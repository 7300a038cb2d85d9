//! Gauss hypergeometric function on the real line left of 1.

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

const MAX_SERIES_TERMS: usize = 400_000;

/// 1/Γ(x), zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x.fract() == 0.0 {
        return 0.0;
    }
    let g = gamma(x);
    if g.is_infinite() {
        0.0
    } else {
        1.0 / g
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

fn near_integer(x: f64) -> bool {
    (x - x.round()).abs() < 1e-9
}

/// ₂F₁(a, b; c; z) for real z < 1.
///
/// Uses the power series for z ∈ [−½, 0.9], a Pfaff transformation to bring
/// z < −½ into (⅓, 1), and the 1 − z connection formula once the argument
/// is above 0.9. When that formula is degenerate (c − a − b an integer) the
/// series is summed directly, which still converges for argument < 1.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if ![a, b, c, z].iter().all(|v| v.is_finite()) {
        return Err(Error::Domain(format!("non-finite argument to 2F1({a}, {b}; {c}; {z})")));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!("2F1 has a pole at c = {c}")));
    }
    if z >= 1.0 {
        return Err(Error::Domain(format!("2F1 argument {z} is outside z < 1")));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return series(a, b, c, z);
    }
    if z < -0.5 {
        let w = z / (z - 1.0);
        // Pick the Pfaff variant that keeps the parameter pair smaller in
        // magnitude; both give the same value.
        let (p, q, pre) = if a.abs() <= b.abs() {
            (a, c - b, (1.0 - z).powf(-a))
        } else {
            (b, c - a, (1.0 - z).powf(-b))
        };
        return Ok(pre * near_one(p, q, c, w)?);
    }
    near_one(a, b, c, z)
}

fn near_one(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if z <= 0.9 || is_nonpositive_integer(a) || is_nonpositive_integer(b) {
        return series(a, b, c, z);
    }
    let d = c - a - b;
    if near_integer(d) {
        return series(a, b, c, z);
    }
    let y = 1.0 - z;
    let g_c = gamma(c);
    let t1 = g_c * gamma(d) * rgamma(c - a) * rgamma(c - b);
    let t2 = g_c * gamma(-d) * rgamma(a) * rgamma(b);
    let f1 = if t1 == 0.0 { 0.0 } else { series(a, b, 1.0 - d, y)? };
    let f2 = if t2 == 0.0 { 0.0 } else { series(c - a, c - b, d + 1.0, y)? };
    Ok(t1 * f1 + t2 * y.powf(d) * f2)
}

fn series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut small = 0;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        if term == 0.0 {
            return Ok(sum);
        }
        // Kahan summation keeps long alternating tails accurate.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if term.abs() <= 1e-17 * sum.abs() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Evaluation {
        message: format!("2F1({a}, {b}; {c}; {z}) series did not converge"),
        evals: MAX_SERIES_TERMS,
        error_estimate: (term / sum).abs(),
    })
}
