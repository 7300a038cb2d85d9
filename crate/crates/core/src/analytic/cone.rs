//! Expectations over the smallest path losses, written in the intensity
//! scale u = Λ(l).
//!
//! In that scale the N smallest path losses are the first N arrival times of
//! a unit-rate Poisson process on the line: the joint density is e^{−u_N} on
//! 0 < u_1 < … < u_N, and u_n alone is Gamma(n, 1).

use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec, integrate_vec_par, qmc_mean, QuadratureSpec};

/// Collects the first error raised inside an integrand that cannot return
/// one directly.
struct ErrorSlot(Mutex<Option<Error>>);

impl ErrorSlot {
    fn new() -> Self {
        ErrorSlot(Mutex::new(None))
    }

    fn fill(&self, out: &mut [f64], r: Result<()>) {
        if let Err(e) = r {
            out.iter_mut().for_each(|v| *v = f64::NAN);
            let mut slot = self.0.lock().unwrap_or_else(|p| p.into_inner());
            slot.get_or_insert(e);
        }
    }

    fn finish<T>(self, r: Result<T>) -> Result<T> {
        match self.0.into_inner().unwrap_or_else(|p| p.into_inner()) {
            Some(e) => Err(e),
            None => r,
        }
    }
}

fn exp_arrival(v: f64) -> f64 {
    -(-v).ln_1p()
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// E[f(u)] for u ~ Gamma(n, 1).
pub fn gamma_expectation<F>(n: usize, dim: usize, spec: &QuadratureSpec, f: F) -> Result<Vec<f64>>
where
    F: Fn(f64, &mut [f64]) -> Result<()> + Sync,
{
    let slot = ErrorSlot::new();
    let v_max = -(-spec.truncation).exp_m1();
    let ln_norm = ln_factorial(n - 1);
    let r = integrate_vec_par(
        |v, out| {
            let u = exp_arrival(v);
            let r = f(u, out);
            let w = if n == 1 { 1.0 } else { ((n - 1) as f64 * u.ln() - ln_norm).exp() };
            out.iter_mut().for_each(|o| *o *= w);
            slot.fill(out, r);
        },
        0.0,
        v_max,
        dim,
        spec.rel_tol,
        spec.abs_tol,
        spec.max_evals,
    );
    slot.finish(r).map(|i| i.value)
}

/// ∫ f(u) e^{−u_N} du over the ordered cone 0 < u_1 < … < u_N.
pub fn cone_expectation<F>(n: usize, dim: usize, spec: &QuadratureSpec, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync,
{
    match n {
        0 => Err(Error::Domain("cone dimension must be >= 1".into())),
        _ if spec.quasi_random_for(n) => cone_qmc(n, dim, spec, f),
        1 => gamma_expectation(1, dim, spec, |u, out| f(&[u], out)),
        2 => cone_nested2(dim, spec, f),
        _ => Err(Error::UnsupportedRegime(format!(
            "nested quadrature is implemented up to two serving links, got {n}"
        ))),
    }
}

fn cone_nested2<F>(dim: usize, spec: &QuadratureSpec, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync,
{
    let slot = ErrorSlot::new();
    let v_max = -(-spec.truncation).exp_m1();
    let r = integrate_vec_par(
        |v, out| {
            let u2 = exp_arrival(v);
            let inner = integrate_vec(
                |w, o| {
                    let r = f(&[u2 * w, u2], o);
                    slot.fill(o, r);
                },
                0.0,
                1.0,
                dim,
                spec.rel_tol,
                spec.abs_tol,
                spec.max_evals,
            );
            match inner {
                Ok(i) => {
                    for (o, v) in out.iter_mut().zip(&i.value) {
                        *o = u2 * v;
                    }
                }
                Err(e) => slot.fill(out, Err(e)),
            }
        },
        0.0,
        v_max,
        dim,
        spec.rel_tol,
        spec.abs_tol,
        spec.max_evals,
    );
    slot.finish(r).map(|i| i.value)
}

fn cone_qmc<F>(n: usize, dim: usize, spec: &QuadratureSpec, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) -> Result<()> + Sync,
{
    let slot = ErrorSlot::new();
    let r = qmc_mean(
        |v, out| {
            let mut u = [0.0; crate::quadrature::HALTON_MAX_DIM];
            let mut acc = 0.0;
            for (k, &vk) in v.iter().enumerate() {
                acc += exp_arrival(vk);
                u[k] = acc;
            }
            let r = f(&u[..n], out);
            slot.fill(out, r);
        },
        n,
        dim,
        spec.qmc_points,
    );
    slot.finish(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            ..QuadratureSpec::default()
        }
    }

    #[test]
    fn gamma_moments() {
        for n in 1..=4usize {
            let m = gamma_expectation(n, 2, &spec(), |u, out| {
                out[0] = 1.0;
                out[1] = u;
                Ok(())
            })
            .unwrap();
            assert!((m[0] - 1.0).abs() < 1e-9, "n = {n}: {}", m[0]);
            assert!((m[1] - n as f64).abs() < 1e-8, "n = {n}: {}", m[1]);
        }
    }

    #[test]
    fn cone_volume_and_means() {
        for (n, method) in [
            (1, crate::quadrature::ConeMethod::Auto),
            (2, crate::quadrature::ConeMethod::Auto),
            (2, crate::quadrature::ConeMethod::QuasiRandom),
            (3, crate::quadrature::ConeMethod::Auto),
        ] {
            let s = QuadratureSpec {
                method,
                ..spec()
            };
            let m = cone_expectation(n, 2, &s, |u, out| {
                out[0] = 1.0;
                out[1] = u[0];
                Ok(())
            })
            .unwrap();
            let tol = if s.quasi_random_for(n) { 1e-3 } else { 1e-9 };
            assert!((m[0] - 1.0).abs() < tol, "n = {n}");
            assert!((m[1] - 1.0).abs() < tol, "n = {n}: E[u_1] = {}", m[1]);
        }
    }

    #[test]
    fn errors_propagate_out_of_integrands() {
        let e = cone_expectation(2, 1, &spec(), |_, _| Err(Error::Domain("boom".into())));
        assert_eq!(e, Err(Error::Domain("boom".into())));
    }
}
