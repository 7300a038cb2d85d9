//! Adaptive Gauss–Kronrod integration of vector-valued integrands and a
//! Halton quasi-random sampler.
//!
//! Everything here is deterministic: parallel evaluation only ever fills
//! preallocated slots, and reductions run in a fixed order, so results are
//! bitwise identical for any worker count.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// How ordered-cone integrals over serving path losses are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMethod {
    /// Nested adaptive quadrature up to two serving links, quasi-random above.
    Auto,
    NestedAdaptive,
    QuasiRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    pub method: ConeMethod,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Bound on integrand evaluations for any single adaptive integral.
    pub max_evals: usize,
    /// Outer integrals stop at u = Λ(l) = `truncation`; the omitted tail
    /// carries probability mass e^(−truncation).
    pub truncation: f64,
    /// Halton points for quasi-random cone integrals.
    pub qmc_points: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            method: ConeMethod::Auto,
            rel_tol: 1e-7,
            abs_tol: 1e-10,
            max_evals: 200_000,
            truncation: 40.0,
            qmc_points: 200_000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(invalid("rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(invalid("abs_tol", "must be > 0"));
        }
        if self.max_evals < 15 {
            return Err(invalid("max_evals", "must allow at least one 15-point rule"));
        }
        if !(self.truncation > 0.0 && self.truncation.is_finite()) {
            return Err(invalid("truncation", "must be finite and > 0"));
        }
        if self.qmc_points == 0 {
            return Err(invalid("qmc_points", "must be >= 1"));
        }
        Ok(())
    }

    /// Uses the quasi-random rule for an `n`-dimensional cone?
    pub fn quasi_random_for(&self, n: usize) -> bool {
        match self.method {
            ConeMethod::Auto => n >= 3,
            ConeMethod::NestedAdaptive => false,
            ConeMethod::QuasiRandom => true,
        }
    }
}

// Kronrod 15-point nodes (nonnegative half) and weights, with the embedded
// 7-point Gauss weights at the odd Kronrod indices.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    for i in 0..7 {
        x[2 * i] = c - h * XK[i];
        x[2 * i + 1] = c + h * XK[i];
    }
    x[14] = c;
    x
}

/// Applies the rule to the 15 values laid out as produced by `nodes`.
/// Writes per-component Kronrod values and |Kronrod − Gauss|; returns the
/// largest Kronrod estimate of ∫|f|, which bounds the attainable accuracy.
fn apply_rule(a: f64, b: f64, vals: &[f64], dim: usize, out: &mut [f64], err: &mut [f64]) -> f64 {
    let h = 0.5 * (b - a);
    let mut abs_max: f64 = 0.0;
    for d in 0..dim {
        let at = |k: usize| vals[k * dim + d];
        let mut kr = WK[7] * at(14);
        let mut ga = WG[3] * at(14);
        let mut ab = WK[7] * at(14).abs();
        for i in 0..7 {
            let pair = at(2 * i) + at(2 * i + 1);
            kr += WK[i] * pair;
            ab += WK[i] * (at(2 * i).abs() + at(2 * i + 1).abs());
            if i % 2 == 1 {
                ga += WG[i / 2] * pair;
            }
        }
        out[d] = kr * h;
        err[d] = ((kr - ga) * h).abs();
        abs_max = abs_max.max((ab * h).abs());
    }
    abs_max
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    pub value: Vec<f64>,
    /// Max-norm of the summed per-component error estimates.
    pub error: f64,
    pub evals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: Vec<f64>,
    norm: f64,
    abs: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    // Largest error first; ties to the leftmost panel so the order is total.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.norm
            .total_cmp(&other.norm)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn adaptive_core<E>(
    mut eval15: E,
    a: f64,
    b: f64,
    dim: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<Integral>
where
    E: FnMut(&[f64; 15], &mut [f64]),
{
    let mut vals = vec![0.0; 15 * dim];
    let mut make = |a: f64, b: f64, vals: &mut Vec<f64>| {
        eval15(&nodes(a, b), vals);
        let mut value = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        let abs = apply_rule(a, b, vals, dim, &mut value, &mut err);
        let norm = err.iter().cloned().fold(0.0, f64::max);
        Piece {
            a,
            b,
            value,
            err,
            norm,
            abs,
        }
    };
    let mut heap = std::collections::BinaryHeap::new();
    heap.push(make(a, b, &mut vals));
    let mut evals = 15;
    let totals = |heap: &std::collections::BinaryHeap<Piece>| {
        let mut total = vec![0.0; dim];
        let mut total_err = vec![0.0; dim];
        let mut total_abs = 0.0;
        for p in heap.iter() {
            total_abs += p.abs;
            for d in 0..dim {
                total[d] += p.value[d];
                total_err[d] += p.err[d];
            }
        }
        (total, total_err, total_abs)
    };
    // Running sums drive the stopping test; the reported value is re-summed.
    let (mut total, mut total_err, mut total_abs) = totals(&heap);
    loop {
        let scale = total.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let err = total_err.iter().cloned().fold(0.0, f64::max);
        if !total.iter().all(|v| v.is_finite()) {
            return Err(Error::Evaluation {
                message: "non-finite integrand".into(),
                evals,
                error_estimate: err,
            });
        }
        let roundoff = 50.0 * f64::EPSILON * total_abs;
        if err <= abs_tol.max(rel_tol * scale).max(roundoff) {
            // Deterministic final sum in panel order.
            let mut pieces = heap.into_vec();
            pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
            let mut value = vec![0.0; dim];
            for p in &pieces {
                for d in 0..dim {
                    value[d] += p.value[d];
                }
            }
            return Ok(Integral {
                value,
                error: err,
                evals,
            });
        }
        if evals + 30 > max_evals {
            return Err(Error::Evaluation {
                message: format!("adaptive quadrature on [{a}, {b}] hit the evaluation budget"),
                evals,
                error_estimate: err,
            });
        }
        let p = heap.pop().expect("at least one panel");
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::Evaluation {
                message: format!("interval around {mid} cannot be bisected further"),
                evals,
                error_estimate: err,
            });
        }
        let left = make(p.a, mid, &mut vals);
        let right = make(mid, p.b, &mut vals);
        for d in 0..dim {
            total[d] += left.value[d] + right.value[d] - p.value[d];
            total_err[d] += left.err[d] + right.err[d] - p.err[d];
        }
        total_abs += left.abs + right.abs - p.abs;
        heap.push(left);
        heap.push(right);
        evals += 30;
        if heap.len() % 512 == 0 {
            (total, total_err, total_abs) = totals(&heap);
        }
    }
}

/// Integrates a `dim`-component integrand over [a, b].
///
/// `f(x, out)` writes the integrand components at `x` into `out`.
pub fn integrate_vec<F>(
    mut f: F,
    a: f64,
    b: f64,
    dim: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<Integral>
where
    F: FnMut(f64, &mut [f64]),
{
    adaptive_core(
        |xs, vals| {
            for (k, &x) in xs.iter().enumerate() {
                f(x, &mut vals[k * dim..(k + 1) * dim]);
            }
        },
        a,
        b,
        dim,
        rel_tol,
        abs_tol,
        max_evals,
    )
}

/// Like [`integrate_vec`], evaluating the 15 nodes of each panel in parallel.
pub fn integrate_vec_par<F>(
    f: F,
    a: f64,
    b: f64,
    dim: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_evals: usize,
) -> Result<Integral>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    adaptive_core(
        |xs, vals| {
            vals.par_chunks_mut(dim)
                .zip(xs.par_iter())
                .for_each(|(out, &x)| f(x, out));
        },
        a,
        b,
        dim,
        rel_tol,
        abs_tol,
        max_evals,
    )
}

/// Scalar adaptive integral; returns (value, error estimate).
pub fn integrate<F>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64, max_evals: usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let r = integrate_vec(|x, out| out[0] = f(x), a, b, 1, rel_tol, abs_tol, max_evals)?;
    Ok((r.value[0], r.error))
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Largest dimension supported by [`halton`].
pub const HALTON_MAX_DIM: usize = PRIMES.len();

/// Radical inverse of `index` in base `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += (index % b) as f64 * f;
        index /= b;
        f *= inv;
    }
    r
}

/// The `index`-th Halton point in `point.len()` dimensions (index 0 is skipped
/// so no coordinate is exactly zero).
pub fn halton(index: u64, point: &mut [f64]) {
    for (d, x) in point.iter_mut().enumerate() {
        *x = radical_inverse(index + 1, PRIMES[d]);
    }
}

const QMC_CHUNK: usize = 4096;

/// Mean of a `dim_out`-component integrand over the first `points` Halton
/// points of the unit cube [0,1)^`dim_in`.
pub fn qmc_mean<F>(f: F, dim_in: usize, dim_out: usize, points: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    if dim_in == 0 || dim_in > HALTON_MAX_DIM {
        return Err(Error::UnsupportedRegime(format!(
            "quasi-random rule supports 1..={HALTON_MAX_DIM} dimensions, got {dim_in}"
        )));
    }
    let chunks = points.div_ceil(QMC_CHUNK);
    let partial: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; dim_out];
            let mut u = vec![0.0; dim_in];
            let mut out = vec![0.0; dim_out];
            let end = ((c + 1) * QMC_CHUNK).min(points);
            for i in c * QMC_CHUNK..end {
                halton(i as u64, &mut u);
                f(&u, &mut out);
                for (a, o) in acc.iter_mut().zip(&out) {
                    *a += o;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; dim_out];
    for p in &partial {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    for t in &mut total {
        *t /= points as f64;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let (v, _) = integrate(|x| x.powi(5) - 2.0 * x, -1.0, 2.0, 1e-12, 1e-14, 1000).unwrap();
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let (v, _) = integrate(|x| x.powf(-0.5), 0.0, 1.0, 1e-10, 1e-12, 100_000).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn vector_components_share_the_mesh() {
        let r = integrate_vec(
            |x, out| {
                out[0] = x.exp();
                out[1] = x.sin();
            },
            0.0,
            3.0,
            2,
            1e-12,
            1e-14,
            10_000,
        )
        .unwrap();
        assert!((r.value[0] - (3f64.exp() - 1.0)).abs() < 1e-11);
        assert!((r.value[1] - (1.0 - 3f64.cos())).abs() < 1e-11);
    }

    #[test]
    fn parallel_matches_sequential_bitwise() {
        let f = |x: f64, out: &mut [f64]| out[0] = (10.0 * x).sin() / (1.0 + x * x);
        let a = integrate_vec(f, 0.0, 5.0, 1, 1e-10, 1e-14, 100_000).unwrap();
        let b = integrate_vec_par(f, 0.0, 5.0, 1, 1e-10, 1e-14, 100_000).unwrap();
        assert_eq!(a.value[0].to_bits(), b.value[0].to_bits());
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let e = integrate(|x| (1.0 / x).sin(), 1e-9, 1.0, 1e-14, 1e-16, 300).unwrap_err();
        assert!(matches!(e, Error::Evaluation { .. }));
    }

    #[test]
    fn halton_first_points() {
        let mut p = [0.0; 2];
        halton(0, &mut p);
        assert_eq!(p, [0.5, 1.0 / 3.0]);
        halton(2, &mut p);
        assert_eq!(p, [0.75, 1.0 / 9.0]);
    }

    #[test]
    fn qmc_integrates_a_product() {
        let m = qmc_mean(|u, out| out[0] = u[0] * u[1] * u[2], 3, 1, 50_000).unwrap();
        assert!((m[0] - 0.125).abs() < 1e-4);
    }
}
