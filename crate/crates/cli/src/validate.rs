//! Oracle and property checks runnable from the command line.

use mmcache_core::analytic::{stp_pt_at, stp_pt_smallbeta, StrategyValues};
use mmcache_core::optimizer::{
    build_instance, exhaustive_oracle, greedy_mckp, optimal_slope_partition, slope_by_sorting, Mode,
};
use mmcache_core::quadrature::QuadratureSpec;
use mmcache_core::special::gauss_2f1;
use mmcache_core::toeplitz::toeplitz_exp_column;
use mmcache_core::{sinr_threshold, zipf_popularity, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn mckp_corpus(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 1.0;
    let mut agree = true;
    for _ in 0..200 {
        let f = rng.random_range(1..=8usize);
        let n = rng.random_range(1..=3u32);
        let pop = zipf_popularity(f, rng.random_range(0.0..1.5))?;
        let values = StrategyValues {
            joint: rng.random_range(0.0..1.0),
            parallel: (2..=n).map(|_| rng.random_range(0.0..1.0)).collect(),
            uncached: 0.0,
        };
        let inst = build_instance(&pop, &values, rng.random_range(1..=f as u32), n, Mode::Stp)?;
        let g = greedy_mckp(&inst)?.profit;
        let opt = exhaustive_oracle(&inst)?.profit;
        if opt > 0.0 {
            worst = worst.min(g / opt);
        }
        agree &= optimal_slope_partition(&inst)? == slope_by_sorting(&inst)?;
    }
    Ok(check(
        "greedy knapsack within half of the optimum, partition equals sort",
        worst >= 0.5 && agree,
        format!("worst ratio {worst:.6} over 200 instances, partition/sort agree: {agree}"),
    ))
}

/// exp(A) by scaling and squaring a truncated Taylor series.
fn dense_expm(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = a.len();
    let norm = a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = norm.max(1.0).log2().ceil() as i32 + 1;
    let scale = 2f64.powi(-squarings);
    let mul = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        let mut z = vec![vec![0.0; k]; k];
        for i in 0..k {
            for l in 0..k {
                for j in 0..k {
                    z[i][j] += x[i][l] * y[l][j];
                }
            }
        }
        z
    };
    let s: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v * scale).collect()).collect();
    let mut term: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| (i == j) as u8 as f64).collect()).collect();
    let mut sum = term.clone();
    for n in 1..40 {
        term = mul(&term, &s);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= n as f64;
            }
        }
        for i in 0..k {
            for j in 0..k {
                sum[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        sum = mul(&sum, &sum);
    }
    sum
}

fn toeplitz(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for k in 1..=12 {
        let omega: Vec<f64> = (0..k)
            .map(|j| if j == 0 { -rng.random_range(0.0..3.0) } else { rng.random_range(0.0..1.0) })
            .collect();
        let a: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| if j <= i { omega[i - j] } else { 0.0 }).collect())
            .collect();
        let dense = dense_expm(&a);
        for (i, x) in toeplitz_exp_column(&omega).iter().enumerate() {
            worst = worst.max((x - dense[i][0]).abs());
        }
    }
    check(
        "Toeplitz exponential matches a dense matrix exponential",
        worst <= 1e-10,
        format!("max abs error {worst:.3e} for dimensions 1..=12"),
    )
}

fn hypergeometric() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for alpha in [2.1, 3.0, 4.0] {
        let d = 2.0 / alpha;
        for z in [-0.5, -0.3, -0.1, 0.2, 0.45] {
            let (a, b, c) = (-d, 1.0, 1.0 - d);
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 0..2000 {
                let k = k as f64;
                term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
                sum += term;
                if term.abs() < 1e-18 {
                    break;
                }
            }
            worst = worst.max((gauss_2f1(a, b, c, z)? - sum).abs());
        }
    }
    Ok(check(
        "2F1 matches its power series",
        worst <= 1e-10,
        format!("max abs error {worst:.3e}"),
    ))
}

fn ladder() -> Result<Check> {
    let mut p = SystemParams::table1();
    p.blockage = 1e-9;
    p.alpha_los = 4.0;
    p.alpha_nlos = 4.0;
    p.nakagami_los = 1;
    p.nakagami_nlos = 1;
    p.noise_power = 0.0;
    p.mainlobe_gain = 1.0;
    p.sidelobe_gain = 1.0;
    p.serving_gain = 1.0;
    let spec = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    for parts in 1..=3 {
        let theta = sinr_threshold(p.slot_length * p.bandwidth, p.slot_length, p.bandwidth, parts)?;
        let general = stp_pt_at(&p, parts, theta, &spec)?;
        let closed = stp_pt_smallbeta(parts, 1.0, 4.0)?;
        worst = worst.max((general - closed).abs());
    }
    Ok(check(
        "general parallel STP reduces to the blockage-free closed form",
        worst <= 1e-2,
        format!("max abs gap {worst:.3e} for 1..=3 subfiles"),
    ))
}

/// Runs every check; errors inside a check count as failures.
pub fn run_checks(seed: u64) -> Vec<Check> {
    let failed = |name: &'static str, e: crate::error::CliError| check(name, false, e.to_string());
    vec![
        mckp_corpus(seed).unwrap_or_else(|e| failed("greedy knapsack", e)),
        toeplitz(seed),
        hypergeometric().unwrap_or_else(|e| failed("2F1", e)),
        ladder().unwrap_or_else(|e| failed("closed-form ladder", e)),
    ]
}
