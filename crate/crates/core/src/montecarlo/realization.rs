//! Sampled BS layouts.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::analytic::IntensityMeasure;
use crate::error::{invalid, Error, Result};
use crate::model::{LinkState, SystemParams};

/// Probability that a serving link of the requested rank falls outside the
/// window, split evenly between the path-loss tail and far LOS links.
pub const WINDOW_MISS: f64 = 1e-4;

/// Smallest mean BS count of a window, so that truncated interference stays
/// small even when the serving links are close.
pub const MIN_WINDOW_STATIONS: f64 = 400.0;

/// One BS as seen from the typical user at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseStation {
    pub position: [f64; 2],
    pub distance: f64,
    pub state: LinkState,
    pub path_loss: f64,
    /// Antenna gain toward the user when this BS interferes.
    pub interferer_gain: f64,
}

/// One PPP layout inside a disk, BSs sorted by increasing path loss.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub stations: Vec<BaseStation>,
    pub radius: f64,
    pub seed: u64,
}

impl NetworkRealization {
    pub fn len(&self) -> usize {
        self.stations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stations.is_empty()
    }
}

/// Draws a layout inside the disk of radius `radius` from `rng`.
pub fn sample_with<R: Rng + ?Sized>(
    params: &SystemParams,
    radius: f64,
    seed: u64,
    rng: &mut R,
) -> Result<NetworkRealization> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("window_radius", format!("must be finite and > 0, got {radius}")));
    }
    let mean = params.bs_density * PI * radius * radius;
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| invalid("bs_density", e.to_string()))?
            .sample(rng) as usize
    } else {
        0
    };
    let law = params.gain_law();
    let p_main = law.probabilities[0];
    let mut stations = Vec::with_capacity(count);
    for _ in 0..count {
        let d = radius * rng.random::<f64>().sqrt();
        let phi = 2.0 * PI * rng.random::<f64>();
        let state = if rng.random::<f64>() < params.state_probability(d, LinkState::Los) {
            LinkState::Los
        } else {
            LinkState::Nlos
        };
        let gain = if rng.random::<f64>() < p_main {
            law.values[0]
        } else {
            law.values[1]
        };
        stations.push(BaseStation {
            position: [d * phi.cos(), d * phi.sin()],
            distance: d,
            state,
            path_loss: params.kappa(state) * d.powf(params.alpha(state)),
            interferer_gain: gain,
        });
    }
    stations.sort_by(|a, b| a.path_loss.total_cmp(&b.path_loss));
    Ok(NetworkRealization {
        stations,
        radius,
        seed,
    })
}

/// Draws a layout; the same seed gives the same layout.
pub fn sample_realization(params: &SystemParams, radius: f64, seed: u64) -> Result<NetworkRealization> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(params, radius, seed, &mut rng)
}

/// P(Gamma(n, 1) > u).
fn gamma_tail(n: u32, u: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..n {
        term *= u / k as f64;
        sum += term;
    }
    (-u).exp() * sum
}

/// Expected number of LOS BSs beyond distance `r`.
fn los_beyond(params: &SystemParams, r: f64) -> f64 {
    let b = params.blockage;
    2.0 * PI * params.bs_density * (-b * r).exp() * (r / b + 1.0 / (b * b))
}

/// Window radius for simulating `rank` serving links.
///
/// The rank-`rank` path loss stays below x* except with probability
/// WINDOW_MISS/2, and LOS BSs beyond the window with loss under x* are
/// expected at most WINDOW_MISS/2 times.
pub fn window_radius(params: &SystemParams, rank: u32) -> Result<f64> {
    params.validate()?;
    if rank == 0 {
        return Err(Error::Domain("rank starts at 1".into()));
    }
    let target = 0.5 * WINDOW_MISS;
    let (mut lo, mut hi) = (0.0, 1.0);
    while gamma_tail(rank, hi) > target {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if gamma_tail(rank, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = IntensityMeasure::new(params).inverse(hi)?;
    let r_nlos = params.radius_for_loss(x, LinkState::Nlos);
    let r_los_all = params.radius_for_loss(x, LinkState::Los);
    let r_los = if params.blockage > 0.0 && los_beyond(params, r_los_all) < target {
        let (mut a, mut b) = (0.0, r_los_all);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if los_beyond(params, mid) > target {
                a = mid;
            } else {
                b = mid;
            }
        }
        b
    } else {
        r_los_all
    };
    let r_count = (MIN_WINDOW_STATIONS / (PI * params.bs_density)).sqrt();
    Ok(r_nlos.max(r_los).max(r_count))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_when_density_vanishes() {
        let mut p = SystemParams::table1();
        let r = 100.0;
        p.bs_density = 1e-6 / (PI * r * r);
        let empty = (0..100).filter(|&s| sample_realization(&p, r, s).unwrap().is_empty()).count();
        assert!(empty >= 99);
    }

    #[test]
    fn sorted_and_inside() {
        let p = SystemParams::table1();
        let g = sample_realization(&p, 800.0, 3).unwrap();
        assert!(!g.is_empty());
        assert!(g.stations.windows(2).all(|w| w[0].path_loss <= w[1].path_loss));
        for b in &g.stations {
            assert!(b.distance <= 800.0);
            let r = (b.position[0].powi(2) + b.position[1].powi(2)).sqrt();
            assert!((r - b.distance).abs() < 1e-9);
            assert_eq!(b.path_loss, p.kappa(b.state) * b.distance.powf(p.alpha(b.state)));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let p = SystemParams::table1();
        assert_eq!(sample_realization(&p, 500.0, 9).unwrap(), sample_realization(&p, 500.0, 9).unwrap());
        assert_ne!(sample_realization(&p, 500.0, 9).unwrap(), sample_realization(&p, 500.0, 10).unwrap());
    }

    #[test]
    fn gamma_tail_small_cases() {
        assert!((gamma_tail(1, 2.0) - (-2.0f64).exp()).abs() < 1e-16);
        assert!((gamma_tail(2, 2.0) - 3.0 * (-2.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn window_grows_with_rank() {
        let p = SystemParams::table1();
        let r1 = window_radius(&p, 1).unwrap();
        let r3 = window_radius(&p, 3).unwrap();
        assert!(r3 >= r1);
        assert!(PI * p.bs_density * r1 * r1 >= MIN_WINDOW_STATIONS * (1.0 - 1e-12));
        assert!(los_beyond(&p, r3) <= WINDOW_MISS);
    }
}
