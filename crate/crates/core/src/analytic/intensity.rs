//! Intensity measure of BS path losses under the LOS/NLOS mixture, and the
//! serving-link densities derived from it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{LinkState, SystemParams};

/// Λ([0, x)) and its derivative for a fixed parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityMeasure {
    pub density: f64,
    pub blockage: f64,
    pub kappa: [f64; 2],
    pub alpha: [f64; 2],
}

fn idx(state: LinkState) -> usize {
    match state {
        LinkState::Los => 0,
        LinkState::Nlos => 1,
    }
}

/// g(y)/y² with g(y) = 1 − e^{−y}(1 + y).
fn los_shape(y: f64) -> f64 {
    if y < 0.5 {
        // Σ_{k≥2} (−1)^k (k−1)/k! y^{k−2}
        let mut sum = 0.0;
        let mut fact = 2.0;
        let mut pow = 1.0;
        for k in 2..24 {
            if k > 2 {
                fact *= k as f64;
                pow *= -y;
            }
            sum += (k - 1) as f64 / fact * pow;
        }
        sum
    } else {
        (-(-y).exp_m1() - y * (-y).exp()) / (y * y)
    }
}

/// ½ − g(y)/y².
fn nlos_shape(y: f64) -> f64 {
    if y < 0.5 {
        let mut sum = 0.0;
        let mut fact = 2.0;
        let mut pow = 1.0;
        for k in 3..26 {
            fact *= k as f64;
            pow *= -y;
            sum -= (k - 1) as f64 / fact * pow;
        }
        sum
    } else {
        0.5 - los_shape(y)
    }
}

impl IntensityMeasure {
    pub fn new(params: &SystemParams) -> Self {
        IntensityMeasure {
            density: params.bs_density,
            blockage: params.blockage,
            kappa: [params.kappa_los, params.kappa_nlos],
            alpha: [params.alpha_los, params.alpha_nlos],
        }
    }

    pub fn radius(&self, x: f64, state: LinkState) -> f64 {
        let i = idx(state);
        (x / self.kappa[i]).powf(1.0 / self.alpha[i])
    }

    /// Probability that a BS at distance `r` is in `state`.
    pub fn state_probability(&self, r: f64, state: LinkState) -> f64 {
        match state {
            LinkState::Los => (-self.blockage * r).exp(),
            LinkState::Nlos => -(-self.blockage * r).exp_m1(),
        }
    }

    /// Contribution of `state` links to Λ([0, x)).
    pub fn state_measure(&self, x: f64, state: LinkState) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let r = self.radius(x, state);
        let y = self.blockage * r;
        let shape = match state {
            LinkState::Los => los_shape(y),
            LinkState::Nlos => nlos_shape(y),
        };
        2.0 * PI * self.density * r * r * shape
    }

    pub fn state_density(&self, x: f64, state: LinkState) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let r = self.radius(x, state);
        2.0 * PI * self.density * r * r * self.state_probability(r, state)
            / (self.alpha[idx(state)] * x)
    }

    pub fn measure(&self, x: f64) -> f64 {
        self.state_measure(x, LinkState::Los) + self.state_measure(x, LinkState::Nlos)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.state_density(x, LinkState::Los) + self.state_density(x, LinkState::Nlos)
    }

    /// The path loss x with Λ([0, x)) = u.
    pub fn inverse(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0 && u.is_finite()) {
            return Err(Error::Domain(format!("intensity level {u} must be finite and >= 0")));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        // Newton on ln Λ against t = ln x, safeguarded by a bracket. ln Λ is
        // close to linear in t, so the iteration converges from far away.
        let target = u.ln();
        let i = idx(LinkState::Los);
        let mut t = (self.kappa[i] * (u / (PI * self.density)).powf(self.alpha[i] / 2.0)).ln();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for _ in 0..200 {
            let x = t.exp();
            let m = self.measure(x);
            let g = m.ln() - target;
            if g.abs() <= 1e-15 {
                return Ok(x);
            }
            if g < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let slope = x * self.derivative(x) / m;
            let mut next = t - g / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => 0.5 * (lo + hi),
                    (true, false) => lo + 2.0,
                    (false, true) => hi - 2.0,
                    (false, false) => unreachable!(),
                };
            }
            if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                return Ok(next.exp());
            }
            t = next;
        }
        Err(Error::Evaluation {
            message: format!("inverting the intensity measure at {u} did not converge"),
            evals: 200,
            error_estimate: (self.measure(t.exp()) / u - 1.0).abs(),
        })
    }
}

pub fn intensity_measure(x: f64, params: &SystemParams) -> f64 {
    IntensityMeasure::new(params).measure(x)
}

pub fn intensity_density(x: f64, params: &SystemParams) -> f64 {
    IntensityMeasure::new(params).derivative(x)
}

fn ln_factorial(n: u32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Density of the n-th smallest path loss.
pub fn nth_pathloss_pdf(x: f64, n: u32, params: &SystemParams) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("rank starts at 1".into()));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("path loss {x} must be > 0")));
    }
    let m = IntensityMeasure::new(params);
    let u = m.measure(x);
    let d = m.derivative(x);
    if d == 0.0 {
        return Ok(0.0);
    }
    let log = (n - 1) as f64 * u.ln() - u - ln_factorial(n - 1);
    Ok(d * log.exp())
}

/// Joint density of the N smallest path losses, given in increasing order.
pub fn joint_pathloss_pdf(losses: &[f64], params: &SystemParams) -> Result<f64> {
    let Some(&last) = losses.last() else {
        return Err(Error::Domain("need at least one path loss".into()));
    };
    if losses[0] <= 0.0 || losses.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Domain("path losses must be positive and ordered".into()));
    }
    let m = IntensityMeasure::new(params);
    let prod: f64 = losses.iter().map(|&l| m.derivative(l)).product();
    Ok(prod * (-m.measure(last)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn params() -> SystemParams {
        SystemParams::table1_companion()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn blockage_free_limit() {
        let mut p = params();
        p.blockage = 1e-9;
        let x = p.kappa_los * 80f64.powf(p.alpha_los);
        let want = PI * p.bs_density * 80.0 * 80.0;
        assert!(rel(intensity_measure(x, &p), want) < 1e-6);
        let d = 2.0 * PI * p.bs_density / (p.alpha_los * p.kappa_los.powf(2.0 / p.alpha_los))
            * x.powf(2.0 / p.alpha_los - 1.0);
        assert!(rel(intensity_density(x, &p), d) < 1e-6);
    }

    #[test]
    fn all_blocked_limit() {
        let mut p = params();
        p.blockage = 1e6;
        let x = p.kappa_nlos * 300f64.powf(p.alpha_nlos);
        let want = PI * p.bs_density * 300.0 * 300.0;
        assert!(rel(intensity_measure(x, &p), want) < 1e-9);
    }

    #[test]
    fn matches_defining_integral() {
        for p in [params(), SystemParams::table1()] {
            let m = IntensityMeasure::new(&p);
            let x = p.kappa_los * 100f64.powf(p.alpha_los);
            let r_l = m.radius(x, LinkState::Los);
            let r_n = m.radius(x, LinkState::Nlos);
            let lam = p.bs_density;
            let b = p.blockage;
            let (los, _) =
                integrate(|v| 2.0 * PI * lam * v * (-b * v).exp(), 0.0, r_l, 1e-13, 0.0, 1 << 20)
                    .unwrap();
            let (nlos, _) = integrate(
                |v| 2.0 * PI * lam * v * (1.0 - (-b * v).exp()),
                0.0,
                r_n,
                1e-13,
                0.0,
                1 << 20,
            )
            .unwrap();
            assert!(rel(m.measure(x), los + nlos) < 1e-10);
        }
    }

    #[test]
    fn series_and_closed_shapes_agree_at_switch() {
        for y in [0.499_999_999f64, 0.5] {
            let direct = (1.0 - (-y).exp() * (1.0 + y)) / (y * y);
            assert!(rel(los_shape(y), direct) < 1e-12);
            assert!(rel(nlos_shape(y), 0.5 - direct) < 1e-10);
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let p = params();
        let m = IntensityMeasure::new(&p);
        for r in [3.0, 30.0, 150.0, 800.0] {
            let x = p.kappa_los * f64::powf(r, p.alpha_los);
            let h = x * 1e-5;
            let fd = (m.measure(x + h) - m.measure(x - h)) / (2.0 * h);
            assert!(rel(m.derivative(x), fd) < 1e-6, "r = {r}");
        }
    }

    #[test]
    fn inverse_round_trips() {
        for p in [params(), SystemParams::table1()] {
            let m = IntensityMeasure::new(&p);
            for u in [1e-8, 1e-3, 0.4, 2.0, 9.0, 40.0, 300.0] {
                let x = m.inverse(u).unwrap();
                assert!(rel(m.measure(x), u) < 1e-12, "u = {u}");
            }
        }
    }

    #[test]
    fn rank_densities_normalize() {
        let p = params();
        let m = IntensityMeasure::new(&p);
        for n in 1..=3u32 {
            // Integrate in t = ln x over a range holding all the mass.
            let lo = m.inverse(1e-12).unwrap().ln();
            let hi = m.inverse(60.0).unwrap().ln();
            let (total, _) = integrate(
                |t| {
                    let x = t.exp();
                    x * nth_pathloss_pdf(x, n, &p).unwrap()
                },
                lo,
                hi,
                1e-10,
                1e-12,
                1 << 20,
            )
            .unwrap();
            assert!((total - 1.0).abs() < 1e-4, "n = {n}: {total}");
        }
    }

    #[test]
    fn rayleigh_form_for_square_law() {
        let mut p = params();
        p.blockage = 1e-9;
        p.alpha_los = 2.0;
        let x = p.kappa_los * 50.0 * 50.0;
        let c = PI * p.bs_density / p.kappa_los;
        for n in 1..=3u32 {
            let fact: f64 = (1..n).map(|k| k as f64).product();
            let want = c.powi(n as i32) * x.powi(n as i32 - 1) * (-c * x).exp() / fact;
            assert!(rel(nth_pathloss_pdf(x, n, &p).unwrap(), want) < 1e-6);
        }
    }

    #[test]
    fn joint_density_consistency() {
        let p = params();
        let m = IntensityMeasure::new(&p);
        let l2 = m.inverse(1.7).unwrap();
        assert!(
            rel(joint_pathloss_pdf(&[l2], &p).unwrap(), nth_pathloss_pdf(l2, 1, &p).unwrap())
                < 1e-14
        );
        let (marg, _) = integrate(
            |t| {
                let l1 = t.exp();
                l1 * joint_pathloss_pdf(&[l1, l2], &p).unwrap()
            },
            m.inverse(1e-12).unwrap().ln(),
            l2.ln(),
            1e-11,
            0.0,
            1 << 20,
        )
        .unwrap();
        assert!(rel(marg, nth_pathloss_pdf(l2, 2, &p).unwrap()) < 1e-6);
        assert!(joint_pathloss_pdf(&[l2, l2 / 2.0], &p).is_err());
    }
}
