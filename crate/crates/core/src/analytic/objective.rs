//! Popularity-weighted objectives of a caching vector.

use crate::error::{Error, Result};
use crate::model::CachingVector;

/// Per-strategy values of one metric (STP or delay).
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyValues {
    /// Whole file, joint transmission (status 1).
    pub joint: f64,
    /// Status 2..=N, in order.
    pub parallel: Vec<f64>,
    /// Not cached (status 0).
    pub uncached: f64,
}

impl StrategyValues {
    pub fn max_parts(&self) -> u32 {
        1 + self.parallel.len() as u32
    }

    pub fn get(&self, status: u32) -> Result<f64> {
        match status {
            0 => Ok(self.uncached),
            1 => Ok(self.joint),
            n => self
                .parallel
                .get(n as usize - 2)
                .copied()
                .ok_or_else(|| Error::MissingValue(format!("no value for {n} subfiles"))),
        }
    }
}

fn weighted(s: &CachingVector, popularity: &[f64], value: impl Fn(u32) -> Result<f64>) -> Result<f64> {
    if s.len() != popularity.len() {
        return Err(Error::Shape {
            expected: popularity.len(),
            got: s.len(),
        });
    }
    let mut total = 0.0;
    for (&st, &p) in s.statuses().iter().zip(popularity) {
        total += p * value(st)?;
    }
    Ok(total)
}

/// Σ_f p_f · STP(s_f); uncached files contribute nothing.
pub fn objective_stp(s: &CachingVector, popularity: &[f64], stp: &StrategyValues) -> Result<f64> {
    weighted(s, popularity, |st| if st == 0 { Ok(0.0) } else { stp.get(st) })
}

/// Σ_f p_f · D(s_f), uncached files paying the backhaul delay.
pub fn objective_delay(s: &CachingVector, popularity: &[f64], delay: &StrategyValues) -> Result<f64> {
    weighted(s, popularity, |st| delay.get(st))
}
