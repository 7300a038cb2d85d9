//! Reference placements and the small-file closed form.

use std::f64::consts::LN_2;

use crate::error::{invalid, Error, Result};
use crate::model::CachingVector;

fn check_cache(popularity: &[f64], cache_size: u32) -> Result<()> {
    if popularity.is_empty() {
        return Err(Error::InvalidCatalog("no files".into()));
    }
    if cache_size == 0 || cache_size as usize > popularity.len() {
        return Err(invalid(
            "cache_size",
            format!("must lie in 1..={}, got {cache_size}", popularity.len()),
        ));
    }
    Ok(())
}

/// Most popular caching: the C most popular files, whole.
pub fn baseline_mpc(popularity: &[f64], cache_size: u32) -> Result<CachingVector> {
    check_cache(popularity, cache_size)?;
    let c = cache_size as usize;
    Ok(CachingVector(
        (0..popularity.len()).map(|f| (f < c) as u32).collect(),
    ))
}

/// Largest diversity caching: the most popular files, all split into the
/// same number of parts s, the smallest s ≤ N with s·C ≥ F (N when none
/// reaches the catalog).
pub fn baseline_ldc(popularity: &[f64], cache_size: u32, max_parts: u32) -> Result<CachingVector> {
    check_cache(popularity, cache_size)?;
    if max_parts == 0 {
        return Err(invalid("sic_capability", "must be >= 1"));
    }
    let f_total = popularity.len();
    let c = cache_size as usize;
    let parts = (1..=max_parts).find(|&s| s as usize * c >= f_total).unwrap_or(max_parts);
    let cached = (parts as usize * c).min(f_total);
    Ok(CachingVector(
        (0..f_total).map(|f| if f < cached { parts } else { 0 }).collect(),
    ))
}

/// Best placement in the small-file limit.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallFileSolution {
    /// F_c: number of most popular files cached whole.
    pub whole_files: u32,
    pub vector: CachingVector,
    /// First-order STP objective of `vector`.
    pub objective: f64,
    /// Largest file size, bits, for which the closed form is optimal.
    pub size_bound: f64,
}

/// First-order STP of caching the `whole_files` most popular files whole and
/// the next (C − F_c)·N split into N parts, with k = S ln 2/(T W (α − 2)).
///
/// To first order in k a whole file loses 2k of STP when served by one BS
/// and nothing when several cooperate; an N-part file loses (N + 1)k.
pub fn smallfile_objective(popularity: &[f64], whole_files: u32, cache_size: u32, max_parts: u32, k: f64) -> f64 {
    let fc = whole_files as usize;
    let last = (fc + (cache_size - whole_files) as usize * max_parts as usize).min(popularity.len());
    let joint_loss = if max_parts == 1 { 2.0 } else { 0.0 };
    let whole: f64 = popularity[..fc].iter().sum();
    let split: f64 = popularity[fc..last].iter().sum();
    whole * (1.0 - joint_loss * k) + split * (1.0 - (max_parts as f64 + 1.0) * k)
}

fn regime_limit(popularity: &[f64], cache_size: u32, max_parts: u32) -> f64 {
    let n = max_parts as f64;
    let mut limit = 1.0 / (n + 1.0);
    if max_parts >= 3 {
        for fc in 0..cache_size as usize {
            let last = fc + (cache_size as usize - fc) * max_parts as usize;
            let p_last = popularity[last - 1];
            let p_next = popularity[fc];
            limit = limit.min(p_last / ((n - 1.0) * p_next + (n + 1.0) * p_last));
        }
    }
    limit
}

/// Optimal placement when files are small enough for first-order STP
/// expansions to rank strategies.
///
/// Searches F_c ∈ {0..C}. The size bound guarantees k(N + 1) < 1 and, for
/// N ≥ 3, that dropping the least popular split file never pays for coarser
/// splits of up to N − 1 more popular ones.
pub fn smallfile_closed_form(
    popularity: &[f64],
    cache_size: u32,
    max_parts: u32,
    alpha: f64,
    file_size: f64,
    slot_length: f64,
    bandwidth: f64,
) -> Result<SmallFileSolution> {
    check_cache(popularity, cache_size)?;
    if max_parts == 0 {
        return Err(invalid("sic_capability", "must be >= 1"));
    }
    if !(alpha > 2.0 && alpha.is_finite()) {
        return Err(Error::UnsupportedRegime(format!(
            "the small-file form needs a LOS path-loss exponent above 2, got {alpha}"
        )));
    }
    if cache_size as usize * max_parts as usize > popularity.len() {
        return Err(invalid(
            "cache_size",
            format!("C·N = {} exceeds the catalog of {}", cache_size * max_parts, popularity.len()),
        ));
    }
    if !(file_size > 0.0 && slot_length > 0.0 && bandwidth > 0.0) {
        return Err(invalid("file_size", "file size, slot length and bandwidth must be > 0"));
    }
    let scale = slot_length * bandwidth * (alpha - 2.0) / LN_2;
    let size_bound = scale * regime_limit(popularity, cache_size, max_parts);
    if file_size >= size_bound {
        return Err(Error::UnsupportedRegime(format!(
            "file size {file_size} bits is not below the small-file bound {size_bound} bits"
        )));
    }
    let k = file_size / scale;
    let mut best = (0, f64::NEG_INFINITY);
    for fc in 0..=cache_size {
        let v = smallfile_objective(popularity, fc, cache_size, max_parts, k);
        if v > best.1 {
            best = (fc, v);
        }
    }
    let (fc, objective) = best;
    let last = fc as usize + (cache_size - fc) as usize * max_parts as usize;
    let vector = CachingVector(
        (0..popularity.len())
            .map(|f| {
                if f < fc as usize {
                    1
                } else if f < last {
                    max_parts
                } else {
                    0
                }
            })
            .collect(),
    );
    Ok(SmallFileSolution {
        whole_files: fc,
        vector,
        objective,
        size_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_caching_vector, zipf_popularity, CacheConfig, Feasibility};

    #[test]
    fn mpc_whole_catalog() {
        let p = zipf_popularity(5, 0.8).unwrap();
        assert_eq!(baseline_mpc(&p, 5).unwrap(), CachingVector(vec![1; 5]));
    }

    #[test]
    fn ldc_partitions_everything_when_room() {
        let p = zipf_popularity(6, 0.8).unwrap();
        assert_eq!(baseline_ldc(&p, 2, 3).unwrap(), CachingVector(vec![3; 6]));
        assert_eq!(baseline_ldc(&p, 2, 2).unwrap(), CachingVector(vec![2, 2, 2, 2, 0, 0]));
        assert_eq!(baseline_ldc(&p, 6, 3).unwrap(), CachingVector(vec![1; 6]));
        // 4·2 ≥ 6: two parts suffice
        assert_eq!(baseline_ldc(&p, 4, 3).unwrap(), CachingVector(vec![2; 6]));
    }

    #[test]
    fn baselines_fill_exactly() {
        let p = zipf_popularity(12, 0.6).unwrap();
        for (c, n) in [(3, 2), (4, 3), (2, 3)] {
            let cfg = CacheConfig::new(c, n, 12).unwrap();
            for s in [baseline_mpc(&p, c).unwrap(), baseline_ldc(&p, c, n).unwrap()] {
                let Feasibility::Feasible { slack } = validate_caching_vector(&s, &cfg, 12).unwrap() else {
                    panic!("{s} is infeasible");
                };
                assert!(slack.abs() < 1e-12, "{s}: slack {slack}");
            }
        }
    }

    #[test]
    fn smallfile_single_part_is_mpc() {
        let p = zipf_popularity(10, 1.0).unwrap();
        let s = smallfile_closed_form(&p, 3, 1, 4.0, 1e3, 1e-3, 1e9).unwrap();
        assert_eq!(s.vector, baseline_mpc(&p, 3).unwrap());
    }

    #[test]
    fn smallfile_dominates_its_baselines() {
        let p = zipf_popularity(20, 1.2).unwrap();
        let (c, n) = (4, 3);
        let s = smallfile_closed_form(&p, c, n, 4.0, 1e3, 1e-3, 1e9).unwrap();
        let k = 1e3 * LN_2 / (1e-3 * 1e9 * 2.0);
        assert!(s.objective >= smallfile_objective(&p, c, c, n, k));
        assert!(s.objective >= smallfile_objective(&p, 0, c, n, k));
        assert!(s.size_bound > 1e3);
    }

    #[test]
    fn smallfile_refuses_outside_its_regime() {
        let p = zipf_popularity(10, 1.0).unwrap();
        assert!(matches!(
            smallfile_closed_form(&p, 2, 2, 2.0, 1e3, 1e-3, 1e9),
            Err(Error::UnsupportedRegime(_))
        ));
        assert!(matches!(
            smallfile_closed_form(&p, 2, 2, 4.0, 1e9, 1e-3, 1e9),
            Err(Error::UnsupportedRegime(_))
        ));
        assert!(smallfile_closed_form(&p, 4, 3, 4.0, 1e3, 1e-3, 1e9).is_err());
    }
}
