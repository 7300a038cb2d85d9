//! Strategy values to caching vector.

use super::{
    baseline_ldc, baseline_mpc, build_instance, exhaustive_oracle, greedy_mckp, MckpInstance, MckpSolution, Mode,
    Optimality, EXHAUSTIVE_BUDGET,
};
use crate::analytic::{
    delay_jt, delay_pt, delay_ut, objective_delay, objective_stp, stp_jt, stp_pt, StrategyValues,
    DEFAULT_DELAY_CAP,
};
use crate::error::{Error, Result};
use crate::model::{validate_caching_vector, CacheConfig, CachingVector, ContentModel, Feasibility, SystemParams};
use crate::montecarlo::{simulate, Probe, Transmission, TrialPlan};
use crate::quadrature::QuadratureSpec;

/// Where per-strategy STPs and delays come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueSource {
    Analytic { spec: QuadratureSpec, delay_cap: f64 },
    Simulated(TrialPlan),
}

impl Default for ValueSource {
    fn default() -> Self {
        ValueSource::Analytic {
            spec: QuadratureSpec::default(),
            delay_cap: DEFAULT_DELAY_CAP,
        }
    }
}

/// STP and delay of every caching status 0..=N.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyTable {
    pub stp: StrategyValues,
    pub delay: StrategyValues,
    /// Confidence half-widths of simulated values, zero for analytic ones.
    pub stp_half_width: StrategyValues,
    pub delay_half_width: StrategyValues,
    /// Per status 0..=N: the delay reached the divergence criterion.
    pub delay_diverged: Vec<bool>,
}

impl StrategyTable {
    pub fn max_parts(&self) -> u32 {
        self.stp.max_parts()
    }

    pub fn values(&self, mode: Mode) -> &StrategyValues {
        match mode {
            Mode::Stp => &self.stp,
            Mode::Delay => &self.delay,
        }
    }

    /// Whether any delay entry used by `s` diverged.
    pub fn delay_diverged_for(&self, s: &CachingVector) -> bool {
        s.statuses()
            .iter()
            .any(|&st| self.delay_diverged.get(st as usize).copied().unwrap_or(false))
    }
}

fn zeros(n: u32) -> StrategyValues {
    StrategyValues {
        joint: 0.0,
        parallel: vec![0.0; n.saturating_sub(1) as usize],
        uncached: 0.0,
    }
}

/// Values for JT by N BSs (status 1), N'-part PT (status N' = 2..=N) and
/// backhaul delivery (status 0).
pub fn evaluate_strategies(
    params: &SystemParams,
    content: &ContentModel,
    max_parts: u32,
    source: &ValueSource,
) -> Result<StrategyTable> {
    if max_parts == 0 {
        return Err(Error::Domain("need at least one subfile per file".into()));
    }
    match source {
        ValueSource::Analytic { spec, delay_cap } => {
            let joint_stp = stp_jt(params, content, max_parts, spec)?;
            let joint_delay = delay_jt(params, content, max_parts, *delay_cap, spec)?;
            let mut pt_stp = Vec::new();
            let mut pt_delay = Vec::new();
            for n in 2..=max_parts {
                pt_stp.push(stp_pt(n, params, content, spec)?);
                pt_delay.push(delay_pt(n, params, content, *delay_cap, spec)?);
            }
            let ut = delay_ut(params, content, *delay_cap, spec)?;
            let mut diverged = vec![ut.diverged, joint_delay.diverged];
            diverged.extend(pt_delay.iter().map(|d| d.diverged));
            Ok(StrategyTable {
                stp: StrategyValues {
                    joint: joint_stp,
                    parallel: pt_stp,
                    uncached: 0.0,
                },
                delay: StrategyValues {
                    joint: joint_delay.mean,
                    parallel: pt_delay.iter().map(|d| d.mean).collect(),
                    uncached: ut.mean,
                },
                stp_half_width: zeros(max_parts),
                delay_half_width: zeros(max_parts),
                delay_diverged: diverged,
            })
        }
        ValueSource::Simulated(plan) => {
            let mut probes = vec![Transmission::Joint { links: max_parts }];
            probes.extend((2..=max_parts).map(|parts| Transmission::Parallel { parts }));
            probes.push(Transmission::Joint { links: 1 });
            let probes: Vec<Probe> = probes
                .into_iter()
                .map(|t| Probe::for_content(t, params, content))
                .collect();
            let r = simulate(params, &probes, plan)?;
            let last = probes.len() - 1;
            let pt = 1..last;
            let backhaul = params.backhaul_delay_slots();
            let mut diverged = vec![r.delay[last].diverged, r.delay[0].diverged];
            diverged.extend(r.delay[pt.clone()].iter().map(|d| d.diverged));
            Ok(StrategyTable {
                stp: StrategyValues {
                    joint: r.stp[0].estimate,
                    parallel: r.stp[pt.clone()].iter().map(|e| e.estimate).collect(),
                    uncached: 0.0,
                },
                delay: StrategyValues {
                    joint: r.delay[0].estimate,
                    parallel: r.delay[pt.clone()].iter().map(|e| e.estimate).collect(),
                    uncached: r.delay[last].estimate + backhaul,
                },
                stp_half_width: StrategyValues {
                    joint: r.stp[0].half_width,
                    parallel: r.stp[pt.clone()].iter().map(|e| e.half_width).collect(),
                    uncached: 0.0,
                },
                delay_half_width: StrategyValues {
                    joint: r.delay[0].half_width,
                    parallel: r.delay[pt].iter().map(|e| e.half_width).collect(),
                    uncached: r.delay[last].half_width,
                },
                delay_diverged: diverged,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub mode: Mode,
    pub instance: MckpInstance,
    /// The exhaustive optimum when the instance is small enough. Otherwise
    /// the most profitable of the greedy solution and the two baseline
    /// placements.
    pub solution: MckpSolution,
    pub greedy: MckpSolution,
    pub vector: CachingVector,
    pub stp_objective: f64,
    pub delay_objective: f64,
}

/// Builds and solves the placement instance from precomputed values.
pub fn optimize_with_values(
    popularity: &[f64],
    cfg: &CacheConfig,
    mode: Mode,
    table: &StrategyTable,
) -> Result<OptimizeOutcome> {
    cfg.validate(popularity.len())?;
    if table.max_parts() < cfg.sic_capability {
        return Err(Error::MissingValue(format!(
            "values cover {} subfiles, the cache allows {}",
            table.max_parts(),
            cfg.sic_capability
        )));
    }
    let instance = build_instance(popularity, table.values(mode), cfg.cache_size, cfg.sic_capability, mode)?;
    let greedy = greedy_mckp(&instance)?;
    let size = (cfg.sic_capability as f64 + 1.0).powi(popularity.len() as i32);
    let solution = if size <= EXHAUSTIVE_BUDGET {
        exhaustive_oracle(&instance)?
    } else {
        let mut best = greedy.clone();
        for b in [
            baseline_mpc(popularity, cfg.cache_size)?,
            baseline_ldc(popularity, cfg.cache_size, cfg.sic_capability)?,
        ] {
            let cand = instance.solution(instance.choice_of(&b)?, Optimality::Greedy);
            if cand.profit > best.profit {
                best = cand;
            }
        }
        best
    };
    let vector = instance.caching_vector(&solution);
    if let f @ (Feasibility::StatusOutOfRange { .. } | Feasibility::OverCapacity { .. }) =
        validate_caching_vector(&vector, cfg, popularity.len())?
    {
        return Err(Error::Domain(format!("solver returned an infeasible vector: {f:?}")));
    }
    Ok(OptimizeOutcome {
        mode,
        stp_objective: objective_stp(&vector, popularity, &table.stp)?,
        delay_objective: objective_delay(&vector, popularity, &table.delay)?,
        instance,
        solution,
        greedy,
        vector,
    })
}

/// Values from `source`, then [`optimize_with_values`].
pub fn optimize(
    params: &SystemParams,
    content: &ContentModel,
    cfg: &CacheConfig,
    mode: Mode,
    source: &ValueSource,
) -> Result<OptimizeOutcome> {
    let table = evaluate_strategies(params, content, cfg.sic_capability, source)?;
    optimize_with_values(&content.popularity, cfg, mode, &table)
}
