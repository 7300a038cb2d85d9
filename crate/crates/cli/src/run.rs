//! Grid execution.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use mmcache_core::analytic::{objective_delay, objective_stp, StrategyValues};
use mmcache_core::optimizer::{
    baseline_ldc, baseline_mpc, evaluate_strategies, optimize_with_values, Mode, OptimizeOutcome, StrategyTable,
    ValueSource,
};
use mmcache_core::quadrature::QuadratureSpec;
use mmcache_core::CachingVector;
use rayon::prelude::*;

use crate::config::{EngineChoice, ExperimentConfig, Resolved, SweepVariable};
use crate::error::{CliError, Result};
use crate::results::{Engine, Metric, ResultRow, Strategy, SweepResult};

pub fn engines(choice: EngineChoice) -> Vec<Engine> {
    match choice {
        EngineChoice::Analytic => vec![Engine::Analytic],
        EngineChoice::Montecarlo => vec![Engine::Montecarlo],
        EngineChoice::Both => vec![Engine::Analytic, Engine::Montecarlo],
    }
}

pub fn value_source(engine: Engine, r: &Resolved) -> ValueSource {
    match engine {
        Engine::Analytic => ValueSource::Analytic {
            spec: QuadratureSpec::default(),
            delay_cap: r.plan.delay_cap,
        },
        Engine::Montecarlo => ValueSource::Simulated(r.plan.clone()),
    }
}

pub fn strategy_table(engine: Engine, r: &Resolved) -> Result<StrategyTable> {
    Ok(evaluate_strategies(
        &r.params,
        &r.content,
        r.cache.sic_capability,
        &value_source(engine, r),
    )?)
}

/// Σ_f p_f·h(s_f): the half-width of a popularity-weighted sum when the
/// per-strategy errors are fully correlated.
fn weighted(s: &CachingVector, popularity: &[f64], h: &StrategyValues) -> Result<f64> {
    let mut acc = 0.0;
    for (&st, &p) in s.statuses().iter().zip(popularity) {
        acc += p * h.get(st)?;
    }
    Ok(acc)
}

/// Everything computed at one grid point for one engine.
#[derive(Debug, Clone)]
pub struct PointReport {
    pub value: f64,
    pub engine: Engine,
    pub table: StrategyTable,
    pub hybrid_stp: OptimizeOutcome,
    pub hybrid_delay: OptimizeOutcome,
    pub mpc: CachingVector,
    pub ldc: CachingVector,
}

impl PointReport {
    pub fn evaluate(value: f64, engine: Engine, r: &Resolved, table: StrategyTable) -> Result<Self> {
        let pop = &r.content.popularity;
        Ok(PointReport {
            value,
            engine,
            hybrid_stp: optimize_with_values(pop, &r.cache, Mode::Stp, &table)?,
            hybrid_delay: optimize_with_values(pop, &r.cache, Mode::Delay, &table)?,
            mpc: baseline_mpc(pop, r.cache.cache_size)?,
            ldc: baseline_ldc(pop, r.cache.cache_size, r.cache.sic_capability)?,
            table,
        })
    }

    pub fn vector(&self, strategy: Strategy, metric: Metric) -> &CachingVector {
        match (strategy, metric) {
            (Strategy::Hybrid, Metric::Stp) => &self.hybrid_stp.vector,
            (Strategy::Hybrid, Metric::Delay) => &self.hybrid_delay.vector,
            (Strategy::Mpc, _) => &self.mpc,
            (Strategy::Ldc, _) => &self.ldc,
        }
    }

    pub fn rows(&self, variable: &str, popularity: &[f64]) -> Result<Vec<ResultRow>> {
        let t = &self.table;
        let mut rows = Vec::with_capacity(6);
        for strategy in Strategy::ALL {
            for metric in Metric::ALL {
                let s = self.vector(strategy, metric);
                let (value, ci_half_width, diverged) = match metric {
                    Metric::Stp => (
                        objective_stp(s, popularity, &t.stp)?,
                        weighted(s, popularity, &t.stp_half_width)?,
                        false,
                    ),
                    Metric::Delay => (
                        objective_delay(s, popularity, &t.delay)?,
                        weighted(s, popularity, &t.delay_half_width)?,
                        t.delay_diverged_for(s),
                    ),
                };
                rows.push(ResultRow {
                    sweep_variable: variable.to_string(),
                    sweep_value: self.value,
                    strategy,
                    metric,
                    engine: self.engine,
                    value,
                    ci_half_width,
                    diverged,
                });
            }
        }
        Ok(rows)
    }
}

/// Runs every grid point with every engine; rows come out in grid order,
/// then engine, strategy and metric.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<(SweepResult, Vec<PointReport>)> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("sweep", "the config has no [sweep] section"))?;
    cfg.resolve()?;
    let points: Vec<(f64, Resolved)> = sweep
        .values
        .iter()
        .map(|&v| Ok((v, cfg.at(sweep.variable, v).resolve()?)))
        .collect::<Result<_>>()?;
    let mut reports = Vec::with_capacity(points.len() * 2);
    let engines = engines(cfg.engine);
    let mut per_point: Vec<Vec<PointReport>> = vec![Vec::new(); points.len()];
    for &engine in &engines {
        // Per-strategy values only depend on the network and the file size.
        let tables: Vec<StrategyTable> = if sweep.variable == SweepVariable::BsDensity {
            points
                .par_iter()
                .map(|(_, r)| strategy_table(engine, r))
                .collect::<Result<_>>()?
        } else {
            vec![strategy_table(engine, &points[0].1)?; points.len()]
        };
        for (k, ((v, r), table)) in points.iter().zip(tables).enumerate() {
            per_point[k].push(PointReport::evaluate(*v, engine, r, table)?);
        }
    }
    let mut rows = Vec::new();
    for (k, reps) in per_point.into_iter().enumerate() {
        for rep in reps {
            rows.extend(rep.rows(sweep.variable.name(), &points[k].1.content.popularity)?);
            reports.push(rep);
        }
    }
    Ok((SweepResult { rows }, reports))
}

pub fn strategy_label(status: u32, max_parts: u32) -> String {
    match status {
        0 => "ut".to_string(),
        1 => format!("jt{max_parts}"),
        n => format!("pt{n}"),
    }
}

/// Plain-text account of a run: strategy values and placements per point.
pub fn summary(variable: &str, reports: &[PointReport]) -> String {
    let mut out = String::new();
    for rep in reports {
        let t = &rep.table;
        let n = t.max_parts();
        let _ = writeln!(out, "[{variable} = {} | {}]", rep.value, rep.engine);
        for st in (1..=n).chain([0]) {
            let stp = t.stp.get(st).unwrap_or(f64::NAN);
            let delay = t.delay.get(st).unwrap_or(f64::NAN);
            let diverged = t.delay_diverged.get(st as usize).copied().unwrap_or(false);
            let _ = writeln!(
                out,
                "  {:<4} stp {stp:.6}  delay {delay:.4}{}",
                strategy_label(st, n),
                if diverged { " (diverged)" } else { "" }
            );
        }
        let _ = writeln!(out, "  hybrid/stp   {}", rep.hybrid_stp.vector);
        let _ = writeln!(out, "  hybrid/delay {}", rep.hybrid_delay.vector);
    }
    out
}

#[derive(Debug, Clone)]
pub struct RunFiles {
    pub results: PathBuf,
    pub summary: PathBuf,
    pub rows: usize,
    pub diverged_rows: usize,
}

/// Runs the sweep and writes `sweep_<variable>.csv` and
/// `summary_<variable>.txt` under `out`.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<RunFiles> {
    let (result, reports) = run_sweep(cfg)?;
    let variable = cfg.sweep.as_ref().map(|s| s.variable.name()).unwrap_or("none");
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let results = out.join(format!("sweep_{variable}.csv"));
    let summary_path = out.join(format!("summary_{variable}.txt"));
    result.write(&results)?;
    std::fs::write(&summary_path, summary(variable, &reports)).map_err(|e| CliError::io(&summary_path, e))?;
    Ok(RunFiles {
        results,
        summary: summary_path,
        rows: result.rows.len(),
        diverged_rows: result.rows.iter().filter(|r| r.diverged).count(),
    })
}

/// Single-point evaluation with every requested engine.
pub fn analyze(cfg: &ExperimentConfig) -> Result<Vec<PointReport>> {
    let r = cfg.resolve()?;
    engines(cfg.engine)
        .into_iter()
        .map(|engine| PointReport::evaluate(f64::NAN, engine, &r, strategy_table(engine, &r)?))
        .collect()
}

pub fn analyze_text(reports: &[PointReport], popularity: &[f64]) -> Result<String> {
    let mut out = String::new();
    for rep in reports {
        let t = &rep.table;
        let n = t.max_parts();
        let _ = writeln!(out, "engine {}", rep.engine);
        let _ = writeln!(out, "  {:<6} {:>10} {:>10} {:>12} {:>10}", "", "stp", "±", "delay", "±");
        for st in (1..=n).chain([0]) {
            let _ = writeln!(
                out,
                "  {:<6} {:>10.6} {:>10.6} {:>12.4} {:>10.4}{}",
                strategy_label(st, n),
                t.stp.get(st)?,
                t.stp_half_width.get(st)?,
                t.delay.get(st)?,
                t.delay_half_width.get(st)?,
                if t.delay_diverged[st as usize] { "  diverged" } else { "" }
            );
        }
        for row in rep.rows("none", popularity)? {
            let _ = writeln!(
                out,
                "  {:<7} {:<6} {:.6} ± {:.6}{}",
                row.strategy,
                row.metric,
                row.value,
                row.ci_half_width,
                if row.diverged { "  diverged" } else { "" }
            );
        }
    }
    Ok(out)
}
