use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use mmcache_cli::config::EngineChoice;
use mmcache_cli::run::{analyze, analyze_text, run, strategy_table};
use mmcache_cli::{plots, validate, ExperimentConfig};
use mmcache_core::optimizer::{optimize_with_values, write_table, Mode};

/// Success probability, delay and cache placement experiments.
#[derive(Debug, Parser)]
#[command(name = "mmcache", version)]
struct Cli {
    /// TOML experiment config; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's engine.
    #[arg(long, global = true, value_enum)]
    engine: Option<EngineChoice>,
    /// Overrides the Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Objective {
    Stp,
    Delay,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-strategy values and the three placements at the config point.
    Analyze,
    /// Runs the config's grid and writes a result CSV and a summary.
    Sweep,
    /// Prints the optimized caching vector and writes the knapsack table.
    Optimize {
        #[arg(long, value_enum, default_value = "stp")]
        mode: Objective,
    },
    /// Runs the built-in oracle and property checks.
    Validate,
    /// Writes plotter scripts for result files (default: every sweep_*.csv
    /// in the output directory).
    Plot { files: Vec<PathBuf> },
}

fn load(cli: &Cli) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(e) = cli.engine {
        cfg.engine = e;
    }
    if let Some(s) = cli.seed {
        cfg.trials.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    cfg.resolve()?;
    Ok(cfg)
}

fn set_workers() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("MMCACHE_WORKERS") {
        let n: usize = v.parse().with_context(|| format!("MMCACHE_WORKERS={v} is not a count"))?;
        if n == 0 {
            bail!("MMCACHE_WORKERS must be >= 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<ExitCode> {
    set_workers()?;
    match &cli.command {
        Command::Validate => {
            let checks = validate::run_checks(cli.seed.unwrap_or(1));
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            });
        }
        Command::Plot { files } => {
            let cfg = load(cli)?;
            let out = cfg.output.dir;
            let files = if files.is_empty() {
                plots::result_files(&out)?
            } else {
                files.clone()
            };
            let written = plots::emit_plots(&files, &out)?;
            if written.is_empty() {
                eprintln!("warning: no result rows found, no scripts written");
            }
            for p in written {
                println!("{}", p.display());
            }
        }
        Command::Analyze => {
            let cfg = load(cli)?;
            let r = cfg.resolve()?;
            print!("{}", analyze_text(&analyze(&cfg)?, &r.content.popularity)?);
        }
        Command::Sweep => {
            let cfg = load(cli)?;
            let files = run(&cfg, &cfg.output.dir)?;
            if files.diverged_rows > 0 {
                eprintln!("warning: {} delay rows diverged (value dominated by the cap)", files.diverged_rows);
            }
            println!("{} rows -> {}", files.rows, files.results.display());
            println!("summary -> {}", files.summary.display());
        }
        Command::Optimize { mode } => {
            let cfg = load(cli)?;
            let r = cfg.resolve()?;
            let mode = match mode {
                Objective::Stp => Mode::Stp,
                Objective::Delay => Mode::Delay,
            };
            for engine in mmcache_cli::run::engines(cfg.engine) {
                let table = strategy_table(engine, &r)?;
                let out = optimize_with_values(&r.content.popularity, &r.cache, mode, &table)?;
                println!("{engine}: {}", out.vector);
                println!("  stp {:.6}  delay {:.4}", out.stp_objective, out.delay_objective);
                std::fs::create_dir_all(&cfg.output.dir)?;
                let name = format!("instance_{}_{engine}.txt", format!("{mode:?}").to_lowercase());
                let path = cfg.output.dir.join(name);
                std::fs::write(&path, write_table(&out.instance, Some(&out.solution.choice)))?;
                println!("  instance -> {}", path.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
