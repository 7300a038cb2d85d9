use std::path::Path;
use std::process::Command;

use mmcache_cli::config::{SweepSection, SweepVariable};
use mmcache_cli::plots::emit_plots;
use mmcache_cli::run::{run, run_sweep};
use mmcache_cli::{EngineChoice, ExperimentConfig, Metric, Strategy, SweepResult};

fn small(variable: SweepVariable, values: Vec<f64>, engine: EngineChoice) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.content.file_count = 10;
    cfg.cache.cache_size = 3;
    cfg.cache.sic_capability = 2;
    cfg.system.alpha_los = 2.1;
    cfg.engine = engine;
    cfg.trials.geometries = 200;
    cfg.trials.fading_draws = 20;
    cfg.sweep = Some(SweepSection { variable, values });
    cfg
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mmcache"))
}

#[test]
fn one_point_gives_six_rows() {
    let cfg = small(SweepVariable::CacheSize, vec![3.0], EngineChoice::Analytic);
    let (result, _) = run_sweep(&cfg).unwrap();
    assert_eq!(result.rows.len(), 6);
    for s in Strategy::ALL {
        for m in Metric::ALL {
            assert_eq!(result.rows.iter().filter(|r| r.strategy == s && r.metric == m).count(), 1);
        }
    }
}

#[test]
fn both_engines_double_the_rows() {
    let cfg = small(SweepVariable::ZipfExponent, vec![0.4, 1.2], EngineChoice::Both);
    let (result, _) = run_sweep(&cfg).unwrap();
    assert_eq!(result.rows.len(), 2 * 2 * 6);
    let mc = result.rows.iter().filter(|r| r.engine == mmcache_cli::Engine::Montecarlo);
    assert!(mc.filter(|r| r.metric == Metric::Stp).all(|r| r.ci_half_width > 0.0));
}

#[test]
fn reruns_are_byte_identical_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(SweepVariable::BsDensity, vec![3e-5, 1e-4], EngineChoice::Montecarlo);
    let a = run(&cfg, &dir.path().join("a")).unwrap();
    let b = run(&cfg, &dir.path().join("b")).unwrap();
    assert_eq!(std::fs::read(&a.results).unwrap(), std::fs::read(&b.results).unwrap());
    assert_eq!(std::fs::read(&a.summary).unwrap(), std::fs::read(&b.summary).unwrap());
    let (direct, _) = run_sweep(&cfg).unwrap();
    assert_eq!(SweepResult::read(&a.results).unwrap(), direct);
}

#[test]
fn plots_are_idempotent_and_one_per_metric() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(SweepVariable::CacheSize, vec![2.0, 3.0], EngineChoice::Analytic);
    cfg.cache.sic_capability = 1;
    let files = run(&cfg, dir.path()).unwrap();
    let first = emit_plots(std::slice::from_ref(&files.results), dir.path()).unwrap();
    assert_eq!(first.len(), 2);
    let stp = std::fs::read_to_string(dir.path().join("plot_sweep_cache_size_stp.py")).unwrap();
    assert_eq!(stp.matches("\"analytic\")").count(), 3);
    assert!(stp.contains("\"sweep_cache_size.csv\""));
    let bytes: Vec<Vec<u8>> = first.iter().map(|p| std::fs::read(p).unwrap()).collect();
    emit_plots(std::slice::from_ref(&files.results), dir.path()).unwrap();
    let again: Vec<Vec<u8>> = first.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(bytes, again);
}

#[test]
fn empty_results_give_no_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep_empty.csv");
    SweepResult::default().write(&path).unwrap();
    assert!(emit_plots(&[path], dir.path()).unwrap().is_empty());
    let out = bin().args(["plot", "--out"]).arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn missing_column_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep_bad.csv");
    std::fs::write(&path, "sweep_variable,sweep_value,strategy,metric,engine,ci_half_width,diverged\n").unwrap();
    let err = emit_plots(&[path], dir.path()).unwrap_err();
    assert!(err.to_string().contains("`value`"), "{err}");
}

#[test]
fn invalid_config_fails_with_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[cache]\nsic_capability = 0\n").unwrap();
    let out = bin().arg("--config").arg(&path).arg("analyze").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cache.sic_capability"));
}

#[test]
fn sweep_verb_leaves_the_config_alone() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(SweepVariable::CacheSize, vec![1.0, 2.0], EngineChoice::Analytic);
    cfg.cache.sic_capability = 1;
    let out = dir.path().join("out");
    cfg.output.dir = out.clone();
    let path = dir.path().join("exp.toml");
    let text = cfg.to_toml();
    std::fs::write(&path, &text).unwrap();
    let status = bin().arg("--config").arg(&path).arg("sweep").status().unwrap();
    assert!(status.success());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
    let names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.len(), 2, "{names:?}");
    assert!(SweepResult::read(&out.join("sweep_cache_size.csv")).unwrap().rows.len() == 12);
}

#[test]
fn optimize_prints_a_vector_and_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    let mut cfg = small(SweepVariable::CacheSize, vec![3.0], EngineChoice::Analytic);
    cfg.sweep = None;
    std::fs::write(&path, cfg.to_toml()).unwrap();
    let out = bin()
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .args(["optimize", "--mode", "delay"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("analytic: ["), "{stdout}");
    let table = std::fs::read_to_string(dir.path().join("instance_delay_analytic.txt")).unwrap();
    let (inst, choice) = mmcache_core::optimizer::parse_table(&table).unwrap();
    assert_eq!(inst.classes.len(), 10);
    assert_eq!(choice.unwrap().len(), 10);
}

#[test]
fn validate_verb_passes() {
    let out = bin().arg("validate").output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 4);
}

#[test]
fn shipped_configs_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["table1", "companion", "zipf", "density"] {
        let cfg = ExperimentConfig::load(&root.join(format!("{name}.toml"))).unwrap();
        assert!(cfg.sweep.is_some(), "{name}");
    }
    let table = ExperimentConfig::load(&root.join("table1.toml")).unwrap();
    let defaults = ExperimentConfig {
        sweep: table.sweep.clone(),
        output: table.output.clone(),
        ..ExperimentConfig::default()
    };
    assert_eq!(table.resolve().unwrap(), defaults.resolve().unwrap());
}
