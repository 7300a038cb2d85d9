//! Plotter scripts for result files.
//!
//! One Python/matplotlib script per result file and metric, drawing one
//! curve per (strategy, engine) with confidence bars. Scripts read only the
//! result file they were generated from and save a PNG next to themselves.

use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::results::{Metric, SweepResult};

const TEMPLATE: &str = r#"#!/usr/bin/env python3
"""@TITLE@"""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
SOURCE = os.path.join(HERE, @SOURCE@)
METRIC = "@METRIC@"
CURVES = [@CURVES@]


def load():
    curves = {}
    with open(SOURCE, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["metric"] != METRIC:
                continue
            key = (row["strategy"], row["engine"])
            curves.setdefault(key, []).append(
                (
                    float(row["sweep_value"]),
                    float(row["value"]),
                    float(row["ci_half_width"]),
                    row["diverged"] == "true",
                )
            )
    return curves


def main():
    curves = load()
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for strategy, engine in CURVES:
        pts = curves.get((strategy, engine), [])
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        es = [p[2] for p in pts]
        ax.errorbar(xs, ys, yerr=es, marker="o", capsize=2, label=f"{strategy.upper()} ({engine})")
        bad = [p for p in pts if p[3]]
        if bad:
            ax.scatter([p[0] for p in bad], [p[1] for p in bad], marker="x", color="k", zorder=3)
    ax.set_xlabel("@XLABEL@")
    ax.set_ylabel("@YLABEL@")
    @XSCALE@
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, "@PNG@"), dpi=150)


if __name__ == "__main__":
    main()
"#;

fn py_str(s: &str) -> String {
    format!("{s:?}")
}

fn script(result: &SweepResult, source: &str, stem: &str, metric: Metric) -> Option<String> {
    let rows: Vec<_> = result.rows.iter().filter(|r| r.metric == metric).collect();
    let variable = rows.first()?.sweep_variable.clone();
    let mut curves: Vec<(_, _)> = rows.iter().map(|r| (r.strategy, r.engine)).collect();
    curves.sort();
    curves.dedup();
    let curves = curves
        .iter()
        .map(|(s, e)| format!("({}, {})", py_str(&s.to_string()), py_str(&e.to_string())))
        .collect::<Vec<_>>()
        .join(", ");
    let ylabel = match metric {
        Metric::Stp => "STP",
        Metric::Delay => "average delay (slots)",
    };
    let xscale = match variable.as_str() {
        "bs_density" => "ax.set_xscale(\"log\")",
        _ => "pass",
    };
    Some(
        TEMPLATE
            .replace("@TITLE@", &format!("{ylabel} versus {variable}, read from {source}."))
            .replace("@SOURCE@", &py_str(source))
            .replace("@METRIC@", &metric.to_string())
            .replace("@CURVES@", &curves)
            .replace("@XLABEL@", &variable)
            .replace("@YLABEL@", ylabel)
            .replace("@XSCALE@", xscale)
            .replace("@PNG@", &format!("{stem}_{metric}.png")),
    )
}

/// Result files in `dir`: every `sweep_*.csv`, sorted by name.
pub fn result_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "csv")
                && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("sweep_"))
        })
        .collect();
    files.sort();
    Ok(files)
}

/// Writes scripts for `files` into `out` and returns their paths. Result sets
/// without rows produce nothing.
pub fn emit_plots(files: &[PathBuf], out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let out_abs = std::fs::canonicalize(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();
    for file in files {
        let result = SweepResult::read(file)?;
        let abs = std::fs::canonicalize(file).map_err(|e| CliError::io(file, e))?;
        let source = match abs.strip_prefix(&out_abs) {
            Ok(rel) => rel.to_string_lossy().into_owned(),
            Err(_) => abs.to_string_lossy().into_owned(),
        };
        let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("result");
        for metric in Metric::ALL {
            if let Some(text) = script(&result, &source, stem, metric) {
                let path = out.join(format!("plot_{stem}_{metric}.py"));
                std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}
