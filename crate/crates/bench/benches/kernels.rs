use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use mmcache_core::analytic::stp_pt;
use mmcache_core::montecarlo::{simulate, Probe, Transmission, TrialPlan};
use mmcache_core::optimizer::{build_instance, evaluate_strategies, greedy_mckp, Mode, ValueSource};
use mmcache_core::quadrature::QuadratureSpec;
use mmcache_core::special::gauss_2f1;
use mmcache_core::toeplitz::toeplitz_exp_column;
use mmcache_core::{ContentModel, SystemParams};

fn kernels(c: &mut Criterion) {
    let omega: Vec<f64> = (0..12).map(|j| if j == 0 { -2.5 } else { 0.3 / j as f64 }).collect();
    c.bench_function("toeplitz_exp_12", |b| b.iter(|| toeplitz_exp_column(black_box(&omega))));
    c.bench_function("gauss_2f1_large_theta", |b| {
        b.iter(|| gauss_2f1(black_box(-1.0 / 1.05), 1.0, 1.0 - 1.0 / 1.05, black_box(-63.0)))
    });
}

fn analytic(c: &mut Criterion) {
    let p = SystemParams::table1_companion();
    let content = ContentModel::table1();
    let spec = QuadratureSpec::default();
    let mut g = c.benchmark_group("analytic");
    g.sample_size(10);
    g.bench_function("stp_pt_2", |b| b.iter(|| stp_pt(2, black_box(&p), &content, &spec)));
    g.finish();
}

fn greedy(c: &mut Criterion) {
    let content = ContentModel::table1();
    let table = evaluate_strategies(&SystemParams::table1(), &content, 3, &ValueSource::default()).unwrap();
    let inst = build_instance(&content.popularity, table.values(Mode::Stp), 35, 3, Mode::Stp).unwrap();
    c.bench_function("greedy_mckp_f50", |b| b.iter(|| greedy_mckp(black_box(&inst))));
}

fn montecarlo(c: &mut Criterion) {
    let p = SystemParams::table1();
    let content = ContentModel::table1();
    let probes = [
        Probe::for_content(Transmission::Joint { links: 3 }, &p, &content),
        Probe::for_content(Transmission::Parallel { parts: 3 }, &p, &content),
    ];
    let plan = TrialPlan {
        geometries: 200,
        fading_draws: 50,
        ..TrialPlan::default()
    };
    let mut g = c.benchmark_group("montecarlo");
    g.sample_size(10);
    g.bench_function("10k_trials", |b| b.iter(|| simulate(black_box(&p), &probes, &plan)));
    g.finish();
}

criterion_group!(benches, kernels, analytic, greedy, montecarlo);
criterion_main!(benches);
