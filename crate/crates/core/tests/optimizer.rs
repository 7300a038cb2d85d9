use mmcache_core::analytic::{objective_delay, objective_stp, StrategyValues};
use mmcache_core::optimizer::*;
use mmcache_core::{zipf_popularity, CacheConfig, CachingVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_values(rng: &mut ChaCha8Rng, n: u32) -> StrategyValues {
    StrategyValues {
        joint: rng.random_range(0.0..1.0),
        parallel: (2..=n).map(|_| rng.random_range(0.0..1.0)).collect(),
        uncached: rng.random_range(1.0..50.0),
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> MckpInstance {
    let f = rng.random_range(1..=8usize);
    let n = rng.random_range(1..=3u32);
    let pop = zipf_popularity(f, rng.random_range(0.0..1.5)).unwrap();
    let c = rng.random_range(1..=f as u32);
    let mode = if rng.random_bool(0.5) { Mode::Stp } else { Mode::Delay };
    let mut values = random_values(rng, n);
    if mode == Mode::Delay {
        // delays of cached strategies stay below the backhaul delay
        values.joint *= values.uncached;
        for v in &mut values.parallel {
            *v *= values.uncached;
        }
    }
    build_instance(&pop, &values, c, n, mode).unwrap()
}

fn corpus() -> Vec<MckpInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..200).map(|_| random_instance(&mut rng)).collect()
}

#[test]
fn greedy_is_within_half_of_the_optimum() {
    let mut worst: f64 = 1.0;
    let mut close = 0;
    let all = corpus();
    for inst in &all {
        let g = greedy_mckp(inst).unwrap();
        let opt = exhaustive_oracle(inst).unwrap();
        assert!(g.weight <= inst.capacity + WEIGHT_TOL);
        assert!(g.profit <= opt.profit + 1e-12);
        let ratio = if opt.profit > 0.0 { g.profit / opt.profit } else { 1.0 };
        assert!(ratio >= 0.5, "ratio {ratio}");
        worst = worst.min(ratio);
        close += (ratio >= 0.95) as usize;
    }
    println!("worst greedy/optimum ratio {worst:.6}, {close}/{} at or above 0.95", all.len());
    assert!(close * 10 >= all.len() * 9);
}

#[test]
fn partition_agrees_with_sorting() {
    for inst in corpus() {
        assert_eq!(optimal_slope_partition(&inst).unwrap(), slope_by_sorting(&inst).unwrap());
    }
}

#[test]
fn reduction_keeps_the_optimum() {
    for inst in corpus() {
        let size: f64 = inst.classes.iter().map(|c| c.len() as f64).product();
        if size > 1e5 {
            continue;
        }
        let reduced = reduce_instance(&inst).unwrap();
        let smaller = MckpInstance {
            classes: reduced
                .iter()
                .zip(&inst.classes)
                .map(|(r, class)| r.items.iter().map(|&i| class[i]).collect())
                .collect(),
            capacity: inst.capacity,
        };
        let a = exhaustive_oracle(&inst).unwrap().profit;
        let b = exhaustive_oracle(&smaller).unwrap().profit;
        assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }
}

/// Survivors by pairwise and triple checks. Weights are multiples of 1/8 and
/// profits integers, so every comparison is exact.
fn hull_oracle(class: &[Item]) -> Vec<usize> {
    let n = class.len();
    let dominated = |j: usize| {
        (0..n).any(|i| {
            let (a, b) = (class[i], class[j]);
            let same = a.weight == b.weight && a.profit == b.profit;
            i != j && a.weight <= b.weight && a.profit >= b.profit && (!same || i < j)
        })
    };
    let alive: Vec<usize> = (0..n).filter(|&j| !dominated(j)).collect();
    let mut out: Vec<usize> = alive
        .iter()
        .copied()
        .filter(|&j| {
            !alive.iter().any(|&i| {
                alive.iter().any(|&k| {
                    let (a, b, c) = (class[i], class[j], class[k]);
                    a.weight < b.weight
                        && b.weight < c.weight
                        && (c.profit - b.profit) * (b.weight - a.weight) >= (b.profit - a.profit) * (c.weight - b.weight)
                })
            })
        })
        .collect();
    out.sort_by(|&a, &b| class[a].weight.total_cmp(&class[b].weight));
    out
}

#[test]
fn hull_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..2000 {
        let class: Vec<Item> = (0..6)
            .map(|_| Item {
                profit: rng.random_range(0..10) as f64,
                weight: rng.random_range(0..=8) as f64 / 8.0,
            })
            .collect();
        let r = dominance_reduce(&class).unwrap();
        assert_eq!(r.items, hull_oracle(&class), "{class:?}");
        assert!(r.slopes.windows(2).all(|w| w[0] > w[1]));
    }
}

#[test]
fn single_part_greedy_is_most_popular() {
    let pop = zipf_popularity(12, 0.8).unwrap();
    let values = StrategyValues {
        joint: 0.7,
        parallel: vec![],
        uncached: 0.0,
    };
    for c in 1..=12 {
        let inst = build_instance(&pop, &values, c, 1, Mode::Stp).unwrap();
        let g = greedy_mckp(&inst).unwrap();
        assert_eq!(inst.caching_vector(&g), baseline_mpc(&pop, c).unwrap());
    }
}

#[test]
fn delay_mode_uncached_profit_is_zero() {
    let pop = zipf_popularity(5, 0.8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inst = build_instance(&pop, &random_values(&mut rng, 3), 2, 3, Mode::Delay).unwrap();
    assert!(inst.classes.iter().all(|c| c[3].profit == 0.0 && c[3].weight == 0.0));
}

/// First-order STP of a vector: status 1 is lossless when several BSs
/// cooperate, an n-part file loses (n + 1)k.
fn first_order(s: &CachingVector, pop: &[f64], n: u32, k: f64) -> f64 {
    s.statuses()
        .iter()
        .zip(pop)
        .map(|(&st, &p)| match st {
            0 => 0.0,
            1 if n == 1 => p * (1.0 - 2.0 * k),
            1 => p,
            m => p * (1.0 - (m as f64 + 1.0) * k),
        })
        .sum()
}

#[test]
fn smallfile_form_matches_grid_and_full_search() {
    let (f, c, n, alpha) = (6usize, 2u32, 2u32, 4.0);
    let (t, w) = (1e-3, 1e9);
    let k_of = |size: f64| size * std::f64::consts::LN_2 / (t * w * (alpha - 2.0));
    for delta in [0.2, 0.8, 1.4] {
        let pop = zipf_popularity(f, delta).unwrap();
        for size in [1e3, 1e5, 5e5] {
            let sol = smallfile_closed_form(&pop, c, n, alpha, size, t, w).unwrap();
            let k = k_of(size);
            let grid = (0..=c)
                .map(|fc| {
                    let v = CachingVector(
                        (0..f)
                            .map(|i| {
                                if i < fc as usize {
                                    1
                                } else if i < fc as usize + (c - fc) as usize * n as usize {
                                    n
                                } else {
                                    0
                                }
                            })
                            .collect(),
                    );
                    (first_order(&v, &pop, n, k), fc)
                })
                .fold((f64::NEG_INFINITY, 0), |a, b| if b.0 > a.0 { b } else { a });
            assert_eq!(sol.whole_files, grid.1);
            assert!((sol.objective - grid.0).abs() < 1e-12);
            let values = StrategyValues {
                joint: 1.0,
                parallel: vec![1.0 - 3.0 * k],
                uncached: 0.0,
            };
            let inst = build_instance(&pop, &values, c, n, Mode::Stp).unwrap();
            let best = exhaustive_oracle(&inst).unwrap().profit;
            assert!((best - sol.objective).abs() < 1e-12, "{best} vs {}", sol.objective);
        }
    }
}

#[test]
fn companion_point_beats_baselines() {
    let params = mmcache_core::SystemParams::table1_companion();
    let content = mmcache_core::ContentModel::table1();
    let table = evaluate_strategies(&params, &content, 3, &ValueSource::default()).unwrap();
    let pop = &content.popularity;
    for c in [5, 20, 35, 50] {
        let cfg = CacheConfig::new(c, 3, 50).unwrap();
        let stp = optimize_with_values(pop, &cfg, Mode::Stp, &table).unwrap();
        let delay = optimize_with_values(pop, &cfg, Mode::Delay, &table).unwrap();
        let base = [baseline_mpc(pop, c).unwrap(), baseline_ldc(pop, c, 3).unwrap()];
        for b in &base {
            let s = objective_stp(b, pop, &table.stp).unwrap();
            let d = objective_delay(b, pop, &table.delay).unwrap();
            assert!(stp.stp_objective >= s - 1e-12);
            assert!(delay.delay_objective <= d + 1e-9);
            if c == 50 {
                assert!((stp.stp_objective - s).abs() <= 1e-9);
            }
        }
    }
}

proptest! {
    #[test]
    fn greedy_solutions_are_feasible(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng);
        let g = greedy_mckp(&inst).unwrap();
        prop_assert_eq!(g.choice.len(), inst.classes.len());
        prop_assert!(g.weight <= inst.capacity + WEIGHT_TOL);
        let back = inst.choice_of(&inst.caching_vector(&g)).unwrap();
        prop_assert_eq!(back, g.choice);
    }

    #[test]
    fn tables_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng);
        let g = greedy_mckp(&inst).unwrap();
        let (back, choice) = parse_table(&write_table(&inst, Some(&g.choice))).unwrap();
        prop_assert_eq!(back, inst);
        prop_assert_eq!(choice, Some(g.choice));
    }

    #[test]
    fn more_capacity_never_hurts_the_optimum(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inst = random_instance(&mut rng);
        let a = exhaustive_oracle(&inst).unwrap().profit;
        inst.capacity += 1.0;
        let b = exhaustive_oracle(&inst).unwrap().profit;
        prop_assert!(b >= a - 1e-12);
    }
}
