//! Cache placement as a multiple-choice knapsack problem.
//!
//! Class f holds one item per caching status of file f. With N the SIC
//! capability, item n − 1 is status n (n = 1..=N, weight 1/n) and item N is
//! "not cached" (weight 0).

mod baseline;
mod pipeline;
mod table;

use std::cmp::Ordering;

pub use baseline::{baseline_ldc, baseline_mpc, smallfile_closed_form, smallfile_objective, SmallFileSolution};
pub use pipeline::{
    evaluate_strategies, optimize, optimize_with_values, OptimizeOutcome, StrategyTable, ValueSource,
};
pub use table::{parse_table, write_table};

use crate::analytic::StrategyValues;
use crate::error::{Error, Result};
use crate::model::CachingVector;

/// Slack allowed when comparing a weight sum with the capacity.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Largest instance the exhaustive oracle will enumerate.
pub const EXHAUSTIVE_BUDGET: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Maximize the popularity-weighted STP.
    Stp,
    /// Minimize the popularity-weighted delay.
    Delay,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub profit: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MckpInstance {
    pub classes: Vec<Vec<Item>>,
    pub capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Optimality {
    Exact,
    /// At least half the optimum.
    Greedy,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MckpSolution {
    /// Chosen item per class.
    pub choice: Vec<usize>,
    pub profit: f64,
    pub weight: f64,
    pub optimality: Optimality,
}

/// Items of one class that survive dominance and LP-dominance, by
/// increasing weight.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedClass {
    pub items: Vec<usize>,
    /// Incremental efficiency from `items[k]` to `items[k + 1]`, strictly
    /// decreasing.
    pub slopes: Vec<f64>,
}

/// Caching status of item `item` in a class with `max_parts + 1` items.
pub fn item_status(item: usize, max_parts: u32) -> u32 {
    if item == max_parts as usize {
        0
    } else {
        item as u32 + 1
    }
}

pub fn status_item(status: u32, max_parts: u32) -> usize {
    if status == 0 {
        max_parts as usize
    } else {
        status as usize - 1
    }
}

impl MckpInstance {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity >= 0.0 && self.capacity.is_finite()) {
            return Err(Error::Domain(format!("capacity {} must be finite and >= 0", self.capacity)));
        }
        for (f, class) in self.classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::Domain(format!("class {f} has no items")));
            }
            if class
                .iter()
                .any(|it| !it.profit.is_finite() || !(0.0..=1.0).contains(&it.weight))
            {
                return Err(Error::Domain(format!(
                    "class {f}: profits must be finite and weights in [0, 1]"
                )));
            }
        }
        Ok(())
    }

    fn totals(&self, choice: &[usize]) -> (f64, f64) {
        let mut profit = 0.0;
        let mut weight = 0.0;
        for (class, &i) in self.classes.iter().zip(choice) {
            profit += class[i].profit;
            weight += class[i].weight;
        }
        (profit, weight)
    }

    pub fn solution(&self, choice: Vec<usize>, optimality: Optimality) -> MckpSolution {
        let (profit, weight) = self.totals(&choice);
        MckpSolution {
            choice,
            profit,
            weight,
            optimality,
        }
    }

    /// The caching vector a solution of a cache-placement instance stands for.
    pub fn caching_vector(&self, solution: &MckpSolution) -> CachingVector {
        CachingVector(
            solution
                .choice
                .iter()
                .zip(&self.classes)
                .map(|(&i, class)| item_status(i, class.len() as u32 - 1))
                .collect(),
        )
    }

    /// The item choice of a caching vector.
    pub fn choice_of(&self, s: &CachingVector) -> Result<Vec<usize>> {
        if s.len() != self.classes.len() {
            return Err(Error::Shape {
                expected: self.classes.len(),
                got: s.len(),
            });
        }
        s.statuses()
            .iter()
            .zip(&self.classes)
            .map(|(&st, class)| {
                let n = class.len() as u32 - 1;
                if st > n {
                    Err(Error::Domain(format!("status {st} exceeds {n}")))
                } else {
                    Ok(status_item(st, n))
                }
            })
            .collect()
    }
}

/// Profits and weights of the cache-placement instance.
///
/// STP mode: a = p_f·STP(status). Delay mode: a = p_f·(D_UT − D(status)), so
/// the uncached item has profit 0 and more profit means less delay.
pub fn build_instance(
    popularity: &[f64],
    values: &StrategyValues,
    capacity: u32,
    max_parts: u32,
    mode: Mode,
) -> Result<MckpInstance> {
    if max_parts == 0 {
        return Err(Error::Domain("need at least one subfile per file".into()));
    }
    let per_status = (0..=max_parts)
        .map(|st| values.get(st))
        .collect::<Result<Vec<_>>>()?;
    if per_status.iter().any(|v| !v.is_finite()) {
        return Err(Error::MissingValue("strategy values must be finite".into()));
    }
    let classes = popularity
        .iter()
        .map(|&p| {
            (0..=max_parts as usize)
                .map(|item| {
                    let st = item_status(item, max_parts);
                    let profit = match (mode, st) {
                        (_, 0) => 0.0,
                        (Mode::Stp, _) => p * per_status[st as usize],
                        (Mode::Delay, _) => p * (per_status[0] - per_status[st as usize]),
                    };
                    let weight = if st == 0 { 0.0 } else { 1.0 / st as f64 };
                    Item { profit, weight }
                })
                .collect()
        })
        .collect();
    Ok(MckpInstance {
        classes,
        capacity: capacity as f64,
    })
}

fn cmp_items(class: &[Item], a: usize, b: usize) -> Ordering {
    class[a]
        .weight
        .total_cmp(&class[b].weight)
        .then(class[b].profit.total_cmp(&class[a].profit))
        .then(a.cmp(&b))
}

/// Removes dominated items, then LP-dominated ones (the middle of three
/// collinear items goes too).
pub fn dominance_reduce(class: &[Item]) -> Result<ReducedClass> {
    reduce_subset(class, (0..class.len()).collect())
}

fn reduce_subset(class: &[Item], mut order: Vec<usize>) -> Result<ReducedClass> {
    if order.is_empty() {
        return Err(Error::Domain("cannot reduce an empty class".into()));
    }
    order.sort_by(|&a, &b| cmp_items(class, a, b));
    let mut kept: Vec<usize> = Vec::with_capacity(order.len());
    for j in order {
        if let Some(&last) = kept.last() {
            if class[j].profit <= class[last].profit {
                continue;
            }
        }
        kept.push(j);
    }
    let mut hull: Vec<usize> = Vec::with_capacity(kept.len());
    for k in kept {
        while hull.len() >= 2 {
            let (i, j) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let (a, b, c) = (class[i], class[j], class[k]);
            // j is LP-dominated when slope(j, k) ≥ slope(i, j)
            if (c.profit - b.profit) * (b.weight - a.weight) >= (b.profit - a.profit) * (c.weight - b.weight) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let slopes = hull
        .windows(2)
        .map(|w| (class[w[1]].profit - class[w[0]].profit) / (class[w[1]].weight - class[w[0]].weight))
        .collect();
    Ok(ReducedClass { items: hull, slopes })
}

fn min_weight(class: &[Item]) -> f64 {
    class.iter().map(|it| it.weight).fold(f64::INFINITY, f64::min)
}

/// Drops items that cannot fit even with every other class at its lightest
/// item, then reduces each class.
pub fn reduce_instance(instance: &MckpInstance) -> Result<Vec<ReducedClass>> {
    instance.validate()?;
    let base: f64 = instance.classes.iter().map(|c| min_weight(c)).sum();
    if base > instance.capacity + WEIGHT_TOL {
        return Err(Error::Infeasible {
            min_weight: base,
            capacity: instance.capacity,
        });
    }
    let room = instance.capacity - base + WEIGHT_TOL;
    instance
        .classes
        .iter()
        .map(|class| {
            let w0 = min_weight(class);
            let fits = (0..class.len()).filter(|&i| class[i].weight - w0 <= room).collect();
            reduce_subset(class, fits)
        })
        .collect()
}

struct Upgrade {
    slope: f64,
    class: usize,
    step: usize,
}

fn sorted_upgrades(reduced: &[ReducedClass]) -> Vec<Upgrade> {
    let mut ups: Vec<Upgrade> = reduced
        .iter()
        .enumerate()
        .flat_map(|(f, r)| {
            r.slopes.iter().enumerate().map(move |(k, &slope)| Upgrade {
                slope,
                class: f,
                step: k,
            })
        })
        .collect();
    ups.sort_by(|a, b| {
        b.slope
            .total_cmp(&a.slope)
            .then(a.class.cmp(&b.class))
            .then(a.step.cmp(&b.step))
    });
    ups
}

fn step_weight(instance: &MckpInstance, r: &ReducedClass, f: usize, k: usize) -> f64 {
    instance.classes[f][r.items[k + 1]].weight - instance.classes[f][r.items[k]].weight
}

fn base_weight(instance: &MckpInstance, reduced: &[ReducedClass]) -> f64 {
    reduced
        .iter()
        .enumerate()
        .map(|(f, r)| instance.classes[f][r.items[0]].weight)
        .sum()
}

/// Greedy over slope-ordered upgrades, returning the better of the greedy
/// fill and the split item alone; at least half the optimum when profits are
/// nonnegative.
pub fn greedy_mckp(instance: &MckpInstance) -> Result<MckpSolution> {
    let reduced = reduce_instance(instance)?;
    let cap = instance.capacity + WEIGHT_TOL;
    let mut pos = vec![0usize; reduced.len()];
    let mut weight = base_weight(instance, &reduced);
    let mut broken = vec![false; reduced.len()];
    let mut split: Option<(usize, usize)> = None;
    for up in sorted_upgrades(&reduced) {
        let f = up.class;
        if broken[f] || pos[f] != up.step {
            continue;
        }
        let dw = step_weight(instance, &reduced[f], f, up.step);
        if weight + dw <= cap {
            pos[f] += 1;
            weight += dw;
        } else {
            broken[f] = true;
            split.get_or_insert((f, up.step));
        }
    }
    let pick = |pos: &[usize]| -> Vec<usize> {
        pos.iter().zip(&reduced).map(|(&k, r)| r.items[k]).collect()
    };
    let filled = instance.solution(pick(&pos), Optimality::Greedy);
    let Some((f, k)) = split else {
        // every upgrade fit: the LP optimum is integral
        return Ok(MckpSolution {
            optimality: Optimality::Exact,
            ..filled
        });
    };
    if (instance.capacity - filled.weight).abs() <= WEIGHT_TOL {
        return Ok(filled);
    }
    let mut alone = vec![0usize; reduced.len()];
    alone[f] = k + 1;
    let alone = instance.solution(pick(&alone), Optimality::Greedy);
    Ok(if alone.profit > filled.profit { alone } else { filled })
}

fn weights_at(instance: &MckpInstance, reduced: &[ReducedClass], slope: f64) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (f, r) in reduced.iter().enumerate() {
        let gt = r.slopes.partition_point(|&s| s > slope);
        let ge = r.slopes.partition_point(|&s| s >= slope);
        lo += instance.classes[f][r.items[gt]].weight;
        hi += instance.classes[f][r.items[ge]].weight;
    }
    (lo, hi)
}

/// The optimal slope o*: taking every upgrade steeper than o* fits, taking
/// those at least as steep does not. When everything fits it is the
/// shallowest slope; `None` when no class has an upgrade.
///
/// Median-of-slopes search: each round evaluates both weight sums at the
/// median candidate and discards half of the candidates.
pub fn optimal_slope_partition(instance: &MckpInstance) -> Result<Option<f64>> {
    let reduced = reduce_instance(instance)?;
    let cap = instance.capacity + WEIGHT_TOL;
    let mut cand: Vec<f64> = reduced.iter().flat_map(|r| r.slopes.iter().copied()).collect();
    let shallowest = cand.iter().copied().reduce(f64::min);
    while !cand.is_empty() {
        let mid = cand.len() / 2;
        let (_, m, _) = cand.select_nth_unstable_by(mid, |a, b| a.total_cmp(b));
        let m = *m;
        let (lo, hi) = weights_at(instance, &reduced, m);
        if hi <= cap {
            cand.retain(|&s| s < m);
        } else if lo > cap {
            cand.retain(|&s| s > m);
        } else {
            return Ok(Some(m));
        }
    }
    Ok(shallowest)
}

/// Reference for [`optimal_slope_partition`]: sort every upgrade and return
/// the slope of the first one that overflows.
pub fn slope_by_sorting(instance: &MckpInstance) -> Result<Option<f64>> {
    let reduced = reduce_instance(instance)?;
    let cap = instance.capacity + WEIGHT_TOL;
    let mut weight = base_weight(instance, &reduced);
    let ups = sorted_upgrades(&reduced);
    for up in &ups {
        weight += step_weight(instance, &reduced[up.class], up.class, up.step);
        if weight > cap {
            return Ok(Some(up.slope));
        }
    }
    Ok(ups.last().map(|u| u.slope))
}

/// Exact optimum by enumerating every choice.
pub fn exhaustive_oracle(instance: &MckpInstance) -> Result<MckpSolution> {
    instance.validate()?;
    let size: f64 = instance.classes.iter().map(|c| c.len() as f64).product();
    if size > EXHAUSTIVE_BUDGET {
        return Err(Error::BudgetExceeded {
            size,
            budget: EXHAUSTIVE_BUDGET,
        });
    }
    let n = instance.classes.len();
    // lightest completion of classes f.. for pruning
    let mut rest = vec![0.0; n + 1];
    for f in (0..n).rev() {
        rest[f] = rest[f + 1] + min_weight(&instance.classes[f]);
    }
    if rest[0] > instance.capacity + WEIGHT_TOL {
        return Err(Error::Infeasible {
            min_weight: rest[0],
            capacity: instance.capacity,
        });
    }
    struct Search<'a> {
        inst: &'a MckpInstance,
        rest: Vec<f64>,
        current: Vec<usize>,
        best: Option<(f64, Vec<usize>)>,
    }
    fn visit(s: &mut Search, f: usize, profit: f64, weight: f64) {
        if f == s.inst.classes.len() {
            if s.best.as_ref().is_none_or(|(b, _)| profit > *b) {
                s.best = Some((profit, s.current.clone()));
            }
            return;
        }
        for (i, it) in s.inst.classes[f].iter().enumerate() {
            let w = weight + it.weight;
            if w + s.rest[f + 1] > s.inst.capacity + WEIGHT_TOL {
                continue;
            }
            s.current.push(i);
            visit(s, f + 1, profit + it.profit, w);
            s.current.pop();
        }
    }
    let mut s = Search {
        inst: instance,
        rest,
        current: Vec::with_capacity(n),
        best: None,
    };
    visit(&mut s, 0, 0.0, 0.0);
    let (_, choice) = s.best.expect("the lightest choice is feasible");
    Ok(instance.solution(choice, Optimality::Exact))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn it(profit: f64, weight: f64) -> Item {
        Item { profit, weight }
    }

    #[test]
    fn status_mapping_round_trips() {
        for n in 1..5 {
            for st in 0..=n {
                assert_eq!(item_status(status_item(st, n), n), st);
            }
        }
        assert_eq!(item_status(0, 3), 1);
        assert_eq!(item_status(3, 3), 0);
    }

    #[test]
    fn single_part_has_two_items() {
        let v = StrategyValues {
            joint: 0.9,
            parallel: vec![],
            uncached: 0.0,
        };
        let inst = build_instance(&[0.6, 0.4], &v, 1, 1, Mode::Stp).unwrap();
        assert!(inst.classes.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn hand_built_instance() {
        let stp = StrategyValues {
            joint: 0.9,
            parallel: vec![0.7],
            uncached: 0.0,
        };
        let inst = build_instance(&[0.75, 0.25], &stp, 1, 2, Mode::Stp).unwrap();
        let want = vec![
            vec![it(0.75 * 0.9, 1.0), it(0.75 * 0.7, 0.5), it(0.0, 0.0)],
            vec![it(0.25 * 0.9, 1.0), it(0.25 * 0.7, 0.5), it(0.0, 0.0)],
        ];
        assert_eq!(inst.classes, want);
        assert_eq!(inst.capacity, 1.0);

        let delay = StrategyValues {
            joint: 2.0,
            parallel: vec![3.0],
            uncached: 10.0,
        };
        let inst = build_instance(&[0.75, 0.25], &delay, 1, 2, Mode::Delay).unwrap();
        assert_eq!(inst.classes[0][0], it(0.75 * 8.0, 1.0));
        assert_eq!(inst.classes[1][1], it(0.25 * 7.0, 0.5));
        assert!(inst.classes.iter().all(|c| c[2].profit == 0.0));
    }

    #[test]
    fn missing_value_is_an_error() {
        let v = StrategyValues {
            joint: 0.9,
            parallel: vec![0.7],
            uncached: 0.0,
        };
        assert!(matches!(
            build_instance(&[1.0], &v, 1, 3, Mode::Stp),
            Err(Error::MissingValue(_))
        ));
    }

    #[test]
    fn identical_items_keep_the_first() {
        let r = dominance_reduce(&[it(1.0, 0.5), it(1.0, 0.5)]).unwrap();
        assert_eq!(r.items, vec![0]);
    }

    #[test]
    fn collinear_middle_goes() {
        let r = dominance_reduce(&[it(0.0, 0.0), it(1.0, 0.5), it(2.0, 1.0)]).unwrap();
        assert_eq!(r.items, vec![0, 2]);
        assert_eq!(r.slopes, vec![2.0]);
    }

    #[test]
    fn dominated_item_goes() {
        let r = dominance_reduce(&[it(0.0, 0.0), it(0.5, 1.0), it(0.6, 0.5)]).unwrap();
        assert_eq!(r.items, vec![0, 2]);
    }

    #[test]
    fn two_classes_slope_straddles_capacity() {
        let inst = MckpInstance {
            classes: vec![vec![it(0.0, 0.0), it(0.6, 0.5)], vec![it(0.0, 0.0), it(0.4, 0.5)]],
            capacity: 0.7,
        };
        // the 1.2 upgrade fits, the 0.8 one overflows
        assert_eq!(optimal_slope_partition(&inst).unwrap(), Some(0.8));
        assert_eq!(slope_by_sorting(&inst).unwrap(), Some(0.8));
    }

    #[test]
    fn items_that_never_fit_are_ignored() {
        let inst = MckpInstance {
            classes: vec![vec![it(0.0, 0.0), it(0.6, 1.0 / 3.0), it(0.8, 0.5), it(0.9, 1.0)]],
            capacity: 0.4,
        };
        assert_eq!(reduce_instance(&inst).unwrap()[0].items, vec![0, 1]);
        assert_eq!(optimal_slope_partition(&inst).unwrap(), Some(1.8));
    }

    #[test]
    fn everything_fits_gives_shallowest_slope() {
        let inst = MckpInstance {
            classes: vec![
                vec![it(0.0, 0.0), it(0.5, 0.5), it(0.6, 1.0)],
                vec![it(0.0, 0.0), it(0.3, 1.0)],
            ],
            capacity: 2.0,
        };
        assert!((optimal_slope_partition(&inst).unwrap().unwrap() - 0.2).abs() < 1e-12);
        let g = greedy_mckp(&inst).unwrap();
        assert_eq!(g.choice, vec![2, 1]);
        assert_eq!(g.optimality, Optimality::Exact);
    }

    #[test]
    fn no_upgrades() {
        let inst = MckpInstance {
            classes: vec![vec![it(0.0, 0.0)]],
            capacity: 1.0,
        };
        assert_eq!(optimal_slope_partition(&inst).unwrap(), None);
    }

    #[test]
    fn infeasible_is_reported() {
        let inst = MckpInstance {
            classes: vec![vec![it(1.0, 1.0)], vec![it(1.0, 0.5)]],
            capacity: 1.0,
        };
        assert!(matches!(greedy_mckp(&inst), Err(Error::Infeasible { .. })));
        assert!(matches!(exhaustive_oracle(&inst), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn oracle_single_class() {
        let inst = MckpInstance {
            classes: vec![vec![it(0.0, 0.0), it(0.7, 0.5), it(0.9, 1.0)]],
            capacity: 0.6,
        };
        assert_eq!(exhaustive_oracle(&inst).unwrap().choice, vec![1]);
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let inst = MckpInstance {
            classes: vec![vec![it(0.0, 0.0); 4]; 12],
            capacity: 1.0,
        };
        assert!(matches!(exhaustive_oracle(&inst), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn split_item_alone_can_win() {
        // Greedy fill takes the steep small item; the big one alone is better.
        let inst = MckpInstance {
            classes: vec![vec![it(0.0, 0.0), it(0.2, 0.1)], vec![it(0.0, 0.0), it(1.0, 1.0)]],
            capacity: 1.0,
        };
        let g = greedy_mckp(&inst).unwrap();
        assert_eq!(g.choice, vec![0, 1]);
        assert_eq!(g.profit, 1.0);
    }
}
