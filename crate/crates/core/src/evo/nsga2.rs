//! Constrained non-dominated sorting, crowding distance and the NSGA-II loop.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operators::{free_terms, polynomial_mutation, random_feasible, repair, sbx};
use super::GaConfig;
use crate::error::{Error, Result};
use crate::params::HullParameters;

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub params: HullParameters,
    pub objectives: Vec<f64>,
    pub feasible: bool,
    /// Violated constraints; zero when feasible.
    pub violations: usize,
    pub rank: usize,
    pub crowding: f64,
}

impl Individual {
    pub fn new(params: HullParameters, objectives: Vec<f64>, violations: usize) -> Individual {
        Individual {
            params,
            objectives,
            feasible: violations == 0,
            violations,
            rank: 0,
            crowding: 0.0,
        }
    }
}

/// Feasible beats infeasible; fewer violations beats more; otherwise Pareto
/// dominance on the objectives (all minimized).
pub fn constrained_dominates(a: &Individual, b: &Individual) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violations < b.violations,
        (true, true) => {
            let mut strictly = false;
            for (x, y) in a.objectives.iter().zip(&b.objectives) {
                if x > y {
                    return false;
                }
                if x < y {
                    strictly = true;
                }
            }
            strictly
        }
    }
}

/// Fronts of indices, best first. Ranks are written into the population.
pub fn non_dominated_sort(pop: &mut [Individual]) -> Vec<Vec<usize>> {
    let n = pop.len();
    let mut dominated: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if constrained_dominates(&pop[i], &pop[j]) {
                dominated[i].push(j);
                count[j] += 1;
            } else if constrained_dominates(&pop[j], &pop[i]) {
                dominated[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    let mut rank = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            pop[i].rank = rank;
            for &j in &dominated[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
        rank += 1;
    }
    fronts
}

/// Crowding distance within one front; boundary members get infinity.
pub fn assign_crowding(pop: &mut [Individual], front: &[usize]) {
    for &i in front {
        pop[i].crowding = 0.0;
    }
    if front.is_empty() {
        return;
    }
    let m = pop[front[0]].objectives.len();
    for k in 0..m {
        let mut order = front.to_vec();
        order.sort_by(|&a, &b| {
            pop[a].objectives[k]
                .total_cmp(&pop[b].objectives[k])
                .then(a.cmp(&b))
        });
        let lo = pop[order[0]].objectives[k];
        let hi = pop[order[order.len() - 1]].objectives[k];
        pop[order[0]].crowding = f64::INFINITY;
        pop[order[order.len() - 1]].crowding = f64::INFINITY;
        let span = hi - lo;
        if !(span > 0.0 && span.is_finite()) {
            continue;
        }
        for w in 1..order.len() - 1 {
            let d = (pop[order[w + 1]].objectives[k] - pop[order[w - 1]].objectives[k]) / span;
            pop[order[w]].crowding += d;
        }
    }
}

/// Keeps `n` of `pop` by rank, then by crowding distance within the last front.
pub fn select_survivors(mut pop: Vec<Individual>, n: usize) -> Vec<Individual> {
    let fronts = non_dominated_sort(&mut pop);
    for f in &fronts {
        assign_crowding(&mut pop, f);
    }
    let mut keep = Vec::with_capacity(n);
    for f in fronts {
        if keep.len() + f.len() <= n {
            keep.extend(f);
        } else {
            let mut f = f;
            f.sort_by(|&a, &b| pop[b].crowding.total_cmp(&pop[a].crowding).then(a.cmp(&b)));
            keep.extend(f.into_iter().take(n - keep.len()));
        }
        if keep.len() == n {
            break;
        }
    }
    keep.sort_unstable();
    let mut slots: Vec<Option<Individual>> = pop.into_iter().map(Some).collect();
    keep.into_iter()
        .map(|i| slots[i].take().expect("index kept once"))
        .collect()
}

fn crowded_better(a: &Individual, b: &Individual) -> bool {
    a.rank < b.rank || (a.rank == b.rank && a.crowding > b.crowding)
}

pub(crate) fn tournament<'a, R: Rng + ?Sized>(
    pop: &'a [Individual],
    size: usize,
    rng: &mut R,
) -> &'a Individual {
    let mut best = &pop[rng.random_range(0..pop.len())];
    for _ in 1..size.max(1) {
        let c = &pop[rng.random_range(0..pop.len())];
        if crowded_better(c, best) {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VariationStats {
    pub children: usize,
    pub repaired: usize,
    pub infeasible: usize,
}

/// Builds `n` children by tournament selection, SBX, polynomial mutation and repair.
pub(crate) fn make_children<R: Rng + ?Sized>(
    parents: &[Individual],
    n: usize,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<(Vec<(HullParameters, usize)>, VariationStats)> {
    let genes = free_terms(&cfg.mask, &cfg.bounds);
    let rate = cfg.mutation_rate.unwrap_or(1.0 / genes.len().max(1) as f64);
    let mut out = Vec::with_capacity(n);
    let mut stats = VariationStats::default();
    while out.len() < n {
        let a = tournament(parents, cfg.tournament_size, rng);
        let b = tournament(parents, cfg.tournament_size, rng);
        let (c1, c2) = if rng.random::<f64>() < cfg.crossover_rate {
            sbx(
                &a.params,
                &b.params,
                &genes,
                &cfg.bounds,
                cfg.eta_crossover,
                rng,
            )
        } else {
            (a.params, b.params)
        };
        for mut c in [c1, c2] {
            if out.len() == n {
                break;
            }
            polynomial_mutation(&mut c, &genes, &cfg.bounds, rate, cfg.eta_mutation, rng);
            cfg.mask.apply(&mut c);
            let r = repair(&mut c, &cfg.mask, &cfg.bounds, cfg.repair_attempts, rng)?;
            stats.children += 1;
            if r.attempts > 0 && r.feasible {
                stats.repaired += 1;
            }
            if !r.feasible {
                stats.infeasible += 1;
            }
            out.push((c, r.violations));
        }
    }
    Ok((out, stats))
}

/// Initial population: the optional seed plus feasible random samples under the mask.
pub(crate) fn initial_population<R: Rng + ?Sized>(
    cfg: &GaConfig,
    seed_hull: Option<&HullParameters>,
    rng: &mut R,
) -> Result<Vec<HullParameters>> {
    let mut out = Vec::with_capacity(cfg.population);
    if let Some(s) = seed_hull {
        let mut s = *s;
        cfg.mask.apply(&mut s);
        if crate::params::check_feasibility(&s)?.feasible {
            out.push(s);
        }
    }
    while out.len() < cfg.population {
        out.push(random_feasible(
            &cfg.mask,
            &cfg.bounds,
            rng,
            cfg.sampling_budget,
        )?);
    }
    Ok(out)
}

/// Per-generation summary of a multi-objective run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: usize,
    pub front_size: usize,
    pub feasible: usize,
    /// Smallest value of each objective among feasible members.
    pub best: Vec<f64>,
    pub variation: VariationStats,
}

/// Objective values of one hull, or `None` when the hull cannot be evaluated
/// at the requested condition (it then counts as one extra violation).
pub type Evaluation = Result<Option<Vec<f64>>>;

/// Multi-objective NSGA-II. `evaluate` is called only on feasible hulls and
/// must be deterministic; it runs on the rayon pool.
pub fn nsga2<F>(
    cfg: &GaConfig,
    seed_hull: Option<&HullParameters>,
    objectives: usize,
    evaluate: F,
) -> Result<(Vec<Individual>, Vec<GenerationSummary>)>
where
    F: Fn(&HullParameters) -> Evaluation + Sync,
{
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let eval_all = |items: Vec<(HullParameters, usize)>| -> Result<Vec<Individual>> {
        items
            .into_par_iter()
            .map(|(p, v)| {
                if v > 0 {
                    return Ok(Individual::new(p, vec![f64::INFINITY; objectives], v));
                }
                match evaluate(&p)? {
                    Some(obj) if obj.len() == objectives && obj.iter().all(|x| !x.is_nan()) => {
                        Ok(Individual::new(p, obj, 0))
                    }
                    Some(obj) => Err(Error::Optimizer(format!(
                        "evaluator returned {} objectives",
                        obj.len()
                    ))),
                    None => Ok(Individual::new(p, vec![f64::INFINITY; objectives], 1)),
                }
            })
            .collect()
    };
    let start = initial_population(cfg, seed_hull, &mut rng)?;
    let mut pop = eval_all(start.into_iter().map(|p| (p, 0)).collect())?;
    pop = select_survivors(pop, cfg.population);
    let mut history = Vec::with_capacity(cfg.generations);
    for g in 1..=cfg.generations {
        let (children, variation) = make_children(&pop, cfg.population, cfg, &mut rng)?;
        let mut all = pop;
        all.extend(eval_all(children)?);
        pop = select_survivors(all, cfg.population);
        let best = (0..objectives)
            .map(|k| {
                pop.iter()
                    .filter(|i| i.feasible)
                    .map(|i| i.objectives[k])
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        history.push(GenerationSummary {
            generation: g,
            front_size: pop.iter().filter(|i| i.rank == 0).count(),
            feasible: pop.iter().filter(|i| i.feasible).count(),
            best,
            variation,
        });
        log::debug!("generation {g}: {:?}", history.last().map(|h| &h.best));
    }
    Ok((pop, history))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ind(obj: &[f64], violations: usize) -> Individual {
        Individual::new(
            HullParameters::prism(100.0, 0.15, 0.1, 0.2),
            obj.to_vec(),
            violations,
        )
    }

    #[test]
    fn dominance_rules() {
        let a = ind(&[1.0, 1.0], 0);
        let b = ind(&[1.0, 2.0], 0);
        let c = ind(&[0.5, 3.0], 0);
        assert!(constrained_dominates(&a, &b));
        assert!(!constrained_dominates(&b, &a));
        assert!(!constrained_dominates(&a, &c) && !constrained_dominates(&c, &a));
        assert!(!constrained_dominates(&a, &a.clone()));
        let bad1 = ind(&[0.0, 0.0], 1);
        let bad3 = ind(&[0.0, 0.0], 3);
        assert!(constrained_dominates(&b, &bad1));
        assert!(!constrained_dominates(&bad1, &b));
        assert!(constrained_dominates(&bad1, &bad3));
    }

    #[test]
    fn sorting_and_crowding() {
        let mut pop = vec![
            ind(&[1.0, 4.0], 0),
            ind(&[2.0, 2.0], 0),
            ind(&[4.0, 1.0], 0),
            ind(&[3.0, 3.0], 0),
            ind(&[5.0, 5.0], 0),
            ind(&[0.0, 0.0], 2),
        ];
        let fronts = non_dominated_sort(&mut pop);
        assert_eq!(fronts, vec![vec![0, 1, 2], vec![3], vec![4], vec![5]]);
        assign_crowding(&mut pop, &fronts[0]);
        assert!(pop[0].crowding.is_infinite() && pop[2].crowding.is_infinite());
        assert!((pop[1].crowding - 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_keeps_boundary_members() {
        let pop: Vec<Individual> = (0..10)
            .map(|i| {
                let x = i as f64;
                ind(&[x, 9.0 - x + if i % 3 == 0 { 0.0 } else { 0.01 * x }], 0)
            })
            .collect();
        let kept = select_survivors(pop, 4);
        assert_eq!(kept.len(), 4);
        assert!(kept.iter().any(|i| i.objectives[0] == 0.0));
        assert!(kept.iter().any(|i| i.objectives[0] == 9.0));
    }
}
