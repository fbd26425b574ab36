//! Fitting hull parameters to a target point cloud by minimizing the Chamfer distance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nsga2::{initial_population, make_children, Individual, VariationStats};
use super::GaConfig;
use crate::chamfer::{ChamferResult, ChamferTarget};
use crate::error::{Error, Result};
use crate::geom::cloud::{generate_point_cloud, PointCloud};
use crate::geom::surface::HullSurface;
use crate::params::{idx, HullParameters};

/// Stations per side used for candidate clouds.
pub const RECONSTRUCTION_NX: usize = 150;
pub const RECONSTRUCTION_NZ: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_cd: f64,
    /// Mean over feasible members.
    pub mean_cd: f64,
    pub feasible: usize,
    pub variation: VariationStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub params: HullParameters,
    pub chamfer: ChamferResult,
    pub history: Vec<GenerationStats>,
}

/// Candidate cloud for `p`, mirrored, at the reconstruction resolution.
pub fn candidate_cloud(p: &HullParameters, nx: usize, nz: usize) -> Result<PointCloud> {
    let s = HullSurface::new(p)?;
    generate_point_cloud(&s, nx, nz, None, true)
}

pub fn reconstruct_hull(target: &PointCloud, cfg: &GaConfig) -> Result<Reconstruction> {
    reconstruct_hull_with(target, cfg, RECONSTRUCTION_NX, RECONSTRUCTION_NZ)
}

fn sort_key(a: &Individual, b: &Individual) -> std::cmp::Ordering {
    b.feasible
        .cmp(&a.feasible)
        .then(a.violations.cmp(&b.violations))
        .then(a.objectives[0].total_cmp(&b.objectives[0]))
}

/// Generational GA with elitism. The loa term is frozen to the x extent of
/// the target; the mask in `cfg` is otherwise honored.
pub fn reconstruct_hull_with(
    target: &PointCloud,
    cfg: &GaConfig,
    nx: usize,
    nz: usize,
) -> Result<Reconstruction> {
    if target.is_empty() {
        return Err(Error::InvalidInput("empty target cloud".into()));
    }
    let loa = target.x_extent();
    if !(loa > 0.0) {
        return Err(Error::InvalidInput("target cloud has no length".into()));
    }
    let mut cfg = cfg.clone();
    cfg.mask.freeze(idx::LOA, loa);
    cfg.validate()?;
    let goal = ChamferTarget::with_reference(target.clone(), loa)?;

    let eval = |items: Vec<(HullParameters, usize)>| -> Result<Vec<Individual>> {
        items
            .into_par_iter()
            .map(|(p, v)| {
                if v > 0 {
                    return Ok(Individual::new(p, vec![f64::INFINITY], v));
                }
                let cloud = candidate_cloud(&p, nx, nz)?;
                let cd = goal.distance(&cloud)?.cd;
                Ok(Individual::new(p, vec![cd], 0))
            })
            .collect()
    };
    let rank = |pop: &mut Vec<Individual>| {
        pop.sort_by(sort_key);
        for (r, ind) in pop.iter_mut().enumerate() {
            ind.rank = r;
            ind.crowding = 0.0;
        }
    };
    let stats = |g: usize, pop: &[Individual], variation: VariationStats| {
        let feas: Vec<f64> = pop
            .iter()
            .filter(|i| i.feasible)
            .map(|i| i.objectives[0])
            .collect();
        GenerationStats {
            generation: g,
            best_cd: feas.iter().cloned().fold(f64::INFINITY, f64::min),
            mean_cd: feas.iter().sum::<f64>() / feas.len().max(1) as f64,
            feasible: feas.len(),
            variation,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = initial_population(&cfg, None, &mut rng)?;
    let mut pop = eval(start.into_iter().map(|p| (p, 0)).collect())?;
    rank(&mut pop);
    let mut history = vec![stats(0, &pop, VariationStats::default())];
    for g in 1..=cfg.generations {
        let elites = cfg.elitism.min(pop.len());
        let (children, variation) = make_children(&pop, cfg.population - elites, &cfg, &mut rng)?;
        let mut next: Vec<Individual> = pop[..elites].to_vec();
        next.extend(eval(children)?);
        pop = next;
        rank(&mut pop);
        history.push(stats(g, &pop, variation));
        log::debug!("generation {g}: best cd {:.6e}", history[g].best_cd);
    }
    let best = pop
        .iter()
        .find(|i| i.feasible)
        .ok_or_else(|| Error::Optimizer("no feasible individual survived".into()))?;
    let chamfer = goal.distance(&candidate_cloud(&best.params, nx, nz)?)?;
    Ok(Reconstruction {
        params: best.params,
        chamfer,
        history,
    })
}
