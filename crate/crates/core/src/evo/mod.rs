//! Evolutionary optimizers: a single-objective GA for reconstruction and
//! NSGA-II for drag minimization.

pub mod drag;
pub mod nsga2;
pub mod operators;
pub mod reconstruct;

pub use drag::{
    case_study_seed, evaluate_drag, optimize_drag, Draft, DragEvaluator, OperatingPoint,
    ParetoMember, ParetoSet,
};
pub use nsga2::{constrained_dominates, nsga2, Individual};
pub use operators::ParameterMask;
pub use reconstruct::{reconstruct_hull, reconstruct_hull_with, GenerationStats, Reconstruction};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ParameterRanges;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; defaults to one over the free gene count.
    pub mutation_rate: Option<f64>,
    pub eta_crossover: f64,
    pub eta_mutation: f64,
    /// Individuals copied unchanged into the next generation (single-objective GA).
    pub elitism: usize,
    pub repair_attempts: usize,
    /// Rejection budget per initial individual.
    pub sampling_budget: usize,
    pub seed: u64,
    pub mask: ParameterMask,
    pub bounds: ParameterRanges,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 100,
            generations: 100,
            tournament_size: 2,
            crossover_rate: 0.9,
            mutation_rate: None,
            eta_crossover: 15.0,
            eta_mutation: 20.0,
            elitism: 2,
            repair_attempts: 10,
            sampling_budget: 100_000,
            seed: 0,
            mask: ParameterMask::none(),
            bounds: ParameterRanges::full(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::InvalidInput("population must be at least 2".into()));
        }
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !rate_ok(self.crossover_rate) || !self.mutation_rate.is_none_or(rate_ok) {
            return Err(Error::InvalidInput(
                "crossover and mutation rates must lie in [0, 1]".into(),
            ));
        }
        if !(self.eta_crossover >= 0.0 && self.eta_mutation >= 0.0) {
            return Err(Error::InvalidInput(
                "distribution indices must be non-negative".into(),
            ));
        }
        if self.tournament_size == 0 || self.elitism > self.population {
            return Err(Error::InvalidInput(
                "bad tournament size or elitism count".into(),
            ));
        }
        self.bounds.validate()?;
        self.mask.validate()
    }
}
