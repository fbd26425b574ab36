//! Real-coded variation operators, masks and feasibility repair.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{
    check_feasibility, HullParameters, ParameterRanges, TermGroup, NUM_TERMS, TERMS,
};

/// Per-term frozen flags and the values frozen terms are pinned to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterMask {
    pub frozen: Vec<bool>,
    pub values: Vec<f64>,
}

impl Default for ParameterMask {
    fn default() -> Self {
        ParameterMask::none()
    }
}

impl ParameterMask {
    pub fn none() -> ParameterMask {
        ParameterMask {
            frozen: vec![false; NUM_TERMS],
            values: vec![0.0; NUM_TERMS],
        }
    }

    /// Freezes every term of `seed` except those in `free` groups.
    pub fn freeze_all_except(seed: &HullParameters, free: &[TermGroup]) -> ParameterMask {
        let frozen = TERMS.iter().map(|t| !free.contains(&t.group)).collect();
        ParameterMask {
            frozen,
            values: seed.0.to_vec(),
        }
    }

    /// Only the 14 bulb terms vary.
    pub fn bulbs(seed: &HullParameters) -> ParameterMask {
        ParameterMask::freeze_all_except(seed, &[TermGroup::BowBulb, TermGroup::SternBulb])
    }

    /// The 20 taper terms and the 14 bulb terms vary.
    pub fn ends(seed: &HullParameters) -> ParameterMask {
        ParameterMask::freeze_all_except(
            seed,
            &[
                TermGroup::BowTaper,
                TermGroup::SternTaper,
                TermGroup::BowBulb,
                TermGroup::SternBulb,
            ],
        )
    }

    pub fn freeze(&mut self, term: usize, value: f64) {
        self.frozen[term] = true;
        self.values[term] = value;
    }

    pub fn validate(&self) -> Result<()> {
        if self.frozen.len() != NUM_TERMS || self.values.len() != NUM_TERMS {
            return Err(Error::InvalidInput(format!(
                "mask must have {NUM_TERMS} entries"
            )));
        }
        if self
            .frozen
            .iter()
            .zip(&self.values)
            .any(|(&f, v)| f && !v.is_finite())
        {
            return Err(Error::InvalidInput("non-finite frozen value".into()));
        }
        Ok(())
    }

    pub fn free_count(&self) -> usize {
        self.frozen.iter().filter(|&&f| !f).count()
    }

    pub fn apply(&self, p: &mut HullParameters) {
        for i in 0..NUM_TERMS {
            if self.frozen[i] {
                p.0[i] = self.values[i];
            }
        }
    }
}

/// Terms the operators may change: not frozen and with a non-empty range.
pub fn free_terms(mask: &ParameterMask, bounds: &ParameterRanges) -> Vec<usize> {
    (0..NUM_TERMS)
        .filter(|&i| !mask.frozen[i] && bounds.upper[i] > bounds.lower[i])
        .collect()
}

pub fn random_individual<R: Rng + ?Sized>(
    mask: &ParameterMask,
    bounds: &ParameterRanges,
    rng: &mut R,
) -> HullParameters {
    let mut p = HullParameters(std::array::from_fn(|i| bounds.lower[i]));
    for i in 0..NUM_TERMS {
        if !mask.frozen[i] {
            p.0[i] = bounds.sample_term(i, rng);
        }
    }
    mask.apply(&mut p);
    p
}

/// Rejection-samples a feasible individual that honors the mask.
pub fn random_feasible<R: Rng + ?Sized>(
    mask: &ParameterMask,
    bounds: &ParameterRanges,
    rng: &mut R,
    budget: usize,
) -> Result<HullParameters> {
    for _ in 0..budget {
        let p = random_individual(mask, bounds, rng);
        if check_feasibility(&p)?.feasible {
            return Ok(p);
        }
    }
    Err(Error::SamplingFailure { attempts: budget })
}

/// Bounded simulated binary crossover on the listed genes.
pub fn sbx<R: Rng + ?Sized>(
    a: &HullParameters,
    b: &HullParameters,
    genes: &[usize],
    bounds: &ParameterRanges,
    eta: f64,
    rng: &mut R,
) -> (HullParameters, HullParameters) {
    let mut c1 = *a;
    let mut c2 = *b;
    for &i in genes {
        if rng.random::<f64>() > 0.5 {
            continue;
        }
        let (x1, x2) = (a.0[i].min(b.0[i]), a.0[i].max(b.0[i]));
        if x2 - x1 < 1e-14 {
            continue;
        }
        let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
        let u: f64 = rng.random();
        let child = |beta: f64| {
            let alpha = 2.0 - beta.powf(-(eta + 1.0));
            if u <= 1.0 / alpha {
                (u * alpha).powf(1.0 / (eta + 1.0))
            } else {
                (1.0 / (2.0 - u * alpha)).powf(1.0 / (eta + 1.0))
            }
        };
        let bq1 = child(1.0 + 2.0 * (x1 - lo) / (x2 - x1));
        let bq2 = child(1.0 + 2.0 * (hi - x2) / (x2 - x1));
        let y1 = (0.5 * ((x1 + x2) - bq1 * (x2 - x1))).clamp(lo, hi);
        let y2 = (0.5 * ((x1 + x2) + bq2 * (x2 - x1))).clamp(lo, hi);
        if rng.random::<bool>() {
            c1.0[i] = y2;
            c2.0[i] = y1;
        } else {
            c1.0[i] = y1;
            c2.0[i] = y2;
        }
    }
    (c1, c2)
}

/// Polynomial mutation, each listed gene with probability `rate`.
pub fn polynomial_mutation<R: Rng + ?Sized>(
    p: &mut HullParameters,
    genes: &[usize],
    bounds: &ParameterRanges,
    rate: f64,
    eta: f64,
    rng: &mut R,
) {
    for &i in genes {
        if rng.random::<f64>() >= rate {
            continue;
        }
        let (lo, hi) = (bounds.lower[i], bounds.upper[i]);
        let w = hi - lo;
        if w <= 0.0 {
            continue;
        }
        let x = p.0[i].clamp(lo, hi);
        let (d1, d2) = ((x - lo) / w, (hi - x) / w);
        let u: f64 = rng.random();
        let pow = 1.0 / (eta + 1.0);
        let dq = if u < 0.5 {
            let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
            v.powf(pow) - 1.0
        } else {
            let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
            1.0 - v.powf(pow)
        };
        p.0[i] = (x + dq * w).clamp(lo, hi);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RepairOutcome {
    pub attempts: usize,
    pub feasible: bool,
    pub violations: usize,
}

/// Resamples the free terms of every violated constraint until the hull is
/// feasible or `max_attempts` rounds have been spent.
pub fn repair<R: Rng + ?Sized>(
    p: &mut HullParameters,
    mask: &ParameterMask,
    bounds: &ParameterRanges,
    max_attempts: usize,
    rng: &mut R,
) -> Result<RepairOutcome> {
    let mut report = check_feasibility(p)?;
    let mut attempts = 0;
    while !report.feasible && attempts < max_attempts {
        attempts += 1;
        let mut touched = [false; NUM_TERMS];
        for c in report.violations() {
            for &t in c.terms {
                touched[t] = true;
            }
        }
        for (t, &hit) in touched.iter().enumerate() {
            if hit && !mask.frozen[t] && bounds.upper[t] >= bounds.lower[t] {
                p.0[t] = bounds.sample_term(t, rng);
            }
        }
        report = check_feasibility(p)?;
    }
    Ok(RepairOutcome {
        attempts,
        feasible: report.feasible,
        violations: report.violation_count(),
    })
}
