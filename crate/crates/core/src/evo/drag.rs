//! Two-objective drag minimization (total resistance and wave drag
//! coefficient at one operating point) with NSGA-II.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::nsga2::{non_dominated_sort, nsga2, Evaluation, GenerationSummary, Individual};
use super::GaConfig;
use crate::error::{Error, Result};
use crate::geom::hydrostatics::{hydrostatics, scale_to_displacement};
use crate::geom::surface::HullSurface;
use crate::hydro::table::{interpolate_cw, DragTable, NUM_CONDITIONS};
use crate::hydro::{
    friction_resistance, speed_to_froude, total_resistance, waterline_length,
    wave_drag_coefficient, FlowConditions,
};
use crate::params::{idx, HullParameters};
use crate::surrogate::SurrogateModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Draft {
    /// Metres above the keel.
    Absolute(f64),
    /// Fraction of the hull depth.
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    /// m/s
    pub speed: f64,
    pub draft: Draft,
    /// When set, each hull is rescaled to this displaced volume (m^3) at its
    /// draft fraction before evaluation. Requires a fractional draft.
    pub displacement: Option<f64>,
}

impl OperatingPoint {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "speed must be positive, got {}",
                self.speed
            )));
        }
        match self.draft {
            Draft::Absolute(t) if !(t > 0.0) => Err(Error::InvalidInput(format!(
                "draft must be positive, got {t}"
            ))),
            Draft::Fraction(f) if !(f > 0.0 && f <= 1.0) => Err(Error::InvalidInput(format!(
                "draft fraction {f} outside (0, 1]"
            ))),
            Draft::Absolute(_) if self.displacement.is_some() => Err(Error::InvalidInput(
                "a target displacement needs the draft as a fraction of depth".into(),
            )),
            _ => match self.displacement {
                Some(v) if !(v > 0.0) => Err(Error::InvalidInput(format!(
                    "displacement must be positive, got {v}"
                ))),
                _ => Ok(()),
            },
        }
    }

    /// The hull as evaluated (rescaled when a displacement is set) and its draft.
    pub fn resolve(&self, p: &HullParameters) -> Result<(HullParameters, f64)> {
        match (self.draft, self.displacement) {
            (Draft::Fraction(f), Some(v)) => {
                let q = scale_to_displacement(p, v, f)?;
                let t = f * q.depth();
                Ok((q, t))
            }
            (Draft::Fraction(f), None) => Ok((*p, f * p.depth())),
            (Draft::Absolute(t), _) => Ok((*p, t)),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum DragEvaluator<'a> {
    /// Michell wave resistance plus ITTC friction.
    Direct,
    /// Wave drag coefficient from the surrogate, interpolated to the
    /// operating Froude number and draft; friction as in the direct path.
    Surrogate(&'a SurrogateModel),
}

/// Objectives `[Rt, Cw]` of `p`, or `None` when the operating point lies
/// outside what the hull (or the surrogate grid) can represent.
pub fn evaluate_drag(
    p: &HullParameters,
    op: &OperatingPoint,
    evaluator: DragEvaluator<'_>,
) -> Evaluation {
    let (q, draft) = match op.resolve(p) {
        Ok(v) => v,
        Err(Error::Domain(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    if draft > q.depth() {
        return Ok(None);
    }
    let surface = HullSurface::new(&q)?;
    let cond = FlowConditions::new(op.speed, draft);
    match evaluator {
        DragEvaluator::Direct => {
            let r = total_resistance(&surface, &cond)?;
            let cw = wave_drag_coefficient(r.rw, &cond, q.loa())?;
            Ok(Some(vec![r.rt, cw]))
        }
        DragEvaluator::Surrogate(model) => {
            let pred = model.predict(q.shape_terms())?;
            if pred.len() != NUM_CONDITIONS {
                return Err(Error::InvalidInput(
                    "surrogate must predict 32 coefficients".into(),
                ));
            }
            let lwl = waterline_length(&surface, draft);
            let froude = speed_to_froude(op.speed, lwl, cond.gravity)?;
            let table = DragTable {
                loa: q.loa(),
                depth: q.depth(),
                lwl: [0.0; 4],
                aws: [0.0; 4],
                cw: pred.iter().map(|v| 10f64.powf(*v)).collect(),
                rw: vec![0.0; NUM_CONDITIONS],
                rf: vec![0.0; NUM_CONDITIONS],
                rt: vec![0.0; NUM_CONDITIONS],
            };
            let cw = match interpolate_cw(&table, froude, draft / q.depth()) {
                Ok(c) => c,
                Err(Error::Domain(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let rw = cw * 0.5 * cond.density * op.speed * op.speed * q.loa() * q.loa();
            let aws = hydrostatics(&surface, draft)?.wetted_area;
            let rf = friction_resistance(&cond, lwl, aws)?;
            Ok(Some(vec![rw + rf, cw]))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoMember {
    /// Parameters as optimized (before any displacement scaling).
    pub params: HullParameters,
    /// Direct-evaluated `[Rt, Cw]`.
    pub objectives: Vec<f64>,
    /// `[Rt, Cw]` from the surrogate when it drove the search.
    pub surrogate_objectives: Option<Vec<f64>>,
    pub feasible: bool,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoSet {
    /// Feasible final population ordered by rank, then Rt.
    pub members: Vec<ParetoMember>,
    pub history: Vec<GenerationSummary>,
    /// Direct `[Rt, Cw]` of the seed hull when one was given.
    pub seed_objectives: Option<Vec<f64>>,
}

impl ParetoSet {
    pub fn front(&self) -> impl Iterator<Item = &ParetoMember> {
        self.members.iter().filter(|m| m.rank == 0)
    }

    pub fn min_rt(&self) -> Option<&ParetoMember> {
        self.members
            .iter()
            .min_by(|a, b| a.objectives[0].total_cmp(&b.objectives[0]))
    }
}

/// Container-like prismatic hull: 200 m long, 32 m beam, 20 m depth, 30%
/// tapers at both ends, design draft 12.5 m, stem raked 30 degrees, no bulbs.
pub fn case_study_seed() -> HullParameters {
    let mut p = HullParameters::prism(200.0, 0.16, 0.1, 0.3);
    p.set(idx::DESIGN_DRAFT, 0.625);
    p.set(idx::BOW_RAKE, 30.0);
    p
}

/// NSGA-II over `[Rt, Cw]` at `op`. With a surrogate evaluator the final
/// population is re-evaluated directly and ranked on the direct values.
pub fn optimize_drag(
    seed_hull: Option<&HullParameters>,
    op: &OperatingPoint,
    cfg: &GaConfig,
    evaluator: DragEvaluator<'_>,
) -> Result<ParetoSet> {
    op.validate()?;
    if let Some(s) = seed_hull {
        for i in 0..s.0.len() {
            if cfg.mask.frozen[i] && cfg.mask.values[i] != s.0[i] {
                return Err(Error::InvalidInput(format!(
                    "mask value for {} differs from the seed hull",
                    crate::params::TERMS[i].name
                )));
            }
        }
    }
    let (pop, history) = nsga2(cfg, seed_hull, 2, |p| evaluate_drag(p, op, evaluator))?;
    let direct = |p: &HullParameters| evaluate_drag(p, op, DragEvaluator::Direct);
    let seed_objectives = match seed_hull {
        Some(s) => direct(s)?,
        None => None,
    };

    let surrogate = matches!(evaluator, DragEvaluator::Surrogate(_));
    let mut final_pop: Vec<Individual> = pop.into_iter().filter(|i| i.feasible).collect();
    let mut surrogate_obj = Vec::new();
    if surrogate {
        let re: Vec<Option<Vec<f64>>> = final_pop
            .par_iter()
            .map(|i| direct(&i.params))
            .collect::<Result<_>>()
            .map_err(|e| Error::Optimizer(format!("direct re-evaluation failed: {e}")))?;
        let mut kept = Vec::new();
        for (mut ind, obj) in final_pop.into_iter().zip(re) {
            if let Some(o) = obj {
                surrogate_obj.push(Some(std::mem::replace(&mut ind.objectives, o)));
                kept.push(ind);
            }
        }
        final_pop = kept;
    } else {
        surrogate_obj = vec![None; final_pop.len()];
    }
    if final_pop.is_empty() {
        return Err(Error::Optimizer(
            "no feasible hull in the final population".into(),
        ));
    }
    non_dominated_sort(&mut final_pop);
    let mut members: Vec<ParetoMember> = final_pop
        .into_iter()
        .zip(surrogate_obj)
        .map(|(i, s)| ParetoMember {
            params: i.params,
            objectives: i.objectives,
            surrogate_objectives: s,
            feasible: true,
            rank: i.rank,
        })
        .collect();
    members.sort_by(|a, b| {
        a.rank
            .cmp(&b.rank)
            .then(a.objectives[0].total_cmp(&b.objectives[0]))
    });
    Ok(ParetoSet {
        members,
        history,
        seed_objectives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evo::ParameterMask;
    use crate::hydro::KNOT;
    use crate::params::check_feasibility;

    fn op() -> OperatingPoint {
        OperatingPoint {
            speed: 25.0 * KNOT,
            draft: Draft::Absolute(12.5),
            displacement: None,
        }
    }

    #[test]
    fn seed_is_feasible() {
        let s = case_study_seed();
        assert!(check_feasibility(&s).unwrap().feasible);
        assert!((s.depth() - 20.0).abs() < 1e-12);
        assert!((s.design_draft() - 12.5).abs() < 1e-12);
        let obj = evaluate_drag(&s, &op(), DragEvaluator::Direct)
            .unwrap()
            .unwrap();
        assert!(obj[0] > 0.0 && obj[1] > 0.0);
    }

    #[test]
    fn operating_point_validation() {
        let mut o = op();
        o.displacement = Some(1000.0);
        assert!(o.validate().is_err());
        o.draft = Draft::Fraction(0.5);
        assert!(o.validate().is_ok());
        let (q, t) = o.resolve(&case_study_seed()).unwrap();
        let v =
            crate::geom::hydrostatics::displaced_volume(&HullSurface::new(&q).unwrap(), t).unwrap();
        assert!((v / 1000.0 - 1.0).abs() < 1e-6);
        o.speed = 0.0;
        assert!(o.validate().is_err());
    }

    #[test]
    fn bulb_mask_only_changes_bulbs() {
        let seed = case_study_seed();
        let cfg = GaConfig {
            population: 8,
            generations: 2,
            seed: 1,
            mask: ParameterMask::bulbs(&seed),
            ..Default::default()
        };
        let set = optimize_drag(Some(&seed), &op(), &cfg, DragEvaluator::Direct).unwrap();
        assert!(!set.members.is_empty());
        for m in &set.members {
            for i in 0..31 {
                assert_eq!(m.params.0[i], seed.0[i]);
            }
            assert!(check_feasibility(&m.params).unwrap().feasible);
        }
        let front: Vec<_> = set.front().collect();
        for a in &front {
            for b in &front {
                let dom = a.objectives[0] <= b.objectives[0]
                    && a.objectives[1] <= b.objectives[1]
                    && (a.objectives[0] < b.objectives[0] || a.objectives[1] < b.objectives[1]);
                assert!(!dom);
            }
        }
        // The seed is in the initial population, so the best Rt cannot be worse.
        assert!(set.min_rt().unwrap().objectives[0] <= set.seed_objectives.as_ref().unwrap()[0]);
    }
}
