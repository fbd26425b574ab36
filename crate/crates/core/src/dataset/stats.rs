//! Dataset statistics: nearest-neighbor spread, Cw distribution and the
//! minimum-drag hull per displacement.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{load_dataset_params, DatasetManifest};
use crate::error::{Error, Result};
use crate::evo::{evaluate_drag, Draft, DragEvaluator, OperatingPoint};
use crate::hydro::table::{interpolate_cw, load_drag};
use crate::hydro::KNOT;
use crate::params::{idx, HullParameters, NUM_SHAPE_TERMS, TERMS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsOptions {
    /// Condition for the Cw summary.
    pub froude: f64,
    pub draft_frac: f64,
    /// m/s
    pub speed: f64,
    /// Target displaced volumes (m^3) for the minimum-drag query.
    pub displacements: Vec<f64>,
    /// Draft as a fraction of depth for the query; each hull's design draft when `None`.
    pub query_draft_frac: Option<f64>,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            froude: 0.3,
            draft_frac: 0.5,
            speed: 25.0 * KNOT,
            displacements: vec![500.0, 1000.0, 5000.0],
            query_draft_frac: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NnPoint {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwSummary {
    pub subset: u8,
    pub hulls: usize,
    pub min: f64,
    /// 10th to 90th percentiles.
    pub deciles: [f64; 9],
    pub max: f64,
}

impl CwSummary {
    pub fn spread(&self) -> f64 {
        self.max / self.min
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinDragEntry {
    pub displacement: f64,
    pub hull_id: String,
    /// N, after scaling to the displacement.
    pub rt: f64,
    pub scaled_loa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub nn_curve: Vec<NnPoint>,
    pub cw: Vec<CwSummary>,
    pub min_drag: Vec<MinDragEntry>,
}

/// Shape terms mapped to [0, 1] by each term's full sampling interval.
pub fn normalized_terms(p: &HullParameters) -> Vec<f64> {
    (1..=NUM_SHAPE_TERMS)
        .map(|i| {
            let w = TERMS[i].upper - TERMS[i].lower;
            if w > 0.0 {
                (p.0[i] - TERMS[i].lower) / w
            } else {
                0.0
            }
        })
        .collect()
}

/// Mean and population standard deviation of the nearest-neighbor distance
/// among the first `count` points, for each count in `counts`.
pub fn nearest_neighbor_curve(points: &[Vec<f64>], counts: &[usize]) -> Result<Vec<NnPoint>> {
    let n = points.len();
    if counts.iter().any(|&c| c < 2 || c > n) {
        return Err(Error::InvalidInput(format!(
            "sample counts must lie in [2, {n}]"
        )));
    }
    let mut ks = counts.to_vec();
    ks.sort_unstable();
    ks.dedup();
    // nn[i][c]: distance from point i to its nearest neighbor among the first ks[c] points.
    let nn: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(ks.len());
            let mut best = f64::INFINITY;
            let mut c = 0;
            for j in 0..n {
                while c < ks.len() && ks[c] == j {
                    out.push(best);
                    c += 1;
                }
                if j != i {
                    let d: f64 = points[i]
                        .iter()
                        .zip(&points[j])
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                    best = best.min(d);
                }
            }
            while out.len() < ks.len() {
                out.push(best);
            }
            out.into_iter().map(f64::sqrt).collect()
        })
        .collect();
    Ok(counts
        .iter()
        .map(|&k| {
            let c = ks.binary_search(&k).unwrap();
            let v: Vec<f64> = nn[..k].iter().map(|row| row[c]).collect();
            let mean = v.iter().sum::<f64>() / k as f64;
            let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / k as f64;
            NnPoint {
                count: k,
                mean,
                std: var.sqrt(),
            }
        })
        .collect())
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(subset: u8, mut values: Vec<f64>) -> CwSummary {
    values.sort_by(f64::total_cmp);
    CwSummary {
        subset,
        hulls: values.len(),
        min: values[0],
        deciles: std::array::from_fn(|k| quantile(&values, (k + 1) as f64 / 10.0)),
        max: values[values.len() - 1],
    }
}

pub fn dataset_stats(dir: &Path, opts: &StatsOptions) -> Result<DatasetStats> {
    let (manifest, rows) = load_dataset_params(dir)?;
    if rows.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "statistics need at least 2 hulls, found {}",
            rows.len()
        )));
    }
    let points: Vec<Vec<f64>> = rows.iter().map(|(_, p)| normalized_terms(p)).collect();
    let n = points.len();
    let counts: Vec<usize> = (1..=10).map(|k| ((n * k).div_ceil(10)).max(2)).collect();
    let nn_curve = nearest_neighbor_curve(&points, &counts)?;

    let cw = cw_summaries(dir, &manifest, &rows, opts)?;
    let min_drag = opts
        .displacements
        .iter()
        .map(|&v| min_drag_hull(&rows, v, opts))
        .collect::<Result<_>>()?;
    Ok(DatasetStats {
        nn_curve,
        cw,
        min_drag,
    })
}

fn cw_summaries(
    dir: &Path,
    m: &DatasetManifest,
    rows: &[(String, HullParameters)],
    opts: &StatsOptions,
) -> Result<Vec<CwSummary>> {
    let path = dir.join(&m.files.drag);
    if !path.exists() {
        return Err(Error::Integrity(format!(
            "manifest references missing file {}",
            path.display()
        )));
    }
    let drag = load_drag(&path)?;
    if drag.len() < rows.len() {
        return Err(Error::Integrity(format!(
            "{} has fewer rows than {}",
            path.display(),
            m.files.params
        )));
    }
    let mut per_subset: [Vec<f64>; 3] = Default::default();
    for ((id, _), d) in rows.iter().zip(&drag) {
        if id != &d.id {
            return Err(Error::Integrity(format!(
                "drag row {} does not match hull {id}",
                d.id
            )));
        }
        let subset: usize = id
            .split('-')
            .next()
            .and_then(|s| s.parse().ok())
            .unwrap_or(0);
        if !(1..=3).contains(&subset) {
            return Err(Error::Integrity(format!("malformed hull id {id}")));
        }
        per_subset[subset - 1].push(interpolate_cw(&d.table, opts.froude, opts.draft_frac)?);
    }
    Ok(per_subset
        .into_iter()
        .enumerate()
        .filter(|(_, v)| !v.is_empty())
        .map(|(k, v)| summarize(k as u8 + 1, v))
        .collect())
}

fn min_drag_hull(
    rows: &[(String, HullParameters)],
    displacement: f64,
    opts: &StatsOptions,
) -> Result<MinDragEntry> {
    let evaluated: Vec<Option<(f64, f64)>> = rows
        .par_iter()
        .map(|(_, p)| {
            let frac = opts.query_draft_frac.unwrap_or(p.get(idx::DESIGN_DRAFT));
            let op = OperatingPoint {
                speed: opts.speed,
                draft: Draft::Fraction(frac),
                displacement: Some(displacement),
            };
            op.validate()?;
            let rt = evaluate_drag(p, &op, DragEvaluator::Direct)?.map(|o| o[0]);
            Ok(match rt {
                Some(rt) => Some((rt, op.resolve(p)?.0.loa())),
                None => None,
            })
        })
        .collect::<Result<_>>()?;
    let best = evaluated
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.map(|(rt, loa)| (i, rt, loa)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Domain(format!("no hull can be evaluated at {displacement} m^3")))?;
    Ok(MinDragEntry {
        displacement,
        hull_id: rows[best.0].0.clone(),
        rt: best.1,
        scaled_loa: best.2,
    })
}

impl DatasetStats {
    /// Plain-text report.
    pub fn render(&self) -> String {
        let mut s =
            String::from("# nearest-neighbor distance (normalized shape terms)\ncount,mean,std\n");
        for p in &self.nn_curve {
            let _ = writeln!(s, "{},{:.6e},{:.6e}", p.count, p.mean, p.std);
        }
        s.push_str("# Cw distribution\nsubset,hulls,min,p10,p20,p30,p40,p50,p60,p70,p80,p90,max,max_over_min\n");
        for c in &self.cw {
            let _ = write!(s, "{},{},{:.6e}", c.subset, c.hulls, c.min);
            for d in c.deciles {
                let _ = write!(s, ",{d:.6e}");
            }
            let _ = writeln!(s, ",{:.6e},{:.6e}", c.max, c.spread());
        }
        s.push_str(
            "# minimum total drag per displacement\ndisplacement_m3,hull_id,rt_n,scaled_loa_m\n",
        );
        for m in &self.min_drag {
            let _ = writeln!(
                s,
                "{},{},{:.6e},{:.6e}",
                m.displacement, m.hull_id, m.rt, m.scaled_loa
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{build_dataset, BuildOptions, DatasetConfig};
    use crate::hydro::table::SweepOptions;

    #[test]
    fn duplicate_point_gives_zero_distance() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![3.0, 4.0],
            vec![3.0, 4.0],
            vec![10.0, 0.0],
        ];
        let c = nearest_neighbor_curve(&pts, &[2, 3, 4]).unwrap();
        assert_eq!(c[0].mean, 5.0);
        assert_eq!(c[0].std, 0.0);
        // Count 3: distances 5, 0, 0.
        assert!((c[1].mean - 5.0 / 3.0).abs() < 1e-15);
        // Count 4: 5, 0, 0, sqrt(49 + 16).
        assert!((c[2].mean - (5.0 + 65f64.sqrt()) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn curve_matches_direct_computation() {
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                vec![
                    (i as f64 * 0.37).sin(),
                    (i as f64 * 1.3).cos(),
                    i as f64 * 0.01,
                ]
            })
            .collect();
        let counts = [4, 17, 40];
        let c = nearest_neighbor_curve(&pts, &counts).unwrap();
        for (p, &k) in c.iter().zip(&counts) {
            let d: Vec<f64> = (0..k)
                .map(|i| {
                    (0..k)
                        .filter(|&j| j != i)
                        .map(|j| {
                            pts[i]
                                .iter()
                                .zip(&pts[j])
                                .map(|(a, b)| (a - b).powi(2))
                                .sum::<f64>()
                                .sqrt()
                        })
                        .fold(f64::INFINITY, f64::min)
                })
                .collect();
            let mean = d.iter().sum::<f64>() / k as f64;
            assert!((p.mean - mean).abs() < 1e-14);
        }
        assert!(nearest_neighbor_curve(&pts, &[1]).is_err());
    }

    #[test]
    fn quantiles() {
        let s = summarize(
            1,
            vec![5.0, 1.0, 3.0, 2.0, 4.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0],
        );
        assert_eq!(s.min, 1.0);
        assert_eq!(s.max, 11.0);
        assert_eq!(s.deciles[4], 6.0);
        assert_eq!(s.deciles[0], 2.0);
    }

    #[test]
    fn stats_on_a_small_build() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = DatasetConfig {
            counts: [6, 3, 0],
            seed: 2,
            meshes: false,
            images: false,
            sweep: SweepOptions {
                nx: 41,
                nz: 11,
                ..Default::default()
            },
            ..Default::default()
        };
        build_dataset(tmp.path(), &cfg, &BuildOptions::default()).unwrap();
        let opts = StatsOptions {
            displacements: vec![1000.0],
            ..Default::default()
        };
        let st = dataset_stats(tmp.path(), &opts).unwrap();
        assert_eq!(st.nn_curve.len(), 10);
        assert_eq!(st.nn_curve.last().unwrap().count, 9);
        assert_eq!(st.cw.len(), 2);
        assert_eq!(st.cw[0].hulls, 6);
        assert!(st
            .cw
            .iter()
            .all(|c| c.min > 0.0 && c.min <= c.deciles[0] && c.deciles[8] <= c.max));
        let m = &st.min_drag[0];
        assert!(m.rt > 0.0);
        // Rt for the reported hull is reproducible after scaling.
        let (_, rows) = load_dataset_params(tmp.path()).unwrap();
        let p = &rows.iter().find(|(id, _)| id == &m.hull_id).unwrap().1;
        let op = OperatingPoint {
            speed: opts.speed,
            draft: Draft::Fraction(p.get(idx::DESIGN_DRAFT)),
            displacement: Some(1000.0),
        };
        let rt = evaluate_drag(p, &op, DragEvaluator::Direct)
            .unwrap()
            .unwrap()[0];
        assert_eq!(rt, m.rt);
        assert!(st.render().contains(&m.hull_id));
    }
}
