//! Bidirectional mean squared Chamfer distance and target-cloud ingestion.

pub mod kdtree;
pub mod target;

pub use kdtree::{brute_force_nearest, KdTree};
pub use target::{load_target_cloud, parse_obj, sample_surface, TargetCloud};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::cloud::PointCloud;
use crate::geom::mesh::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChamferResult {
    /// Mean squared nearest-neighbor distance over both directions, m^2.
    pub cd: f64,
    /// sqrt(cd), m.
    pub rms_cd: f64,
    /// rms_cd over the reference length.
    pub normalized_rms: f64,
    pub n_a: usize,
    pub n_b: usize,
}

impl ChamferResult {
    fn new(sum: f64, n_a: usize, n_b: usize, reference: f64) -> ChamferResult {
        let cd = sum / (n_a + n_b) as f64;
        let rms_cd = cd.sqrt();
        ChamferResult {
            cd,
            rms_cd,
            normalized_rms: if reference > 0.0 {
                rms_cd / reference
            } else {
                f64::NAN
            },
            n_a,
            n_b,
        }
    }

    /// `cd,rms_cd,normalized_rms_pct,N_A,N_B`
    pub fn report_line(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{},{}",
            self.cd,
            self.rms_cd,
            100.0 * self.normalized_rms,
            self.n_a,
            self.n_b
        )
    }
}

fn check_non_empty(a: &[Vec3], b: &[Vec3]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput(
            "Chamfer distance needs two non-empty clouds".into(),
        ));
    }
    Ok(())
}

/// Sum over `from` of squared distance to the nearest point of `tree`, added in index order.
fn one_way(from: &[Vec3], tree: &KdTree) -> f64 {
    let d: Vec<f64> = from
        .par_iter()
        .map(|p| tree.nearest(p).map_or(f64::INFINITY, |(_, d)| d))
        .collect();
    d.iter().sum()
}

/// Chamfer distance between `a` and `b`, normalized by the x extent of `b`.
pub fn chamfer_distance(a: &PointCloud, b: &PointCloud) -> Result<ChamferResult> {
    chamfer_distance_with_reference(a, b, b.x_extent())
}

pub fn chamfer_distance_with_reference(
    a: &PointCloud,
    b: &PointCloud,
    reference: f64,
) -> Result<ChamferResult> {
    check_non_empty(&a.points, &b.points)?;
    let ta = KdTree::build(&a.points);
    let tb = KdTree::build(&b.points);
    let sum = one_way(&a.points, &tb) + one_way(&b.points, &ta);
    Ok(ChamferResult::new(sum, a.len(), b.len(), reference))
}

/// O(N_A N_B) reference implementation.
pub fn chamfer_distance_brute_force(a: &PointCloud, b: &PointCloud) -> Result<ChamferResult> {
    check_non_empty(&a.points, &b.points)?;
    let way = |from: &[Vec3], to: &[Vec3]| -> f64 {
        from.iter()
            .map(|p| brute_force_nearest(to, p).map_or(f64::INFINITY, |(_, d)| d))
            .collect::<Vec<_>>()
            .iter()
            .sum()
    };
    let sum = way(&a.points, &b.points) + way(&b.points, &a.points);
    Ok(ChamferResult::new(sum, a.len(), b.len(), b.x_extent()))
}

/// A fixed target with its tree built once, for repeated comparisons.
#[derive(Debug, Clone)]
pub struct ChamferTarget {
    cloud: PointCloud,
    tree: KdTree,
    reference: f64,
}

impl ChamferTarget {
    pub fn new(cloud: PointCloud) -> Result<ChamferTarget> {
        let reference = cloud.x_extent();
        ChamferTarget::with_reference(cloud, reference)
    }

    pub fn with_reference(cloud: PointCloud, reference: f64) -> Result<ChamferTarget> {
        if cloud.is_empty() {
            return Err(Error::InvalidInput("empty target cloud".into()));
        }
        let tree = KdTree::build(&cloud.points);
        Ok(ChamferTarget {
            cloud,
            tree,
            reference,
        })
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    pub fn reference(&self) -> f64 {
        self.reference
    }

    /// Same value as `chamfer_distance(candidate, target)`.
    pub fn distance(&self, candidate: &PointCloud) -> Result<ChamferResult> {
        check_non_empty(&candidate.points, &self.cloud.points)?;
        let tc = KdTree::build(&candidate.points);
        let sum = one_way(&candidate.points, &self.tree) + one_way(&self.cloud.points, &tc);
        Ok(ChamferResult::new(
            sum,
            candidate.len(),
            self.cloud.len(),
            self.reference,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(p: Vec<Vec3>) -> PointCloud {
        PointCloud::from_points(p)
    }

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        cloud(
            (0..n)
                .map(|_| {
                    [
                        rng.random::<f64>() * 100.0,
                        rng.random::<f64>() * 8.0,
                        rng.random::<f64>() * 6.0,
                    ]
                })
                .collect(),
        )
    }

    #[test]
    fn single_points_by_hand() {
        let r = chamfer_distance(&cloud(vec![[0.0; 3]]), &cloud(vec![[1.0, 0.0, 0.0]])).unwrap();
        assert_eq!(r.cd, 1.0);
        assert_eq!(r.rms_cd, 1.0);
        assert_eq!((r.n_a, r.n_b), (1, 1));
        let r = chamfer_distance(
            &cloud(vec![[0.0; 3], [2.0, 0.0, 0.0]]),
            &cloud(vec![[0.0, 1.0, 0.0]]),
        )
        .unwrap();
        // A: 1 + 5, B: 1.
        assert!((r.cd - 7.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identical_clouds() {
        let a = random_cloud(300, 1);
        assert_eq!(chamfer_distance(&a, &a.clone()).unwrap().cd, 0.0);
    }

    #[test]
    fn empty_is_error() {
        let a = random_cloud(3, 1);
        assert!(chamfer_distance(&a, &cloud(vec![])).is_err());
        assert!(chamfer_distance(&cloud(vec![]), &a).is_err());
        assert!(ChamferTarget::new(cloud(vec![])).is_err());
    }

    #[test]
    fn tree_equals_brute_force() {
        for (na, nb, seed) in [(500, 500, 1), (37, 912, 2), (2000, 1500, 3)] {
            let a = random_cloud(na, seed);
            let b = random_cloud(nb, seed + 50);
            let t = chamfer_distance(&a, &b).unwrap();
            let o = chamfer_distance_brute_force(&a, &b).unwrap();
            assert!((t.cd / o.cd - 1.0).abs() <= 1e-12);
            let c = ChamferTarget::new(b.clone()).unwrap().distance(&a).unwrap();
            assert_eq!(c, t);
        }
    }

    #[test]
    fn normalization_and_report() {
        let a = cloud(vec![[0.0; 3], [10.0, 0.0, 0.0]]);
        let b = cloud(vec![[0.0, 0.1, 0.0], [20.0, 0.1, 0.0]]);
        let r = chamfer_distance(&a, &b).unwrap();
        assert!((r.normalized_rms - r.rms_cd / 20.0).abs() < 1e-15);
        let line = r.report_line();
        assert_eq!(line.split(',').count(), 5);
        assert!(line.ends_with(",2,2"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn symmetric_translation_and_scale(seed in 0u64..10_000, shift in prop::array::uniform3(-1e3f64..1e3), s in 0.01f64..100.0) {
            let a = random_cloud(60, seed);
            let b = random_cloud(45, seed + 1);
            let ab = chamfer_distance(&a, &b).unwrap().cd;
            prop_assert_eq!(ab, chamfer_distance(&b, &a).unwrap().cd);
            let mv = |c: &PointCloud, f: &dyn Fn(Vec3) -> Vec3| cloud(c.points.iter().map(|&p| f(p)).collect());
            let t = |p: Vec3| [p[0] + shift[0], p[1] + shift[1], p[2] + shift[2]];
            let moved = chamfer_distance(&mv(&a, &t), &mv(&b, &t)).unwrap().cd;
            prop_assert!((moved / ab - 1.0).abs() < 1e-9);
            let sc = |p: Vec3| [p[0] * s, p[1] * s, p[2] * s];
            let scaled = chamfer_distance(&mv(&a, &sc), &mv(&b, &sc)).unwrap().cd;
            prop_assert!((scaled / (ab * s * s) - 1.0).abs() < 1e-9);
        }
    }
}
