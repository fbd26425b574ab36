use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::mesh::Vec3;
use crate::geom::surface::HullShape;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<Vec3>,
    pub nx: usize,
    pub nz: usize,
    pub clip_draft: Option<f64>,
    pub mirrored: bool,
}

impl PointCloud {
    /// Cloud without grid metadata, e.g. sampled from a foreign mesh.
    pub fn from_points(points: Vec<Vec3>) -> Self {
        PointCloud {
            points,
            nx: 0,
            nz: 0,
            clip_draft: None,
            mirrored: false,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Extent along x, used as the reference length for normalized errors.
    pub fn x_extent(&self) -> f64 {
        let (lo, hi) = self
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[0]), hi.max(p[0]))
            });
        if hi >= lo {
            hi - lo
        } else {
            0.0
        }
    }
}

/// Samples `nx` x `nz` surface stations per side: rows evenly spaced in z over
/// [0, clip] (or the full depth), stations evenly spaced in x along each row.
/// With `mirrored`, the port image of every station is appended.
pub fn generate_point_cloud<S: HullShape + ?Sized>(
    shape: &S,
    nx: usize,
    nz: usize,
    clip_draft: Option<f64>,
    mirrored: bool,
) -> Result<PointCloud> {
    if nx < 2 || nz < 2 {
        return Err(Error::InvalidInput(format!(
            "grid must be at least 2x2, got {nx}x{nz}"
        )));
    }
    let depth = shape.depth();
    let top = match clip_draft {
        Some(c) if !(c > 0.0 && c <= depth) => {
            return Err(Error::Domain(format!(
                "clip draft {c} outside (0, {depth}]"
            )))
        }
        Some(c) => c,
        None => depth,
    };
    let mut points = Vec::with_capacity(nx * nz * if mirrored { 2 } else { 1 });
    for j in 0..nz {
        let z = if j + 1 == nz {
            top
        } else {
            top * j as f64 / (nz - 1) as f64
        };
        let xa = shape.x_aft(z);
        let xf = shape.x_fwd(z);
        for i in 0..nx {
            let x = if i + 1 == nx {
                xf
            } else {
                xa + (xf - xa) * i as f64 / (nx - 1) as f64
            };
            points.push([x, shape.offset(x, z), z]);
        }
    }
    if mirrored {
        let n = points.len();
        for k in 0..n {
            let [x, y, z] = points[k];
            points.push([x, -y, z]);
        }
    }
    Ok(PointCloud {
        points,
        nx,
        nz,
        clip_draft,
        mirrored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::surface::HullSurface;
    use crate::params::HullParameters;

    fn prism() -> HullSurface {
        HullSurface::new(&HullParameters::prism(100.0, 0.15, 0.1, 0.0)).unwrap()
    }

    #[test]
    fn corner_stations() {
        let c = generate_point_cloud(&prism(), 2, 2, None, false).unwrap();
        assert_eq!(c.len(), 4);
        let expect = [
            [0.0, 7.5, 0.0],
            [100.0, 7.5, 0.0],
            [0.0, 7.5, 10.0],
            [100.0, 7.5, 10.0],
        ];
        for (p, e) in c.points.iter().zip(expect) {
            for k in 0..3 {
                assert!((p[k] - e[k]).abs() < 1e-12);
            }
        }
        let m = generate_point_cloud(&prism(), 2, 2, None, true).unwrap();
        assert_eq!(m.len(), 8);
    }

    #[test]
    fn clipping() {
        let s = prism();
        let c = generate_point_cloud(&s, 10, 7, Some(5.0), false).unwrap();
        let zmax = c.points.iter().map(|p| p[2]).fold(f64::MIN, f64::max);
        assert_eq!(zmax, 5.0);
        assert_eq!(c.len(), 70);
        assert!(matches!(
            generate_point_cloud(&s, 10, 7, Some(0.0), false),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            generate_point_cloud(&s, 10, 7, Some(11.0), false),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn doubling_halves_spacing() {
        let s = prism();
        let spacing = |n: usize| {
            let c = generate_point_cloud(&s, n, n, None, false).unwrap();
            let dx = c.points[1][0] - c.points[0][0];
            let dz = c.points[n][2] - c.points[0][2];
            (dx, dz)
        };
        let (dx1, dz1) = spacing(11);
        let (dx2, dz2) = spacing(21);
        assert!((dx1 / dx2 - 2.0).abs() < 1e-12);
        assert!((dz1 / dz2 - 2.0).abs() < 1e-12);
    }
}
