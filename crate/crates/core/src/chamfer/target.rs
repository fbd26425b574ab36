//! External target meshes (STL or triangle-only OBJ) sampled into point clouds.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::cloud::PointCloud;
use crate::geom::mesh::{TriangleMesh, Vec3};
use crate::geom::stl::parse_stl;

#[derive(Debug, Clone, PartialEq)]
pub struct TargetCloud {
    pub cloud: PointCloud,
    /// Bounding-box length along x of the source mesh.
    pub loa: f64,
}

/// Parses `v` and `f` records. Faces must be triangles; texture and normal
/// indices are ignored, negative indices count from the end.
pub fn parse_obj(text: &str) -> Result<TriangleMesh> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles = Vec::new();
    for (row, line) in text.lines().enumerate() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut p = [0.0; 3];
                for (c, slot) in p.iter_mut().enumerate() {
                    let tok = it.next().ok_or_else(|| Error::Parse {
                        row: row + 1,
                        column: c + 1,
                        message: "vertex needs three coordinates".into(),
                    })?;
                    *slot = tok.parse().map_err(|_| Error::Parse {
                        row: row + 1,
                        column: c + 1,
                        message: format!("bad coordinate {tok:?}"),
                    })?;
                }
                vertices.push(p);
            }
            Some("f") => {
                let refs: Vec<&str> = it.collect();
                if refs.len() != 3 {
                    return Err(Error::Parse {
                        row: row + 1,
                        column: 0,
                        message: format!(
                            "only triangular faces are supported, found {} vertices",
                            refs.len()
                        ),
                    });
                }
                let mut tri = [0u32; 3];
                for (c, r) in refs.iter().enumerate() {
                    let head = r.split('/').next().unwrap_or_default();
                    let bad = || Error::Parse {
                        row: row + 1,
                        column: c + 1,
                        message: format!("bad vertex reference {r:?}"),
                    };
                    let k: i64 = head.parse().map_err(|_| bad())?;
                    let n = vertices.len() as i64;
                    let i = if k > 0 { k - 1 } else { n + k };
                    if k == 0 || i < 0 || i >= n {
                        return Err(bad());
                    }
                    tri[c] = i as u32;
                }
                triangles.push(tri);
            }
            _ => {}
        }
    }
    Ok(TriangleMesh {
        vertices,
        triangles,
    })
}

fn read_mesh(path: &Path) -> Result<TriangleMesh> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let is_obj = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("obj"));
    if is_obj {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::InvalidInput("OBJ file is not UTF-8".into()))?;
        parse_obj(&text)
    } else {
        parse_stl(&bytes)
    }
}

/// Area-weighted uniform sampling of `samples` surface points. Zero-area
/// triangles are skipped with a warning.
pub fn sample_surface(mesh: &TriangleMesh, samples: usize, seed: u64) -> Result<Vec<Vec3>> {
    let mut cumulative = Vec::with_capacity(mesh.triangles.len());
    let mut tris = Vec::with_capacity(mesh.triangles.len());
    let mut total = 0.0;
    let mut skipped = 0usize;
    for t in 0..mesh.triangles.len() {
        let a = mesh.triangle_area(t);
        if !(a > 0.0 && a.is_finite()) {
            skipped += 1;
            continue;
        }
        total += a;
        cumulative.push(total);
        tris.push(mesh.triangle(t));
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} degenerate triangle(s) while sampling");
    }
    if tris.is_empty() {
        return Err(Error::InvalidInput("mesh has zero surface area".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let u = rng.random::<f64>() * total;
        let k = cumulative.partition_point(|&c| c <= u).min(tris.len() - 1);
        let [a, b, c] = tris[k];
        let r1 = rng.random::<f64>().sqrt();
        let r2 = rng.random::<f64>();
        let (wa, wb, wc) = (1.0 - r1, r1 * (1.0 - r2), r1 * r2);
        out.push([
            wa * a[0] + wb * b[0] + wc * c[0],
            wa * a[1] + wb * b[1] + wc * c[1],
            wa * a[2] + wb * b[2] + wc * c[2],
        ]);
    }
    Ok(out)
}

impl TargetCloud {
    /// Translates the cloud so x starts at 0, the keel sits at z = 0 and the
    /// centerplane is y = 0, matching the frame of generated hulls.
    pub fn aligned(mut self) -> TargetCloud {
        let pts = &mut self.cloud.points;
        if pts.is_empty() {
            return self;
        }
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in pts.iter() {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let shift = [lo[0], 0.5 * (lo[1] + hi[1]), lo[2]];
        for p in pts.iter_mut() {
            for k in 0..3 {
                p[k] -= shift[k];
            }
        }
        self
    }
}

/// Loads an STL or OBJ file (by extension) and samples it.
pub fn load_target_cloud(path: &Path, samples: usize, seed: u64) -> Result<TargetCloud> {
    if samples == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }
    let mesh = read_mesh(path)?;
    let points = sample_surface(&mesh, samples, seed)?;
    let (lo, hi) = mesh
        .bounding_box()
        .ok_or_else(|| Error::InvalidInput("mesh has no vertices".into()))?;
    Ok(TargetCloud {
        cloud: PointCloud::from_points(points),
        loa: hi[0] - lo[0],
    })
}
