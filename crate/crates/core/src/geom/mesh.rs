//! Triangle meshes: construction from a hull surface, topology and
//! self-intersection checks, and integral properties.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::surface::{HullShape, HullSurface};

pub type Vec3 = [f64; 3];

#[inline]
pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Self {
        TriangleMesh {
            vertices,
            triangles,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Undirected edge -> number of incident triangles.
    pub fn edge_adjacency(&self) -> HashMap<(u32, u32), u32> {
        let mut map = HashMap::with_capacity(self.triangles.len() * 2);
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let key = if a < b { (a, b) } else { (b, a) };
                *map.entry(key).or_insert(0) += 1;
            }
        }
        map
    }

    pub fn signed_volume(&self) -> f64 {
        let mut v = 0.0;
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangle(t);
            v += dot(a, cross(b, c));
        }
        v / 6.0
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        0.5 * norm(cross(sub(b, a), sub(c, a)))
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn bounding_box(&self) -> Option<(Vec3, Vec3)> {
        let first = *self.vertices.first()?;
        let mut lo = first;
        let mut hi = first;
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        Some((lo, hi))
    }
}

/// Every edge is shared by exactly two triangles.
pub fn is_watertight(mesh: &TriangleMesh) -> bool {
    if mesh.triangles.is_empty() {
        return false;
    }
    let n = mesh.vertices.len() as u32;
    if mesh.triangles.iter().any(|t| t.iter().any(|&i| i >= n)) {
        return false;
    }
    mesh.edge_adjacency().values().all(|&c| c == 2)
}

// ---------------------------------------------------------------------------
// Self-intersection

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn of(tri: &[Vec3; 3]) -> Self {
        let mut lo = tri[0];
        let mut hi = tri[0];
        for p in &tri[1..] {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Aabb { lo, hi }
    }

    fn union(&self, o: &Aabb) -> Aabb {
        let mut r = *self;
        for k in 0..3 {
            r.lo[k] = r.lo[k].min(o.lo[k]);
            r.hi[k] = r.hi[k].max(o.hi[k]);
        }
        r
    }

    fn overlaps(&self, o: &Aabb, pad: f64) -> bool {
        (0..3).all(|k| self.lo[k] <= o.hi[k] + pad && o.lo[k] <= self.hi[k] + pad)
    }
}

enum Node {
    Leaf {
        bounds: Aabb,
        items: Vec<u32>,
    },
    Inner {
        bounds: Aabb,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

const BVH_LEAF: usize = 4;

fn build_bvh(boxes: &[Aabb], mut items: Vec<u32>) -> Node {
    let mut bounds = boxes[items[0] as usize];
    for &i in &items[1..] {
        bounds = bounds.union(&boxes[i as usize]);
    }
    if items.len() <= BVH_LEAF {
        return Node::Leaf { bounds, items };
    }
    let ext = sub(bounds.hi, bounds.lo);
    let axis = (0..3)
        .max_by(|&a, &b| ext[a].total_cmp(&ext[b]))
        .unwrap_or(0);
    let key = |i: &u32| {
        let b = &boxes[*i as usize];
        b.lo[axis] + b.hi[axis]
    };
    let mid = items.len() / 2;
    items.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)));
    let right = items.split_off(mid);
    Node::Inner {
        bounds,
        left: Box::new(build_bvh(boxes, items)),
        right: Box::new(build_bvh(boxes, right)),
    }
}

fn shares_vertex(a: &[u32; 3], b: &[u32; 3]) -> bool {
    a.iter().any(|v| b.contains(v))
}

/// True if any two triangles that do not share a vertex intersect.
pub fn self_intersects(mesh: &TriangleMesh) -> bool {
    find_self_intersection(mesh).is_some()
}

/// First intersecting pair of triangles (by index of the first triangle), if any.
pub fn find_self_intersection(mesh: &TriangleMesh) -> Option<(usize, usize)> {
    let n = mesh.triangles.len();
    if n < 2 {
        return None;
    }
    let tris: Vec<[Vec3; 3]> = (0..n).map(|t| mesh.triangle(t)).collect();
    let boxes: Vec<Aabb> = tris.iter().map(Aabb::of).collect();
    let root = build_bvh(&boxes, (0..n as u32).collect());
    let ext = sub(root.bounds().hi, root.bounds().lo);
    let scale = norm(ext).max(f64::MIN_POSITIVE);
    let pad = 1e-12 * scale;

    (0..n).into_par_iter().find_map_first(|i| {
        let mut stack: Vec<&Node> = vec![&root];
        let bi = &boxes[i];
        while let Some(node) = stack.pop() {
            if !node.bounds().overlaps(bi, pad) {
                continue;
            }
            match node {
                Node::Leaf { items, .. } => {
                    for &j in items {
                        let j = j as usize;
                        if j <= i
                            || !boxes[j].overlaps(bi, pad)
                            || shares_vertex(&mesh.triangles[i], &mesh.triangles[j])
                        {
                            continue;
                        }
                        if triangles_intersect(&tris[i], &tris[j], scale) {
                            return Some((i, j));
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        None
    })
}

/// Interval of the plane-crossing points of a triangle, projected on one axis.
fn crossing_interval(p: [f64; 3], d: [f64; 3]) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..3 {
        let j = (i + 1) % 3;
        if d[i] == 0.0 {
            lo = lo.min(p[i]);
            hi = hi.max(p[i]);
        }
        if d[i] * d[j] < 0.0 {
            let t = p[i] + (p[j] - p[i]) * d[i] / (d[i] - d[j]);
            lo = lo.min(t);
            hi = hi.max(t);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Signed plane distances of `pts` to the plane of `tri`, snapped to zero
/// within `eps`. None if the triangle is degenerate.
fn plane_distances(tri: &[Vec3; 3], pts: &[Vec3; 3], eps: f64) -> Option<(Vec3, [f64; 3])> {
    let n = cross(sub(tri[1], tri[0]), sub(tri[2], tri[0]));
    let len = norm(n);
    if len == 0.0 {
        return None;
    }
    let n = [n[0] / len, n[1] / len, n[2] / len];
    let mut d = [0.0; 3];
    for k in 0..3 {
        let v = dot(n, sub(pts[k], tri[0]));
        d[k] = if v.abs() < eps { 0.0 } else { v };
    }
    Some((n, d))
}

fn same_side(d: &[f64; 3]) -> bool {
    (d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0) || (d[0] < 0.0 && d[1] < 0.0 && d[2] < 0.0)
}

/// Proper intersection test between two triangles. Contacts narrower than
/// `1e-10 * scale` are not reported.
pub fn triangles_intersect(a: &[Vec3; 3], b: &[Vec3; 3], scale: f64) -> bool {
    let eps = 1e-10 * scale;
    let Some((nb, da)) = plane_distances(b, a, eps) else {
        return false;
    };
    if same_side(&da) {
        return false;
    }
    let Some((na, db)) = plane_distances(a, b, eps) else {
        return false;
    };
    if same_side(&db) {
        return false;
    }
    let dir = cross(na, nb);
    if da.iter().all(|&v| v == 0.0) || norm(dir) < 1e-3 {
        // Coplanar or nearly parallel: the crossing line is ill-conditioned,
        // but any common point must show up in the projections.
        return coplanar_intersect(a, b, na, eps);
    }
    let axis = (0..3)
        .max_by(|&i, &j| dir[i].abs().total_cmp(&dir[j].abs()))
        .unwrap_or(0);
    let pa = [a[0][axis], a[1][axis], a[2][axis]];
    let pb = [b[0][axis], b[1][axis], b[2][axis]];
    let (Some((lo1, hi1)), Some((lo2, hi2))) =
        (crossing_interval(pa, da), crossing_interval(pb, db))
    else {
        return false;
    };
    // The projected interval scales with the direction component on the axis.
    let s = dir[axis].abs() / norm(dir).max(f64::MIN_POSITIVE);
    lo1.max(lo2) < hi1.min(hi2) - eps * s
}

fn coplanar_intersect(a: &[Vec3; 3], b: &[Vec3; 3], n: Vec3, eps: f64) -> bool {
    let drop = (0..3)
        .max_by(|&i, &j| n[i].abs().total_cmp(&n[j].abs()))
        .unwrap_or(2);
    let (u, v) = match drop {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let p = |q: Vec3| [q[u], q[v]];
    let ta = [p(a[0]), p(a[1]), p(a[2])];
    let tb = [p(b[0]), p(b[1]), p(b[2])];
    for i in 0..3 {
        for j in 0..3 {
            if segments_cross(ta[i], ta[(i + 1) % 3], tb[j], tb[(j + 1) % 3], eps) {
                return true;
            }
        }
    }
    ta.iter().any(|&q| strictly_inside(q, &tb, eps))
        || tb.iter().any(|&q| strictly_inside(q, &ta, eps))
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2], eps: f64) -> bool {
    let lab = (b[0] - a[0]).hypot(b[1] - a[1]);
    let lcd = (d[0] - c[0]).hypot(d[1] - c[1]);
    let o1 = orient(a, b, c) / lab.max(f64::MIN_POSITIVE);
    let o2 = orient(a, b, d) / lab.max(f64::MIN_POSITIVE);
    let o3 = orient(c, d, a) / lcd.max(f64::MIN_POSITIVE);
    let o4 = orient(c, d, b) / lcd.max(f64::MIN_POSITIVE);
    ((o1 > eps && o2 < -eps) || (o1 < -eps && o2 > eps))
        && ((o3 > eps && o4 < -eps) || (o3 < -eps && o4 > eps))
}

fn strictly_inside(q: [f64; 2], t: &[[f64; 2]; 3], eps: f64) -> bool {
    let s = orient(t[0], t[1], t[2]).signum();
    if s == 0.0 {
        return false;
    }
    (0..3).all(|i| {
        let a = t[i];
        let b = t[(i + 1) % 3];
        let len = (b[0] - a[0]).hypot(b[1] - a[1]).max(f64::MIN_POSITIVE);
        s * orient(a, b, q) / len > eps
    })
}

// ---------------------------------------------------------------------------
// Construction

/// Mesh built from a surface grid, with the triangles of the top cap marked.
#[derive(Debug, Clone)]
pub struct GridMesh {
    pub mesh: TriangleMesh,
    /// True for triangles of the flat cap closing the top row (deck or waterplane).
    pub top_cap: Vec<bool>,
}

/// Builds the closed mesh of the part of `shape` between the keel and `top`.
///
/// Each side is a structured grid with `nz` rows evenly spaced in z and `nx`
/// columns evenly spaced in x along each row. Vertices where the offset is
/// zero are shared by both sides; open boundary edges are closed by flat caps
/// spanning the centerplane.
pub fn build_grid_mesh<S: HullShape + ?Sized>(
    shape: &S,
    nx: usize,
    nz: usize,
    top: f64,
) -> Result<GridMesh> {
    if nx < 2 || nz < 2 {
        return Err(Error::InvalidInput(format!(
            "grid must be at least 2x2, got {nx}x{nz}"
        )));
    }
    if !(top > 0.0 && top <= shape.depth() * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!(
            "top {top} outside (0, {}]",
            shape.depth()
        )));
    }

    let mut vertices: Vec<Vec3> = Vec::with_capacity(2 * nx * nz);
    let mut star = vec![0u32; nx * nz];
    let mut port = vec![0u32; nx * nz];
    let mut zero = vec![false; nx * nz];
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
            let y = shape.offset(x, z);
            let k = j * nx + i;
            star[k] = vertices.len() as u32;
            vertices.push([x, y, z]);
            zero[k] = y == 0.0;
        }
    }
    for k in 0..nx * nz {
        if zero[k] {
            port[k] = star[k];
        } else {
            let [x, y, z] = vertices[star[k] as usize];
            port[k] = vertices.len() as u32;
            vertices.push([x, -y, z]);
        }
    }

    // Starboard sheet, wound so the normal points to +y.
    let mut sheet: Vec<[usize; 3]> = Vec::with_capacity(2 * (nx - 1) * (nz - 1));
    for j in 0..nz - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            let b = a + 1;
            let c = b + nx;
            let d = a + nx;
            if zero[a] && zero[b] && zero[c] && zero[d] {
                continue;
            }
            if zero[b] && zero[d] {
                sheet.push([a, c, b]);
                sheet.push([a, d, c]);
            } else {
                sheet.push([a, d, b]);
                sheet.push([b, d, c]);
            }
        }
    }

    let mut triangles: Vec<[u32; 3]> = Vec::with_capacity(sheet.len() * 2 + 4 * (nx + nz));
    let mut top_cap = Vec::with_capacity(triangles.capacity());
    for t in &sheet {
        triangles.push([star[t[0]], star[t[1]], star[t[2]]]);
        top_cap.push(false);
    }
    for t in &sheet {
        triangles.push([port[t[0]], port[t[2]], port[t[1]]]);
        top_cap.push(false);
    }

    // Open boundary of the starboard sheet: directed edges without a reverse twin.
    let directed: HashSet<(usize, usize)> = sheet
        .iter()
        .flat_map(|t| [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])])
        .collect();
    for t in &sheet {
        for (u, v) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            if directed.contains(&(v, u)) || (zero[u] && zero[v]) {
                continue;
            }
            let lid = u / nx == nz - 1 && v / nx == nz - 1;
            if !zero[u] {
                triangles.push([star[v], star[u], port[u]]);
                top_cap.push(lid);
            }
            if !zero[v] {
                triangles.push([star[v], port[u], port[v]]);
                top_cap.push(lid);
            }
        }
    }

    Ok(GridMesh {
        mesh: TriangleMesh::new(vertices, triangles),
        top_cap,
    })
}

/// Closed mesh of the full hull, deck and transom caps included.
pub fn generate_mesh(surface: &HullSurface, nx: usize, nz: usize) -> Result<TriangleMesh> {
    Ok(build_grid_mesh(surface, nx, nz, surface.layout().depth)?.mesh)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::geom::surface::WigleySurface;
    use crate::params::HullParameters;

    pub fn tetra(offset: Vec3, s: f64) -> TriangleMesh {
        let v = vec![
            [offset[0], offset[1], offset[2]],
            [offset[0] + s, offset[1], offset[2]],
            [offset[0], offset[1] + s, offset[2]],
            [offset[0], offset[1], offset[2] + s],
        ];
        TriangleMesh::new(v, vec![[0, 2, 1], [0, 1, 3], [0, 3, 2], [1, 2, 3]])
    }

    #[test]
    fn tetrahedron_checks() {
        let t = tetra([0.0; 3], 1.0);
        assert!(is_watertight(&t));
        assert!(!self_intersects(&t));
        assert!((t.signed_volume() - 1.0 / 6.0).abs() < 1e-15);
        let mut open = t.clone();
        open.triangles.pop();
        assert!(!is_watertight(&open));
    }

    #[test]
    fn interpenetrating_tetrahedra() {
        let a = tetra([0.0; 3], 1.0);
        let b = tetra([0.2, 0.2, 0.2], 1.0);
        let mut v = a.vertices.clone();
        v.extend(b.vertices.iter().copied());
        let mut t = a.triangles.clone();
        t.extend(b.triangles.iter().map(|f| [f[0] + 4, f[1] + 4, f[2] + 4]));
        let m = TriangleMesh::new(v, t);
        assert!(is_watertight(&m));
        assert!(self_intersects(&m));

        let c = tetra([3.0, 0.0, 0.0], 1.0);
        let mut v = a.vertices.clone();
        v.extend(c.vertices.iter().copied());
        let mut t = a.triangles.clone();
        t.extend(c.triangles.iter().map(|f| [f[0] + 4, f[1] + 4, f[2] + 4]));
        assert!(!self_intersects(&TriangleMesh::new(v, t)));
    }

    #[test]
    fn coplanar_overlap_detected() {
        let a = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        let b = [[0.5, 0.5, 0.0], [3.0, 0.5, 0.0], [0.5, 3.0, 0.0]];
        assert!(triangles_intersect(&a, &b, 3.0));
        let c = [[5.0, 5.0, 0.0], [6.0, 5.0, 0.0], [5.0, 6.0, 0.0]];
        assert!(!triangles_intersect(&a, &c, 6.0));
    }

    #[test]
    fn nearly_parallel_pairs() {
        // Neighbouring slivers on a sheared, almost flat strip of a fine hull mesh.
        let a = [
            [15.250528655545933, 1.7600761096841429, 0.7382524966301826],
            [16.527046694070854, 1.782220636068527, 0.7690130173231069],
            [15.327575157978766, 1.7600761096841429, 0.7382524966301826],
        ];
        let b = [
            [15.404621660411598, 1.7600761096841429, 0.7382524966301826],
            [16.61082967859992, 1.782220635676984, 0.7690130173231069],
            [16.69461266312899, 1.7822206310992197, 0.7690130173231069],
        ];
        assert!(!triangles_intersect(&a, &b, 60.0));
        assert!(!triangles_intersect(&b, &a, 60.0));

        // Genuine crossing at a shallow angle.
        let t = 1e-4;
        let c = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]];
        let d = [[0.2, 0.2, -t], [3.0, 0.2, 2.8 * t], [0.2, 3.0, -t]];
        assert!(triangles_intersect(&c, &d, 3.0));
    }

    #[test]
    fn touching_at_a_point_is_not_an_intersection() {
        let a = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let b = [[1.0, 0.0, 0.0], [2.0, 0.0, 1.0], [2.0, 1.0, -1.0]];
        assert!(!triangles_intersect(&a, &b, 2.0));
    }

    #[test]
    fn prism_mesh_volume() {
        let p = HullParameters::prism(100.0, 0.15, 0.1, 0.0);
        let s = HullSurface::new(&p).unwrap();
        for (nx, nz) in [(2, 2), (5, 3), (50, 50)] {
            let m = generate_mesh(&s, nx, nz).unwrap();
            assert!(is_watertight(&m));
            assert!(!self_intersects(&m));
            let v = m.signed_volume();
            assert!((v - 100.0 * 15.0 * 10.0).abs() < 1e-9 * v, "{v}");
        }
    }

    #[test]
    fn wigley_mesh_volume() {
        let w = WigleySurface::standard();
        let g = build_grid_mesh(&w, 201, 51, w.draft).unwrap();
        assert!(is_watertight(&g.mesh));
        assert!(!self_intersects(&g.mesh));
        let v = g.mesh.signed_volume();
        assert!(
            (v / w.volume() - 1.0).abs() < 0.005,
            "{v} vs {}",
            w.volume()
        );
    }
}
