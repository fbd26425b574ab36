//! Michell thin-ship wave resistance.
//!
//! Rw = 4 rho g^2 / (pi U^2) * int_1^inf (P^2 + Q^2) lambda^2 / sqrt(lambda^2 - 1) dlambda
//!
//! with P + iQ = int int dY/dx exp(k0 lambda^2 z) exp(i k0 lambda x) dx dz over the
//! half hull, k0 = g / U^2, z <= 0 below the waterline. The substitution
//! lambda = cosh t removes the inverse square root singularity, leaving
//! (P^2 + Q^2) cosh^2 t dt, integrated by composite Simpson.

use crate::error::{Error, Result};
use crate::geom::surface::HullShape;
use crate::hydro::FlowConditions;

/// Half-breadth offsets on an even grid over the submerged hull.
///
/// `x` is centered on the middle of the grid; `z` runs from -T (first row) to
/// 0 (last row). Values are stored row-major, one row per waterline.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetGrid {
    pub nx: usize,
    pub nz: usize,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    pub slope: Vec<f64>,
}

fn centered(n: usize, span: f64) -> (Vec<f64>, f64) {
    let dx = span / (n - 1) as f64;
    let mid = 0.5 * (n - 1) as f64;
    ((0..n).map(|i| (i as f64 - mid) * dx).collect(), dx)
}

fn depths(n: usize, draft: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            if j + 1 == n {
                0.0
            } else {
                -draft + draft * j as f64 / (n - 1) as f64
            }
        })
        .collect()
}

impl OffsetGrid {
    pub fn new(x: Vec<f64>, z: Vec<f64>, y: Vec<f64>, slope: Vec<f64>) -> Result<Self> {
        let (nx, nz) = (x.len(), z.len());
        if nx < 3 || nz < 3 {
            return Err(Error::InvalidInput(format!(
                "offset grid needs at least 3x3, got {nx}x{nz}"
            )));
        }
        if y.len() != nx * nz || slope.len() != nx * nz {
            return Err(Error::InvalidInput("offset grid size mismatch".into()));
        }
        if x.iter()
            .chain(&z)
            .chain(&y)
            .chain(&slope)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidInput(
                "non-finite value in offset grid".into(),
            ));
        }
        if y.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("negative offset".into()));
        }
        Ok(OffsetGrid {
            nx,
            nz,
            x,
            z,
            y,
            slope,
        })
    }

    /// Grid from offsets alone; slopes by central differences, one-sided at the ends.
    pub fn from_offsets(x: Vec<f64>, z: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let (nx, nz) = (x.len(), z.len());
        if nx < 3 || y.len() != nx * nz {
            return Err(Error::InvalidInput("offset grid size mismatch".into()));
        }
        let mut slope = vec![0.0; nx * nz];
        for j in 0..nz {
            let row = &y[j * nx..(j + 1) * nx];
            let out = &mut slope[j * nx..(j + 1) * nx];
            out[0] = (row[1] - row[0]) / (x[1] - x[0]);
            out[nx - 1] = (row[nx - 1] - row[nx - 2]) / (x[nx - 1] - x[nx - 2]);
            for i in 1..nx - 1 {
                out[i] = (row[i + 1] - row[i - 1]) / (x[i + 1] - x[i - 1]);
            }
        }
        OffsetGrid::new(x, z, y, slope)
    }

    pub fn draft(&self) -> f64 {
        -self.z[0]
    }

    pub fn dx(&self) -> f64 {
        self.x[1] - self.x[0]
    }

    pub fn dz(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.y[j * self.nx + i]
    }

    /// The same hull seen bow-to-stern.
    pub fn mirrored(&self) -> OffsetGrid {
        let mut y = self.y.clone();
        let mut slope = self.slope.clone();
        for j in 0..self.nz {
            let r = j * self.nx..(j + 1) * self.nx;
            y[r.clone()].reverse();
            slope[r.clone()].reverse();
            for s in &mut slope[r] {
                *s = -*s;
            }
        }
        OffsetGrid {
            x: self.x.clone(),
            z: self.z.clone(),
            y,
            slope,
            ..*self
        }
    }

    /// Offsets and slopes multiplied by `c`.
    pub fn scaled(&self, c: f64) -> OffsetGrid {
        OffsetGrid {
            x: self.x.clone(),
            z: self.z.clone(),
            y: self.y.iter().map(|v| v * c).collect(),
            slope: self.slope.iter().map(|v| v * c).collect(),
            ..*self
        }
    }
}

/// Wigley hull Y = (B/2)(1 - (2x/L)^2)(1 - (z/T)^2) with analytic slopes.
pub fn wigley_offsets(
    beam: f64,
    length: f64,
    draft: f64,
    nx: usize,
    nz: usize,
) -> Result<OffsetGrid> {
    if !(beam > 0.0 && length > 0.0 && draft > 0.0) {
        return Err(Error::InvalidInput(
            "Wigley dimensions must be positive".into(),
        ));
    }
    if nx < 3 || nz < 3 {
        return Err(Error::InvalidInput("offset grid needs at least 3x3".into()));
    }
    let (x, _) = centered(nx, length);
    let z = depths(nz, draft);
    let mut y = Vec::with_capacity(nx * nz);
    let mut slope = Vec::with_capacity(nx * nz);
    for &zj in &z {
        let fz = 1.0 - (zj / draft).powi(2);
        for &xi in &x {
            let xi_n = 2.0 * xi / length;
            y.push((0.5 * beam * (1.0 - xi_n * xi_n) * fz).max(0.0));
            slope.push(-2.0 * beam * xi_n / length * fz);
        }
    }
    OffsetGrid::new(x, z, y, slope)
}

/// Samples the submerged part of `shape` below `draft` on an even `nx` x `nz` grid.
/// The x range spans the extreme ends of all sampled waterlines.
pub fn offset_grid<S: HullShape + ?Sized>(
    shape: &S,
    draft: f64,
    nx: usize,
    nz: usize,
) -> Result<OffsetGrid> {
    if !(draft > 0.0 && draft <= shape.depth() * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!(
            "draft {draft} outside (0, {}]",
            shape.depth()
        )));
    }
    if nx < 3 || nz < 3 {
        return Err(Error::InvalidInput("offset grid needs at least 3x3".into()));
    }
    let z = depths(nz, draft);
    let zh: Vec<f64> = z
        .iter()
        .map(|&v| (draft + v).clamp(0.0, shape.depth()))
        .collect();
    let lo = zh
        .iter()
        .map(|&h| shape.x_aft(h))
        .fold(f64::INFINITY, f64::min);
    let hi = zh
        .iter()
        .map(|&h| shape.x_fwd(h))
        .fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (lo + hi);
    let (x, _) = centered(nx, hi - lo);
    let mut y = Vec::with_capacity(nx * nz);
    for &h in &zh {
        for &xi in &x {
            y.push(shape.offset((center + xi).clamp(lo, hi), h));
        }
    }
    OffsetGrid::from_offsets(x, z, y)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MichellOptions {
    /// Composite Simpson panels in t = acosh(lambda); rounded up to even.
    pub panels: usize,
    /// The lambda range ends where exp(-2 k0 lambda^2 T) drops below this.
    pub cutoff: f64,
}

impl Default for MichellOptions {
    fn default() -> Self {
        MichellOptions {
            panels: 300,
            cutoff: 1e-12,
        }
    }
}

fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] *= 0.5;
    w[n - 1] *= 0.5;
    w
}

/// Upper end of the lambda integral for the given grid and speed.
pub fn lambda_max(grid: &OffsetGrid, k0: f64, cutoff: f64) -> f64 {
    let l2 = (1.0 / cutoff).ln() / (2.0 * k0 * grid.draft());
    l2.sqrt().max(1.0)
}

pub fn michell_wave_resistance(grid: &OffsetGrid, cond: &FlowConditions) -> Result<f64> {
    michell_wave_resistance_with(grid, cond, &MichellOptions::default())
}

pub fn michell_wave_resistance_with(
    grid: &OffsetGrid,
    cond: &FlowConditions,
    opts: &MichellOptions,
) -> Result<f64> {
    cond.validate()?;
    if !(opts.cutoff > 0.0 && opts.cutoff < 1.0) || opts.panels < 2 {
        return Err(Error::InvalidInput("bad Michell quadrature options".into()));
    }
    if grid.slope.iter().all(|&s| s == 0.0) {
        return Ok(0.0);
    }
    let u = cond.speed;
    let g = cond.gravity;
    let k0 = g / (u * u);
    let t_max = lambda_max(grid, k0, opts.cutoff).acosh();
    let panels = opts.panels + opts.panels % 2;
    let h = t_max / panels as f64;

    let (nx, nz) = (grid.nx, grid.nz);
    let wx = trapezoid_weights(nx, grid.dx());
    let wz = trapezoid_weights(nz, grid.dz());
    let mut col = vec![0.0; nx];

    let mut integrand = |t: f64| {
        let lam = t.cosh();
        let kz = k0 * lam * lam;
        let kx = k0 * lam;
        col.iter_mut().for_each(|c| *c = 0.0);
        for j in 0..nz {
            let e = wz[j] * (kz * grid.z[j]).exp();
            if e == 0.0 {
                continue;
            }
            let row = &grid.slope[j * nx..(j + 1) * nx];
            for (c, s) in col.iter_mut().zip(row) {
                *c += e * s;
            }
        }
        let (mut p, mut q) = (0.0, 0.0);
        for i in 0..nx {
            let a = wx[i] * col[i];
            if a == 0.0 {
                continue;
            }
            let (sn, cs) = (kx * grid.x[i]).sin_cos();
            p += a * cs;
            q += a * sn;
        }
        (p * p + q * q) * lam * lam
    };

    let mut sum = integrand(0.0) + integrand(t_max);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(k as f64 * h);
    }
    let integral = sum * h / 3.0;
    let rw = 4.0 * cond.density * g * g / (std::f64::consts::PI * u * u) * integral;
    if !rw.is_finite() {
        return Err(Error::InvalidInput("non-finite wave resistance".into()));
    }
    Ok(rw.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cond(u: f64) -> FlowConditions {
        FlowConditions::new(u, 6.25)
    }

    #[test]
    fn constant_offsets_give_zero() {
        let x: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let z = depths(5, 2.0);
        let g = OffsetGrid::from_offsets(x, z, vec![1.5; 55]).unwrap();
        assert_eq!(michell_wave_resistance(&g, &cond(5.0)).unwrap(), 0.0);
    }

    #[test]
    fn wigley_analytic_slopes_match_finite_differences() {
        let mut last = f64::INFINITY;
        for nx in [51, 101, 201, 401] {
            let g = wigley_offsets(10.0, 100.0, 6.25, nx, 11).unwrap();
            let fd = OffsetGrid::from_offsets(g.x.clone(), g.z.clone(), g.y.clone()).unwrap();
            let err = g
                .slope
                .iter()
                .zip(&fd.slope)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err < last);
            last = err;
        }
    }

    #[test]
    fn wigley_offset_values() {
        let g = wigley_offsets(10.0, 100.0, 6.25, 101, 11).unwrap();
        assert!((g.at(50, 10) - 5.0).abs() < 1e-12);
        assert_eq!(g.at(0, 10), 0.0);
        assert_eq!(g.at(100, 10), 0.0);
    }

    #[test]
    fn mirror_and_scale() {
        let g = wigley_offsets(10.0, 100.0, 6.25, 101, 21).unwrap();
        // Make it asymmetric fore and aft.
        let y: Vec<f64> =
            g.y.iter()
                .enumerate()
                .map(|(k, v)| v * (1.0 + 0.3 * g.x[k % g.nx] / 50.0))
                .collect();
        let a = OffsetGrid::from_offsets(g.x.clone(), g.z.clone(), y).unwrap();
        let c = cond(9.0);
        let r = michell_wave_resistance(&a, &c).unwrap();
        let rm = michell_wave_resistance(&a.mirrored(), &c).unwrap();
        assert!(((r - rm) / r).abs() < 1e-9);
        let rs = michell_wave_resistance(&a.scaled(1.7), &c).unwrap();
        assert!((rs / (r * 1.7 * 1.7) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn vanishes_at_low_speed() {
        let g = wigley_offsets(10.0, 100.0, 6.25, 301, 51).unwrap();
        let fast = michell_wave_resistance(&g, &cond(10.0)).unwrap();
        let slow = michell_wave_resistance(&g, &cond(0.5)).unwrap();
        assert!(slow < 1e-3 * fast);
    }
}
