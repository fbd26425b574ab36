//! Displaced volume and wetted surface from the clipped submerged mesh.

use crate::error::{Error, Result};
use crate::geom::mesh::build_grid_mesh;
use crate::geom::surface::{HullShape, HullSurface};
use crate::params::HullParameters;

/// Grid used for hydrostatic integrals.
pub const HYDRO_NX: usize = 241;
pub const HYDRO_NZ: usize = 61;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hydrostatics {
    pub volume: f64,
    pub wetted_area: f64,
}

fn check_draft<S: HullShape + ?Sized>(shape: &S, draft: f64) -> Result<()> {
    if !(draft > 0.0 && draft <= shape.depth() * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!(
            "draft {draft} outside (0, {}]",
            shape.depth()
        )));
    }
    Ok(())
}

/// Volume and wetted area at `draft` on an `nx` x `nz` grid. The waterplane
/// cap closes the volume but is excluded from the area.
pub fn hydrostatics_on_grid<S: HullShape + ?Sized>(
    shape: &S,
    draft: f64,
    nx: usize,
    nz: usize,
) -> Result<Hydrostatics> {
    check_draft(shape, draft)?;
    let g = build_grid_mesh(shape, nx, nz, draft.min(shape.depth()))?;
    let volume = g.mesh.signed_volume();
    let wetted_area = (0..g.mesh.triangles.len())
        .filter(|&t| !g.top_cap[t])
        .map(|t| g.mesh.triangle_area(t))
        .sum();
    Ok(Hydrostatics {
        volume,
        wetted_area,
    })
}

pub fn hydrostatics<S: HullShape + ?Sized>(shape: &S, draft: f64) -> Result<Hydrostatics> {
    hydrostatics_on_grid(shape, draft, HYDRO_NX, HYDRO_NZ)
}

pub fn displaced_volume<S: HullShape + ?Sized>(shape: &S, draft: f64) -> Result<f64> {
    Ok(hydrostatics(shape, draft)?.volume)
}

pub fn wetted_surface_area<S: HullShape + ?Sized>(shape: &S, draft: f64) -> Result<f64> {
    Ok(hydrostatics(shape, draft)?.wetted_area)
}

/// Rescales `loa` so the displaced volume at `draft_frac * depth` equals
/// `target_volume`. Every other term is loa-relative, so volume goes as loa^3.
pub fn scale_to_displacement(
    params: &HullParameters,
    target_volume: f64,
    draft_frac: f64,
) -> Result<HullParameters> {
    if !(target_volume > 0.0 && target_volume.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "target volume must be positive, got {target_volume}"
        )));
    }
    if !(draft_frac > 0.0 && draft_frac <= 1.0) {
        return Err(Error::Domain(format!(
            "draft fraction {draft_frac} outside (0, 1]"
        )));
    }
    let surface = HullSurface::new(params)?;
    let v = displaced_volume(&surface, draft_frac * params.depth())?;
    if v <= 0.0 {
        return Err(Error::Domain(
            "hull displaces no volume at that draft".into(),
        ));
    }
    Ok(params.with_loa(params.loa() * (target_volume / v).cbrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::surface::WigleySurface;

    fn prism() -> HullSurface {
        HullSurface::new(&HullParameters::prism(100.0, 0.15, 0.1, 0.0)).unwrap()
    }

    #[test]
    fn prism_volume_and_area() {
        let s = prism();
        let t = 4.0;
        let h = hydrostatics(&s, t).unwrap();
        let (l, b) = (100.0, 15.0);
        assert!((h.volume / (l * b * t) - 1.0).abs() < 1e-9);
        let area = l * b + 2.0 * l * t + 2.0 * b * t;
        assert!((h.wetted_area / area - 1.0).abs() < 1e-9);
    }

    #[test]
    fn volume_increases_with_draft() {
        let mut p = HullParameters::prism(80.0, 0.2, 0.1, 0.2);
        p.set(crate::params::idx::DEADRISE, 10.0);
        p.set(crate::params::idx::CHINE_HALFBEAM, 0.8);
        let s = HullSurface::new(&p).unwrap();
        let mut last = 0.0;
        for k in 1..=8 {
            let v = displaced_volume(&s, p.depth() * k as f64 / 8.0).unwrap();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn wigley_volume() {
        let w = WigleySurface::standard();
        let v = displaced_volume(&w, w.draft).unwrap();
        assert!((v / w.volume() - 1.0).abs() < 0.005);
    }

    #[test]
    fn draft_out_of_range() {
        let s = prism();
        assert!(matches!(displaced_volume(&s, 0.0), Err(Error::Domain(_))));
        assert!(matches!(displaced_volume(&s, 11.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cube_root_scaling() {
        let unit = HullParameters::prism(1.0, 0.15, 0.1, 0.0);
        let v1 = displaced_volume(&HullSurface::new(&unit).unwrap(), 0.5 * unit.depth()).unwrap();
        let scaled = scale_to_displacement(&unit, 1000.0, 0.5).unwrap();
        assert!((scaled.loa() / (1000.0 / v1).cbrt() - 1.0).abs() < 1e-9);
        let doubled = scale_to_displacement(&unit, 2000.0, 0.5).unwrap();
        assert!((doubled.loa() / scaled.loa() - 2f64.cbrt()).abs() < 1e-9);
        let check =
            displaced_volume(&HullSurface::new(&scaled).unwrap(), 0.5 * scaled.depth()).unwrap();
        assert!((check / 1000.0 - 1.0).abs() < 1e-3);
    }
}
