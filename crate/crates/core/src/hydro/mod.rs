//! Wave and friction resistance.

pub mod michell;
pub mod table;

pub use michell::{
    michell_wave_resistance, offset_grid, wigley_offsets, MichellOptions, OffsetGrid,
};
pub use table::{interpolate_cw, sweep_32, DragTable, DRAFT_FRACS, FROUDE_NUMBERS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::hydrostatics::hydrostatics;
use crate::geom::surface::HullShape;

pub const SEAWATER_DENSITY: f64 = 1025.0;
pub const GRAVITY: f64 = 9.81;
pub const SEAWATER_VISCOSITY: f64 = 1.19e-6;
pub const KNOT: f64 = 1852.0 / 3600.0;

/// Offset grid used for wave resistance unless stated otherwise.
pub const MICHELL_NX: usize = 301;
pub const MICHELL_NZ: usize = 51;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConditions {
    /// Ship speed, m/s.
    pub speed: f64,
    /// Water density, kg/m^3.
    pub density: f64,
    pub gravity: f64,
    /// Kinematic viscosity, m^2/s.
    pub viscosity: f64,
    pub draft: f64,
}

impl FlowConditions {
    /// Seawater defaults.
    pub fn new(speed: f64, draft: f64) -> Self {
        FlowConditions {
            speed,
            density: SEAWATER_DENSITY,
            gravity: GRAVITY,
            viscosity: SEAWATER_VISCOSITY,
            draft,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("speed", self.speed),
            ("density", self.density),
            ("gravity", self.gravity),
            ("viscosity", self.viscosity),
            ("draft", self.draft),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// U = Fn sqrt(g L).
pub fn froude_to_speed(froude: f64, length: f64, gravity: f64) -> Result<f64> {
    if !(froude > 0.0 && length > 0.0 && gravity > 0.0) {
        return Err(Error::InvalidInput(
            "Froude number, length and gravity must be positive".into(),
        ));
    }
    Ok(froude * (gravity * length).sqrt())
}

pub fn speed_to_froude(speed: f64, length: f64, gravity: f64) -> Result<f64> {
    if !(speed > 0.0 && length > 0.0 && gravity > 0.0) {
        return Err(Error::InvalidInput(
            "speed, length and gravity must be positive".into(),
        ));
    }
    Ok(speed / (gravity * length).sqrt())
}

/// Cw = Rw / (0.5 rho U^2 LOA^2).
pub fn wave_drag_coefficient(rw: f64, cond: &FlowConditions, loa: f64) -> Result<f64> {
    cond.validate()?;
    if !(loa > 0.0) {
        return Err(Error::InvalidInput("loa must be positive".into()));
    }
    Ok(rw / (0.5 * cond.density * cond.speed * cond.speed * loa * loa))
}

/// ITTC-1957 line, Cf = 0.075 / (log10 Re - 2)^2.
pub fn friction_coefficient(re: f64) -> Result<f64> {
    if !(re > 100.0) {
        return Err(Error::Domain(format!(
            "Reynolds number must exceed 100, got {re}"
        )));
    }
    let d = re.log10() - 2.0;
    Ok(0.075 / (d * d))
}

/// Rf = 0.5 Cf rho U^2 Aws with Re based on the waterline length.
pub fn friction_resistance(
    cond: &FlowConditions,
    waterline_length: f64,
    wetted_area: f64,
) -> Result<f64> {
    cond.validate()?;
    let re = cond.speed * waterline_length / cond.viscosity;
    let cf = friction_coefficient(re)?;
    Ok(0.5 * cf * cond.density * cond.speed * cond.speed * wetted_area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resistance {
    pub rw: f64,
    pub rf: f64,
    pub rt: f64,
    pub waterline_length: f64,
    pub wetted_area: f64,
}

/// Waterline length at height z in the hull frame.
pub fn waterline_length<S: HullShape + ?Sized>(shape: &S, z: f64) -> f64 {
    shape.x_fwd(z) - shape.x_aft(z)
}

/// Wave, friction and total resistance at the draft and speed of `cond`.
pub fn total_resistance<S: HullShape + ?Sized>(
    shape: &S,
    cond: &FlowConditions,
) -> Result<Resistance> {
    cond.validate()?;
    if cond.draft > shape.depth() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "draft {} exceeds depth {}",
            cond.draft,
            shape.depth()
        )));
    }
    let grid = offset_grid(shape, cond.draft, MICHELL_NX, MICHELL_NZ)?;
    let rw = michell_wave_resistance(&grid, cond)?;
    let lwl = waterline_length(shape, cond.draft);
    let aws = hydrostatics(shape, cond.draft)?.wetted_area;
    let rf = friction_resistance(cond, lwl, aws)?;
    Ok(Resistance {
        rw,
        rf,
        rt: rw + rf,
        waterline_length: lwl,
        wetted_area: aws,
    })
}
