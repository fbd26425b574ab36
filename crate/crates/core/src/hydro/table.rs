//! The 32-condition drag table: four drafts by eight Froude numbers.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::hydrostatics::hydrostatics;
use crate::geom::surface::HullShape;
use crate::hydro::michell::{michell_wave_resistance_with, offset_grid, MichellOptions};
use crate::hydro::{
    friction_resistance, froude_to_speed, waterline_length, wave_drag_coefficient, FlowConditions,
    GRAVITY, MICHELL_NX, MICHELL_NZ, SEAWATER_DENSITY, SEAWATER_VISCOSITY,
};
use crate::params::fmt_num;

/// Drafts as fractions of depth.
pub const DRAFT_FRACS: [f64; 4] = [0.25, 0.33, 0.50, 0.67];
/// Eight evenly spaced Froude numbers from 0.15 to 0.45.
pub const FROUDE_NUMBERS: [f64; 8] = [
    0.15,
    0.15 + 0.3 / 7.0,
    0.15 + 0.6 / 7.0,
    0.15 + 0.9 / 7.0,
    0.15 + 1.2 / 7.0,
    0.15 + 1.5 / 7.0,
    0.15 + 1.8 / 7.0,
    0.45,
];
pub const NUM_CONDITIONS: usize = 32;

const DRAFT_LABELS: [&str; 4] = ["d25", "d33", "d50", "d67"];

fn froude_label(f: f64) -> String {
    format!("f{:03}", (f * 100.0).round() as u32)
}

/// Position of condition (draft k, Froude m) in draft-major order.
pub fn condition_index(draft: usize, froude: usize) -> usize {
    draft * FROUDE_NUMBERS.len() + froude
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub nx: usize,
    pub nz: usize,
    pub michell: MichellOptions,
    pub density: f64,
    pub gravity: f64,
    pub viscosity: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            nx: MICHELL_NX,
            nz: MICHELL_NZ,
            michell: MichellOptions::default(),
            density: SEAWATER_DENSITY,
            gravity: GRAVITY,
            viscosity: SEAWATER_VISCOSITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DragTable {
    pub loa: f64,
    pub depth: f64,
    /// Waterline length per draft.
    pub lwl: [f64; 4],
    /// Wetted surface per draft.
    pub aws: [f64; 4],
    /// Per condition, draft-major.
    pub cw: Vec<f64>,
    pub rw: Vec<f64>,
    pub rf: Vec<f64>,
    pub rt: Vec<f64>,
}

/// Runs all 32 conditions on `shape`. Froude numbers use the waterline length
/// at each draft; Cw is normalized by loa squared.
pub fn sweep_32<S: HullShape + ?Sized>(shape: &S) -> Result<DragTable> {
    sweep_32_with(shape, &SweepOptions::default())
}

pub fn sweep_32_with<S: HullShape + ?Sized>(shape: &S, opts: &SweepOptions) -> Result<DragTable> {
    let depth = shape.depth();
    let loa = shape.loa();
    let mut t = DragTable {
        loa,
        depth,
        lwl: [0.0; 4],
        aws: [0.0; 4],
        cw: vec![0.0; NUM_CONDITIONS],
        rw: vec![0.0; NUM_CONDITIONS],
        rf: vec![0.0; NUM_CONDITIONS],
        rt: vec![0.0; NUM_CONDITIONS],
    };
    for (k, &frac) in DRAFT_FRACS.iter().enumerate() {
        let draft = frac * depth;
        let grid = offset_grid(shape, draft, opts.nx, opts.nz)?;
        let lwl = waterline_length(shape, draft);
        let aws = hydrostatics(shape, draft)?.wetted_area;
        t.lwl[k] = lwl;
        t.aws[k] = aws;
        for (m, &fnum) in FROUDE_NUMBERS.iter().enumerate() {
            let cond = FlowConditions {
                speed: froude_to_speed(fnum, lwl, opts.gravity)?,
                density: opts.density,
                gravity: opts.gravity,
                viscosity: opts.viscosity,
                draft,
            };
            let rw = michell_wave_resistance_with(&grid, &cond, &opts.michell)?;
            let rf = friction_resistance(&cond, lwl, aws)?;
            let c = condition_index(k, m);
            t.cw[c] = wave_drag_coefficient(rw, &cond, loa)?;
            t.rw[c] = rw;
            t.rf[c] = rf;
            t.rt[c] = rw + rf;
        }
    }
    Ok(t)
}

fn bracket(nodes: &[f64], v: f64) -> (usize, f64) {
    let n = nodes.len();
    let mut k = 0;
    while k + 2 < n && v > nodes[k + 1] {
        k += 1;
    }
    let s = (v - nodes[k]) / (nodes[k + 1] - nodes[k]);
    (k, s.clamp(0.0, 1.0))
}

/// Bilinear interpolation of log10 Cw over the draft x Froude grid.
pub fn interpolate_cw(table: &DragTable, froude: f64, draft_frac: f64) -> Result<f64> {
    let (flo, fhi) = (FROUDE_NUMBERS[0], FROUDE_NUMBERS[7]);
    let (dlo, dhi) = (DRAFT_FRACS[0], DRAFT_FRACS[3]);
    if !(froude >= flo - 1e-12 && froude <= fhi + 1e-12) {
        return Err(Error::Domain(format!(
            "Froude number {froude} outside [{flo}, {fhi}]"
        )));
    }
    if !(draft_frac >= dlo - 1e-12 && draft_frac <= dhi + 1e-12) {
        return Err(Error::Domain(format!(
            "draft fraction {draft_frac} outside [{dlo}, {dhi}]"
        )));
    }
    let (m, s) = bracket(&FROUDE_NUMBERS, froude);
    let (k, r) = bracket(&DRAFT_FRACS, draft_frac);
    let at = |kk: usize, mm: usize| -> Result<f64> {
        let v = table.cw[condition_index(kk, mm)];
        if v > 0.0 {
            Ok(v.log10())
        } else {
            Err(Error::Domain(format!("non-positive Cw {v} at a grid node")))
        }
    };
    // Exact node values are returned untouched.
    if (s == 0.0 || s == 1.0) && (r == 0.0 || r == 1.0) {
        return Ok(table.cw[condition_index(k + r as usize, m + s as usize)]);
    }
    let v00 = at(k, m)?;
    let v01 = at(k, m + 1)?;
    let v10 = at(k + 1, m)?;
    let v11 = at(k + 1, m + 1)?;
    let v = (1.0 - r) * ((1.0 - s) * v00 + s * v01) + r * ((1.0 - s) * v10 + s * v11);
    Ok(10f64.powf(v))
}

pub fn drag_header() -> String {
    let mut h = String::from("hull_id");
    for d in DRAFT_LABELS {
        let _ = write!(h, ",Lwl_{d}");
    }
    for d in DRAFT_LABELS {
        let _ = write!(h, ",Aws_{d}");
    }
    for prefix in ["Cw", "Rw", "Rf", "Rt"] {
        for d in DRAFT_LABELS {
            for f in FROUDE_NUMBERS {
                let _ = write!(h, ",{prefix}_{d}_{}", froude_label(f));
            }
        }
    }
    h
}

pub fn format_drag_row(id: &str, t: &DragTable) -> String {
    let mut s = String::from(id);
    for v in t
        .lwl
        .iter()
        .chain(&t.aws)
        .chain(&t.cw)
        .chain(&t.rw)
        .chain(&t.rf)
        .chain(&t.rt)
    {
        s.push(',');
        s.push_str(&fmt_num(*v));
    }
    s
}

/// One parsed drag-table row. Loa and depth are not stored in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct DragRow {
    pub id: String,
    pub table: DragTable,
}

pub fn parse_drag(text: &str) -> Result<Vec<DragRow>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.trim() != drag_header() {
        return Err(Error::Parse {
            row: 0,
            column: 0,
            message: "unexpected drag table header".into(),
        });
    }
    let ncols = 1 + 8 + 4 * NUM_CONDITIONS;
    let mut out = Vec::new();
    for (r, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != ncols {
            return Err(Error::Parse {
                row: r + 1,
                column: cells.len(),
                message: format!("expected {ncols} cells, found {}", cells.len()),
            });
        }
        let mut v = Vec::with_capacity(ncols - 1);
        for (c, cell) in cells[1..].iter().enumerate() {
            v.push(cell.trim().parse::<f64>().map_err(|_| Error::Parse {
                row: r + 1,
                column: c + 1,
                message: format!("non-numeric value {cell:?}"),
            })?);
        }
        let n = NUM_CONDITIONS;
        out.push(DragRow {
            id: cells[0].trim().to_string(),
            table: DragTable {
                loa: f64::NAN,
                depth: f64::NAN,
                lwl: v[0..4].try_into().unwrap(),
                aws: v[4..8].try_into().unwrap(),
                cw: v[8..8 + n].to_vec(),
                rw: v[8 + n..8 + 2 * n].to_vec(),
                rf: v[8 + 2 * n..8 + 3 * n].to_vec(),
                rt: v[8 + 3 * n..8 + 4 * n].to_vec(),
            },
        });
    }
    Ok(out)
}

pub fn load_drag(path: &Path) -> Result<Vec<DragRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_drag(&text)
}
