//! Parametric ship hull toolkit.
//!
//! The crate is organised around a 45-term hull description
//! ([`params::HullParameters`]) and the things that can be done with it:
//!
//! * [`params`]: term table, sampling ranges, algebraic feasibility check, CSV tables.
//! * [`geom`]: the algebraic hull surface, point clouds, watertight meshes, STL,
//!   view rendering and hydrostatics.
//! * [`hydro`]: Michell thin-ship wave resistance, ITTC friction and the
//!   32-condition drag table.
//! * [`chamfer`]: Chamfer distance between point clouds and mesh ingestion.
//! * [`evo`]: genetic reconstruction of target hulls and NSGA-II drag optimization.
//! * [`surrogate`]: residual MLP predicting log10 wave-drag coefficients.
//! * [`dataset`]: parallel, resumable dataset builds and dataset statistics.

pub mod chamfer;
pub mod dataset;
pub mod error;
pub mod evo;
pub mod geom;
pub mod hydro;
pub mod params;
pub mod surrogate;

pub use error::{Error, Result};
