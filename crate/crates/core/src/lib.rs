//! A desk-scale laboratory for δ-discretized point-line incidences in the
//! plane and their consequences for vertical projections in the first
//! Heisenberg group: Loomis-Whitney ratios, Gagliardo-Nirenberg-Sobolev and
//! isoperimetric checks.

// `!(x >= y)` is used deliberately so NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod heisenberg;
pub mod incidence;
pub mod io;
pub mod measure;
pub mod planar;
pub mod reduction;
pub mod rich;
pub mod rng;
pub mod sobolev;
pub mod tolerances;
pub mod voxel;

pub use error::{LabError, Result};
