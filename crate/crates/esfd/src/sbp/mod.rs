//! Uniform tensor-product grids and summation-by-parts (SBP) difference
//! operators.
//!
//! The semidiscrete schemes in this crate are written in flux-differencing
//! form: instead of applying a derivative matrix to a flux field, every node
//! exchanges a two-point numerical flux with each stencil neighbor, weighted
//! by a "stencil normal" extracted from the SBP operator. [`NormalTable`]
//! holds those weights; [`Sbp1d`] holds the underlying one-dimensional
//! operator factors.

mod grid;
mod normals;
mod operator;

pub use grid::{Axis, Grid};
pub use normals::{node_mass, BoundaryEntry, NormalEntry, NormalTable};
pub use operator::{apply_derivative, Sbp1d};
