//! Entropy-stable, positivity-preserving finite-difference solvers for the
//! compressible Euler equations.
//!
//! The crate is layered bottom-up:
//!
//! - [`sbp`]: tensor-product grids and summation-by-parts difference
//!   operators, recast as tables of node-pair "stencil normals" so that the
//!   semidiscrete scheme can be written in flux-differencing form,
//! - [`euler`]: state algebra, thermodynamics, the entropy pair, and the
//!   central / Lax-Friedrichs / HLLC numerical fluxes,
//! - [`limiter`]: per-node quadratic knapsack problems that select the
//!   minimal artificial-viscosity or flux-blending coefficients subject to a
//!   discrete entropy inequality, plus positivity limiting coefficients,
//! - [`solver`]: semidiscrete residual assembly, explicit time steppers
//!   (classical RK4 and an embedded SSPRK(4,3) pair with adaptive step
//!   control), weak boundary treatment, and per-step diagnostics.
//!
//! All floating-point work is `f64`. Grids are uniform tensor products in
//! one or two dimensions; states are strictly admissible (positive density
//! and pressure) or the solver errors out — there is no clipping.

pub mod error;
pub mod euler;
pub mod limiter;
pub mod sbp;
pub mod solver;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
