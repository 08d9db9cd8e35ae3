//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong while building a discretization or running it.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Requested stencil order is not one of the supported even orders.
    #[error("unsupported operator order {0} (supported: 2, 4, 6)")]
    UnsupportedOrder(usize),

    /// Grid has too few nodes for the requested stencil.
    #[error("grid too small along dimension {dim}: {n} nodes, but order {order} ({kind}) needs at least {min}")]
    GridTooSmall {
        dim: usize,
        n: usize,
        order: usize,
        kind: &'static str,
        min: usize,
    },

    /// Axis bounds are degenerate or non-finite.
    #[error("invalid axis {dim}: lo={lo}, hi={hi}")]
    InvalidAxis { dim: usize, lo: f64, hi: f64 },

    /// A field slice does not match the grid size.
    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    /// A state with non-positive density or pressure (or non-finite entries)
    /// was encountered. No clipping is performed anywhere; this is fatal.
    #[error("inadmissible state at node {node}{}: rho={rho:.6e}, p={pressure:.6e}", time_ctx(*.time))]
    InadmissibleState {
        node: usize,
        rho: f64,
        pressure: f64,
        /// Simulation time, if known at the failure site.
        time: Option<f64>,
    },

    /// The low-order forward-Euler update left the admissible set, i.e. the
    /// positivity limiter cannot rescue the step at this step size.
    #[error("timestep too large for positivity: dt={dt:.6e}, admissible forward-Euler bound ~{bound:.6e}")]
    TimestepTooLarge { dt: f64, bound: f64 },

    /// Adaptive step control shrank dt below the useful range.
    #[error("adaptive timestep underflow at t={t:.6e}: dt={dt:.6e}")]
    DtUnderflow { t: f64, dt: f64 },

    /// Invalid run configuration (scheme/integrator combination etc.).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Internal invariant violation; indicates a bug, not bad input.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

fn time_ctx(t: Option<f64>) -> String {
    match t {
        Some(t) => format!(" (t={t:.6e})"),
        None => String::new(),
    }
}
