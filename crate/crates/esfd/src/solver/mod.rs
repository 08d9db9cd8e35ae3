//! Semi-discrete residual assembly, time integration, and diagnostics.
//!
//! A [`System`] bundles the grid, the SBP operators in stencil-normal form,
//! the gas model, and a [`SchemeConfig`]; its residual methods assemble the
//! flux-sum form of the semi-discrete scheme
//!
//! ```text
//!   M_ii du_i/dt + sum_j |n_ij| f_ij(theta_ij) + |b_i| f^surf_i = 0,
//! ```
//!
//! so residuals returned by the `rhs_*` methods are the flux sums `r_i`
//! (including the weak boundary term) and the time derivative is
//! `-r_i / M_ii`. Explicit steppers (classical RK4 and the Shu-Osher
//! SSPRK(4,3) pair with an embedded second-order error estimate) recompute
//! limiting coefficients and knapsack solves at every stage.
//!
//! Each stage follows a four-phase pipeline: parallel per-pair flux and
//! contraction evaluation against an immutable snapshot, a synchronized
//! pairwise symmetrization merge, parallel per-node residual accumulation,
//! and a single-owner state advance. Per-pair quantities are evaluated once
//! and mirrored by exact IEEE negation, which makes the scheme conservative
//! to machine precision and the whole pipeline deterministic regardless of
//! thread count.

mod adaptive;
mod boundary;
mod diagnostics;
mod rhs;
mod snapshot;
mod stepper;

pub use adaptive::{integrate_adaptive, AdaptiveOpts};
pub use boundary::mirror_state;
pub use diagnostics::{Diagnostics, Kahan, KahanState};
pub use rhs::{CoefficientField, StageDiagnostics, Workspace};
pub use snapshot::write_snapshot;
pub use stepper::{integrate_fixed, step, Integrator, RunLog, StepDiagnostics, StepRecord};

use crate::euler::{Gas, State};
use crate::sbp::{node_mass, Grid, NormalTable, Sbp1d};
use crate::{Error, Result};

/// Spatial discretization scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Unlimited high-order flux differencing (may lose admissibility).
    HighOrder,
    /// Fully low-order flux differencing.
    LowOrder,
    /// Entropy-correction artificial viscosity.
    Ecav,
    /// Knapsack-limited flux blending.
    Kl,
    /// ECAV with the relaxed entropy inequality.
    Recav,
    /// Knapsack limiting with the relaxed entropy inequality.
    Rkl,
}

impl Scheme {
    /// Whether the scheme solves per-node entropy constraints.
    pub fn is_limited(self) -> bool {
        !matches!(self, Scheme::HighOrder | Scheme::LowOrder)
    }

    /// Whether the blended flux is the convex high/low combination (as
    /// opposed to high-order plus scalar artificial viscosity).
    pub fn blends_fluxes(self) -> bool {
        matches!(self, Scheme::Kl | Scheme::Rkl | Scheme::LowOrder)
    }

    /// Whether the relaxed (per-node entropy-flux variable) inequality is
    /// used.
    pub fn is_relaxed(self) -> bool {
        matches!(self, Scheme::Recav | Scheme::Rkl)
    }
}

/// Low-order dissipative flux choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LowFlux {
    /// Local Lax-Friedrichs with the Davis wavespeed.
    #[default]
    Lxf,
    /// HLLC approximate Riemann solver.
    Hllc,
}

/// Relative positivity enforcement.
#[derive(Clone, Copy, Debug)]
pub struct Positivity {
    /// Relative bound: blended updates keep at least `alpha` times the
    /// density and pressure of the low-order forward-Euler update.
    pub alpha: f64,
}

/// Boundary treatment, applied on every bounded axis.
#[derive(Clone, Debug)]
pub enum Boundary<const D: usize> {
    /// All axes periodic; no boundary nodes exist.
    Periodic,
    /// Constant-in-time exterior states, one per boundary node, aligned
    /// with [`NormalTable::boundary`].
    Dirichlet(Vec<State<D>>),
    /// Mirror state: normal momentum negated through the surface flux.
    Reflective,
}

/// Complete scheme selection for a run.
#[derive(Clone, Debug)]
pub struct SchemeConfig<const D: usize> {
    pub scheme: Scheme,
    pub low_flux: LowFlux,
    /// Accuracy order `N` in 2..=5; odd orders share the next even centered
    /// interior stencil.
    pub order: usize,
    pub positivity: Option<Positivity>,
    pub boundary: Boundary<D>,
}

/// Nodal states plus time, the unit the steppers advance.
#[derive(Clone, Debug)]
pub struct SolutionField<const D: usize> {
    pub states: Vec<State<D>>,
    pub time: f64,
    /// Cleared when an unlimited high-order run leaves the admissible set;
    /// limited runs error out instead.
    pub admissible: bool,
}

impl<const D: usize> SolutionField<D> {
    pub fn new(states: Vec<State<D>>) -> Self {
        SolutionField { states, time: 0.0, admissible: true }
    }
}

/// The assembled discretization: grid, operators, stencil-normal table,
/// quadrature masses, gas model, and scheme configuration.
pub struct System<const D: usize> {
    grid: Grid<D>,
    ops: [Sbp1d; D],
    table: NormalTable<D>,
    mass: Vec<f64>,
    gas: Gas,
    config: SchemeConfig<D>,
}

/// Maps the accuracy order `N` to the centered interior stencil order
/// (odd orders share the next even stencil, matching their observed
/// superconvergence).
pub fn stencil_order(order: usize) -> Result<usize> {
    match order {
        2 => Ok(2),
        3 | 4 => Ok(4),
        5 => Ok(6),
        other => Err(Error::UnsupportedOrder(other)),
    }
}

impl<const D: usize> System<D> {
    pub fn new(grid: Grid<D>, gas: Gas, config: SchemeConfig<D>) -> Result<Self> {
        let p = stencil_order(config.order)?;
        let mut ops = Vec::with_capacity(D);
        for k in 0..D {
            ops.push(Sbp1d::new(p, grid.axes[k], k)?);
        }
        let ops: [Sbp1d; D] = ops.try_into().map_err(|_| Error::Internal("op array".into()))?;
        let table = NormalTable::build(&grid, &ops);
        let mass = node_mass(&grid, &ops);

        if let Some(pos) = &config.positivity {
            if !matches!(config.scheme, Scheme::Kl | Scheme::Rkl) {
                return Err(Error::InvalidConfig(
                    "positivity enforcement requires a flux-blending scheme (kl or rkl)".into(),
                ));
            }
            if !(0.0..=1.0).contains(&pos.alpha) {
                return Err(Error::InvalidConfig(format!(
                    "positivity alpha must be in [0, 1], got {}",
                    pos.alpha
                )));
            }
        }
        let has_boundary = !table.boundary().is_empty();
        match &config.boundary {
            Boundary::Periodic if has_boundary => {
                return Err(Error::InvalidConfig(
                    "periodic boundary config on a grid with bounded axes".into(),
                ))
            }
            Boundary::Dirichlet(states) => {
                if !has_boundary {
                    return Err(Error::InvalidConfig(
                        "dirichlet boundary config on a fully periodic grid".into(),
                    ));
                }
                if states.len() != table.boundary().len() {
                    return Err(Error::LengthMismatch {
                        expected: table.boundary().len(),
                        got: states.len(),
                    });
                }
            }
            Boundary::Reflective if !has_boundary => {
                return Err(Error::InvalidConfig(
                    "reflective boundary config on a fully periodic grid".into(),
                ));
            }
            _ => {}
        }

        Ok(System { grid, ops, table, mass, gas, config })
    }

    /// Builds a system whose Dirichlet exterior states are sampled from `f`
    /// at the boundary nodes. Avoids the chicken-and-egg problem of needing
    /// the system's boundary-node enumeration to assemble the state list
    /// passed to [`System::new`].
    pub fn new_with_dirichlet(
        grid: Grid<D>,
        gas: Gas,
        mut config: SchemeConfig<D>,
        f: impl Fn([f64; D]) -> State<D>,
    ) -> Result<Self> {
        config.boundary = Boundary::Reflective;
        let mut system = Self::new(grid, gas, config)?;
        system.config.boundary = Boundary::Dirichlet(system.dirichlet_states(f));
        Ok(system)
    }

    pub fn grid(&self) -> &Grid<D> {
        &self.grid
    }

    pub fn ops(&self) -> &[Sbp1d; D] {
        &self.ops
    }

    pub fn table(&self) -> &NormalTable<D> {
        &self.table
    }

    /// Diagonal quadrature masses `M_ii`.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn gas(&self) -> &Gas {
        &self.gas
    }

    pub fn config(&self) -> &SchemeConfig<D> {
        &self.config
    }

    pub fn num_nodes(&self) -> usize {
        self.grid.num_nodes()
    }

    /// Evaluates the initial condition at every node.
    pub fn project(&self, f: impl Fn([f64; D]) -> State<D>) -> SolutionField<D> {
        let states = (0..self.num_nodes()).map(|i| f(self.grid.coords(i))).collect();
        SolutionField::new(states)
    }

    /// Fixed exterior states for a Dirichlet run: the boundary-node values
    /// of `f`, in [`NormalTable::boundary`] order.
    pub fn dirichlet_states(&self, f: impl Fn([f64; D]) -> State<D>) -> Vec<State<D>> {
        self.table
            .boundary()
            .iter()
            .map(|be| f(self.grid.coords(be.node)))
            .collect()
    }

    /// First inadmissible node, if any.
    pub fn check_admissible(&self, states: &[State<D>], time: Option<f64>) -> Result<()> {
        for (i, u) in states.iter().enumerate() {
            if !self.gas.is_admissible(u) {
                return Err(Error::InadmissibleState {
                    node: i,
                    rho: u.rho,
                    pressure: self.gas.pressure(u),
                    time,
                });
            }
        }
        Ok(())
    }
}

/// Per-stage evaluation context handed to [`System::stage_rhs`].
#[derive(Clone, Copy, Debug)]
pub struct StageContext {
    /// Physical time of the stage snapshot (for error reporting).
    pub time: f64,
    /// Forward-Euler substep the positivity floors must protect.
    pub fe_dt: f64,
    /// Whether inadmissible states are a hard error even for the unlimited
    /// high-order scheme (limited and low-order schemes always check).
    pub check_admissibility: bool,
}
