//! Weak boundary treatment: exterior states for the boundary surface flux.
//!
//! Every boundary node carries a term `|b_i| f^surf(u_i, u^ext_i, bhat_i)`
//! in its flux sum, where `f^surf` is the HLLC flux and the exterior state
//! depends on the configured [`Boundary`] treatment.

use super::Boundary;
use crate::euler::State;
use crate::sbp::BoundaryEntry;

/// Exterior state seen through boundary entry `bi`.
pub(super) fn exterior_state<const D: usize>(
    boundary: &Boundary<D>,
    bi: usize,
    be: &BoundaryEntry<D>,
    interior: &State<D>,
) -> State<D> {
    match boundary {
        Boundary::Periodic => unreachable!("periodic grids have no boundary entries"),
        Boundary::Dirichlet(states) => states[bi],
        Boundary::Reflective => mirror_state(interior, &be.unit),
    }
}

/// Reflects a state through the plane with unit normal `nhat`: density and
/// total energy are kept, the normal momentum component is negated. Feeding
/// the mirror pair through an exact or approximate Riemann solver yields a
/// wall flux with zero mass transport.
pub fn mirror_state<const D: usize>(u: &State<D>, nhat: &[f64; D]) -> State<D> {
    let mut mn = 0.0;
    for k in 0..D {
        mn += u.mom[k] * nhat[k];
    }
    let mut out = *u;
    for k in 0..D {
        out.mom[k] -= 2.0 * mn * nhat[k];
    }
    out
}
