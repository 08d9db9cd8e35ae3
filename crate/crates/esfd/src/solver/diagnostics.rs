//! Conservation and entropy bookkeeping with compensated summation.

use serde::Serialize;

use super::System;
use crate::euler::State;

/// Compensated accumulator (Neumaier's variant of Kahan summation, which
/// keeps the correction even when a term dwarfs the running sum).
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.c
    }
}

/// Component-wise compensated accumulator for conservative states.
#[derive(Clone, Copy, Debug)]
pub struct KahanState<const D: usize> {
    rho: Kahan,
    mom: [Kahan; D],
    e: Kahan,
}

impl<const D: usize> Default for KahanState<D> {
    fn default() -> Self {
        KahanState { rho: Kahan::default(), mom: [Kahan::default(); D], e: Kahan::default() }
    }
}

impl<const D: usize> KahanState<D> {
    pub fn add(&mut self, s: &State<D>) {
        self.rho.add(s.rho);
        for k in 0..D {
            self.mom[k].add(s.mom[k]);
        }
        self.e.add(s.e);
    }

    pub fn total(&self) -> State<D> {
        let mut mom = [0.0; D];
        for k in 0..D {
            mom[k] = self.mom[k].total();
        }
        State { rho: self.rho.total(), mom, e: self.e.total() }
    }
}

/// Integral invariants of a solution snapshot.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Diagnostics<const D: usize> {
    /// Mass-weighted totals `sum_i M_ii u_i` of the conserved variables.
    pub total_conserved: State<D>,
    /// Mass-weighted total entropy `sum_i M_ii eta_i`.
    pub total_entropy: f64,
    /// Running time integral of the boundary surface fluxes, accumulated
    /// with the stepper's quadrature weights; on periodic grids this is
    /// identically zero and the conserved totals are invariant.
    pub boundary_flux_integral: State<D>,
    /// Largest per-node entropy-constraint residual `b_i - a_i' theta_i`
    /// observed in the last step's stages (non-positive when every
    /// inequality held).
    pub max_entropy_residual: f64,
}

impl<const D: usize> System<D> {
    /// Mass-weighted totals of the conserved variables and the entropy,
    /// accumulated with compensated summation in a fixed node order.
    pub fn totals(&self, u: &[State<D>]) -> (State<D>, f64) {
        let gas = self.gas();
        let mut ks = KahanState::default();
        let mut ke = Kahan::default();
        for (ui, &m) in u.iter().zip(self.mass()) {
            ks.add(&(*ui * m));
            ke.add(gas.entropy(ui).eta * m);
        }
        (ks.total(), ke.total())
    }

    /// Snapshot diagnostics; the boundary integral and entropy residual are
    /// tracked by the stepper across stages.
    pub fn diagnostics(
        &self,
        u: &[State<D>],
        boundary_flux_integral: State<D>,
        max_entropy_residual: f64,
    ) -> Diagnostics<D> {
        let (total_conserved, total_entropy) = self.totals(u);
        Diagnostics { total_conserved, total_entropy, boundary_flux_integral, max_entropy_residual }
    }
}
