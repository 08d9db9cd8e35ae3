//! Compressible Euler equations: conservative states, ideal-gas
//! thermodynamics, entropy quantities, and two-point numerical fluxes.
//!
//! States are stored in conservative variables `(rho, rho*v, E)`. Everything
//! in this module is a pure function on value types, so the solver can call
//! it freely from parallel workers. Admissibility (positive density and
//! pressure) is a documented precondition of the physics routines; it is
//! checked by the solver at stage boundaries rather than on every flux
//! evaluation.

mod hllc;

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Conservative state (or any vector with the same component layout, such as
/// a flux or a vector of entropy variables) for the `D`-dimensional
/// compressible Euler equations: density, momentum, and total energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct State<const D: usize> {
    /// Density `rho` (or the density component of a flux-like vector).
    pub rho: f64,
    /// Momentum `rho * v` per spatial dimension.
    pub mom: [f64; D],
    /// Total energy `E = p/(gamma-1) + rho |v|^2 / 2`.
    pub e: f64,
}

// Manual impl because serde does not provide `Serialize` for arrays with a
// const-generic length.
impl<const D: usize> serde::Serialize for State<D> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("State", 3)?;
        st.serialize_field("rho", &self.rho)?;
        st.serialize_field("mom", &self.mom[..])?;
        st.serialize_field("e", &self.e)?;
        st.end()
    }
}

impl<const D: usize> State<D> {
    /// The zero vector.
    pub fn zero() -> Self {
        State { rho: 0.0, mom: [0.0; D], e: 0.0 }
    }

    /// Component by flat index: `0` is density, `1..=D` the momenta,
    /// `D + 1` the total energy.
    pub fn component(&self, c: usize) -> f64 {
        if c == 0 {
            self.rho
        } else if c <= D {
            self.mom[c - 1]
        } else {
            self.e
        }
    }

    /// Full inner product over all `D + 2` components.
    pub fn dot(&self, other: &Self) -> f64 {
        let mut acc = self.rho * other.rho + self.e * other.e;
        for k in 0..D {
            acc += self.mom[k] * other.mom[k];
        }
        acc
    }

    /// Euclidean norm over all `D + 2` components.
    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Velocity `v = mom / rho`. Requires `rho != 0`.
    pub fn velocity(&self) -> [f64; D] {
        let mut v = [0.0; D];
        for k in 0..D {
            v[k] = self.mom[k] / self.rho;
        }
        v
    }

    /// Kinetic energy density `|mom|^2 / (2 rho)`. Requires `rho != 0`.
    pub fn kinetic(&self) -> f64 {
        let mut m2 = 0.0;
        for k in 0..D {
            m2 += self.mom[k] * self.mom[k];
        }
        0.5 * m2 / self.rho
    }

    /// True iff every component is finite.
    pub fn is_finite(&self) -> bool {
        self.rho.is_finite() && self.e.is_finite() && self.mom.iter().all(|m| m.is_finite())
    }

    /// Component-wise maximum absolute value.
    pub fn max_abs(&self) -> f64 {
        let mut m = self.rho.abs().max(self.e.abs());
        for k in 0..D {
            m = m.max(self.mom[k].abs());
        }
        m
    }
}

impl<const D: usize> Default for State<D> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const D: usize> Add for State<D> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const D: usize> Sub for State<D> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<const D: usize> Neg for State<D> {
    type Output = Self;
    fn neg(mut self) -> Self {
        self.rho = -self.rho;
        self.e = -self.e;
        for k in 0..D {
            self.mom[k] = -self.mom[k];
        }
        self
    }
}

impl<const D: usize> AddAssign for State<D> {
    fn add_assign(&mut self, rhs: Self) {
        self.rho += rhs.rho;
        self.e += rhs.e;
        for k in 0..D {
            self.mom[k] += rhs.mom[k];
        }
    }
}

impl<const D: usize> SubAssign for State<D> {
    fn sub_assign(&mut self, rhs: Self) {
        self.rho -= rhs.rho;
        self.e -= rhs.e;
        for k in 0..D {
            self.mom[k] -= rhs.mom[k];
        }
    }
}

impl<const D: usize> Mul<f64> for State<D> {
    type Output = Self;
    fn mul(mut self, s: f64) -> Self {
        self.rho *= s;
        self.e *= s;
        for k in 0..D {
            self.mom[k] *= s;
        }
        self
    }
}

impl<const D: usize> Mul<State<D>> for f64 {
    type Output = State<D>;
    fn mul(self, u: State<D>) -> State<D> {
        u * self
    }
}

/// Entropy quantities of a state: the entropy function, its gradient (the
/// entropy variables), and the entropy potentials and fluxes per dimension.
///
/// They satisfy the potential identity `F_k = v^T f_k(u) - psi_k`.
#[derive(Clone, Copy, Debug)]
pub struct Entropy<const D: usize> {
    /// Entropy function `eta = -rho s / (gamma - 1)` with `s = ln(p rho^-gamma)`.
    pub eta: f64,
    /// Entropy variables `v = d(eta)/du`, stored with the conservative layout.
    pub v: State<D>,
    /// Entropy potentials `psi_k = rho v_k`.
    pub psi: [f64; D],
    /// Entropy fluxes `F_k = eta v_k`.
    pub flux: [f64; D],
}

/// Ideal-gas equation of state with ratio of specific heats `gamma`.
#[derive(Clone, Copy, Debug)]
pub struct Gas {
    /// Ratio of specific heats (1.4 for diatomic air).
    pub gamma: f64,
}

impl Default for Gas {
    fn default() -> Self {
        Gas { gamma: 1.4 }
    }
}

impl Gas {
    pub fn new(gamma: f64) -> Self {
        Gas { gamma }
    }

    /// Pressure `p = (gamma - 1)(E - |mom|^2 / (2 rho))`.
    pub fn pressure<const D: usize>(&self, u: &State<D>) -> f64 {
        (self.gamma - 1.0) * (u.e - u.kinetic())
    }

    /// Sound speed `c = sqrt(gamma p / rho)`. Requires an admissible state.
    pub fn sound_speed<const D: usize>(&self, u: &State<D>) -> f64 {
        (self.gamma * self.pressure(u) / u.rho).sqrt()
    }

    /// True iff the state has finite components, `rho > 0`, and `p > 0`.
    /// A state with zero internal energy (`E = |mom|^2 / (2 rho)`) is
    /// inadmissible: vacuum is excluded.
    pub fn is_admissible<const D: usize>(&self, u: &State<D>) -> bool {
        if !u.is_finite() {
            return false;
        }
        let p = self.pressure(u);
        u.rho > 0.0 && p > 0.0 && p.is_finite()
    }

    /// Builds a conservative state from primitive variables (density,
    /// velocity, pressure).
    pub fn from_primitive<const D: usize>(&self, rho: f64, vel: [f64; D], p: f64) -> State<D> {
        let mut mom = [0.0; D];
        let mut v2 = 0.0;
        for k in 0..D {
            mom[k] = rho * vel[k];
            v2 += vel[k] * vel[k];
        }
        State { rho, mom, e: p / (self.gamma - 1.0) + 0.5 * rho * v2 }
    }

    /// Recovers primitive variables (density, velocity, pressure).
    pub fn primitive<const D: usize>(&self, u: &State<D>) -> (f64, [f64; D], f64) {
        (u.rho, u.velocity(), self.pressure(u))
    }

    /// Physical flux `f_k(u) = (rho v_k, rho v v_k + p e_k, (E + p) v_k)`
    /// in coordinate direction `k`.
    pub fn flux<const D: usize>(&self, u: &State<D>, k: usize) -> State<D> {
        let p = self.pressure(u);
        let vk = u.mom[k] / u.rho;
        let mut mom = [0.0; D];
        for j in 0..D {
            mom[j] = u.mom[j] * vk;
        }
        mom[k] += p;
        State { rho: u.mom[k], mom, e: (u.e + p) * vk }
    }

    /// Directional physical flux `f(u) . n = sum_k n_k f_k(u)` for an
    /// arbitrary (not necessarily unit) direction `n`.
    pub fn flux_normal<const D: usize>(&self, u: &State<D>, n: &[f64; D]) -> State<D> {
        let p = self.pressure(u);
        let vel = u.velocity();
        let mut vn = 0.0;
        for k in 0..D {
            vn += vel[k] * n[k];
        }
        let mut mom = [0.0; D];
        for j in 0..D {
            mom[j] = u.mom[j] * vn + p * n[j];
        }
        State { rho: u.rho * vn, mom, e: (u.e + p) * vn }
    }

    /// Entropy function, variables, potentials, and fluxes of a state.
    ///
    /// Uses the physical entropy pair: `s = ln(p rho^-gamma)`,
    /// `eta = -rho s / (gamma - 1)`,
    /// `v = ((gamma - s)/(gamma - 1) - rho |vel|^2 / (2p), rho vel / p, -rho / p)`,
    /// `psi_k = rho vel_k`, `F_k = eta vel_k`.
    pub fn entropy<const D: usize>(&self, u: &State<D>) -> Entropy<D> {
        let gm1 = self.gamma - 1.0;
        let p = self.pressure(u);
        let s = p.ln() - self.gamma * u.rho.ln();
        let eta = -u.rho * s / gm1;
        let beta = u.rho / p;
        let vel = u.velocity();
        let mut v2 = 0.0;
        let mut vmom = [0.0; D];
        let mut psi = [0.0; D];
        let mut flux = [0.0; D];
        for k in 0..D {
            v2 += vel[k] * vel[k];
            vmom[k] = beta * vel[k];
            psi[k] = u.mom[k];
            flux[k] = eta * vel[k];
        }
        let v = State {
            rho: (self.gamma - s) / gm1 - 0.5 * beta * v2,
            mom: vmom,
            e: -beta,
        };
        Entropy { eta, v, psi, flux }
    }

    /// Davis estimate of the maximum wavespeed of the Riemann problem along
    /// the unit normal: `max(|v_i . n| + c_i, |v_j . n| + c_j)`. An upper
    /// bound surrogate for the exact maximum wavespeed.
    pub fn max_wavespeed<const D: usize>(
        &self,
        ui: &State<D>,
        uj: &State<D>,
        nhat: &[f64; D],
    ) -> f64 {
        let speed = |u: &State<D>| {
            let vel = u.velocity();
            let mut vn = 0.0;
            for k in 0..D {
                vn += vel[k] * nhat[k];
            }
            vn.abs() + self.sound_speed(u)
        };
        speed(ui).max(speed(uj))
    }

    /// Central (arithmetic-mean) flux `(f(u_i) + f(u_j))/2 . n`. This is the
    /// high-order volume flux; it is consistent and skew-symmetric but not
    /// dissipative.
    pub fn flux_central<const D: usize>(
        &self,
        ui: &State<D>,
        uj: &State<D>,
        nhat: &[f64; D],
    ) -> State<D> {
        (self.flux_normal(ui, nhat) + self.flux_normal(uj, nhat)) * 0.5
    }

    /// Local Lax-Friedrichs flux: the central flux plus the dissipation term
    /// `(lambda/2)(u_i - u_j)` with the Davis wavespeed `lambda`. Entropy
    /// stable and positivity preserving under a CFL restriction.
    pub fn flux_lxf<const D: usize>(
        &self,
        ui: &State<D>,
        uj: &State<D>,
        nhat: &[f64; D],
    ) -> State<D> {
        let lambda = self.max_wavespeed(ui, uj, nhat);
        self.flux_central(ui, uj, nhat) + (*ui - *uj) * (0.5 * lambda)
    }
}
