//! Relative positivity limiting: per-node blending floors that keep the
//! forward-Euler update admissible.
//!
//! Residuals here follow the flux-sum convention of the semi-discrete
//! scheme `M_ii du_i/dt + r_i = 0`, i.e. an explicit Euler step reads
//! `u_i' = u_i - (dt / M_ii) r_i`. Given the high- and low-order residuals
//! `r^H` and `r^L`, the blended update with coefficient `ell` is
//!
//! ```text
//!   u_i'(ell) = u_i - (dt / M_ii) [ (1 - ell) r_i^H + ell r_i^L ],
//! ```
//!
//! and the limiter picks the smallest `ell` in `[0, 1]` with
//!
//! ```text
//!   rho(u_i'(ell)) >= alpha rho(u_i'(1)),   p(u_i'(ell)) >= alpha p(u_i'(1)),
//! ```
//!
//! a relative bound against the (assumed admissible) low-order update. The
//! density bound is affine in `ell` and solved in closed form; pressure is
//! concave along the blend segment, so the remaining feasible set is an
//! interval ending at `ell = 1` and bisection from the density floor
//! converges to its left endpoint.

use crate::euler::{Gas, State};
use crate::{Error, Result};

/// Largest admissible forward-Euler fraction of `dt` for the low-order
/// residual, found by bisecting the step scale. Returns `dt` itself when
/// the full step is admissible at every node.
pub fn max_admissible_dt<const D: usize>(
    gas: &Gas,
    u: &[State<D>],
    r_l: &[State<D>],
    mass: &[f64],
    dt: f64,
) -> f64 {
    let admissible = |s: f64| {
        u.iter()
            .zip(r_l)
            .zip(mass)
            .all(|((ui, ri), &m)| gas.is_admissible(&(*ui - *ri * (s * dt / m))))
    };
    if admissible(1.0) {
        return dt;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo * dt
}

/// Computes the per-node limiting coefficients `ell` (pre-symmetrization).
///
/// Fails with [`Error::TimestepTooLarge`] when the low-order update itself
/// leaves the admissible set — the premise of relative limiting — reporting
/// the bisected largest admissible step as `bound`.
pub fn limiting_coefficients<const D: usize>(
    gas: &Gas,
    u: &[State<D>],
    r_h: &[State<D>],
    r_l: &[State<D>],
    mass: &[f64],
    dt: f64,
    alpha: f64,
    ell: &mut [f64],
) -> Result<()> {
    let n = u.len();
    assert!(r_h.len() == n && r_l.len() == n && mass.len() == n && ell.len() == n);
    debug_assert!((0.0..=1.0).contains(&alpha));

    for i in 0..n {
        let low = u[i] - r_l[i] * (dt / mass[i]);
        if !gas.is_admissible(&low) {
            let bound = max_admissible_dt(gas, u, r_l, mass, dt);
            return Err(Error::TimestepTooLarge { dt, bound });
        }
        ell[i] = node_ell(gas, &u[i], &r_h[i], &r_l[i], mass[i], dt, alpha, &low);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn node_ell<const D: usize>(
    gas: &Gas,
    u: &State<D>,
    r_h: &State<D>,
    r_l: &State<D>,
    m: f64,
    dt: f64,
    alpha: f64,
    low: &State<D>,
) -> f64 {
    let blend = |ell: f64| *u - (*r_h * (1.0 - ell) + *r_l * ell) * (dt / m);
    let rho_floor = alpha * low.rho;
    let p_floor = alpha * gas.pressure(low);

    // Density bound in closed form; slack whenever the high-order update
    // does not drain density faster than the low-order one.
    let drho = r_h.rho - r_l.rho;
    let mut lo = if drho > 0.0 {
        (1.0 - (1.0 - alpha) / dt * ((m * u.rho - dt * r_l.rho) / drho)).clamp(0.0, 1.0)
    } else {
        0.0
    };

    let feasible = |ell: f64| {
        let w = blend(ell);
        w.rho >= rho_floor && gas.pressure(&w) >= p_floor
    };
    if feasible(lo) {
        return lo;
    }
    // ell = 1 reproduces the low-order update exactly, so the upper end is
    // always feasible.
    let mut hi = 1.0;
    let mut it = 0;
    while hi - lo > 1e-12 && it < 30 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        it += 1;
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::Gas;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gas() -> Gas {
        Gas::default()
    }

    fn zero() -> State<1> {
        State::zero()
    }

    #[test]
    fn identical_residuals_need_no_limiting() {
        let g = gas();
        let u = [g.from_primitive(1.0, [0.5], 1.0); 4];
        let r = [State { rho: 0.3, mom: [0.1], e: -0.2 }; 4];
        let mut ell = [f64::NAN; 4];
        limiting_coefficients(&g, &u, &r, &r, &[0.5; 4], 0.1, 0.5, &mut ell).unwrap();
        assert_eq!(ell, [0.0; 4]);
    }

    #[test]
    fn admissible_high_order_update_is_unlimited_at_alpha_zero() {
        let g = gas();
        let u = [g.from_primitive(1.0, [0.0], 1.0)];
        let r_h = [State { rho: 0.4, mom: [0.2], e: 0.3 }];
        let r_l = [zero()];
        let mut ell = [f64::NAN];
        limiting_coefficients(&g, &u, &r_h, &r_l, &[1.0], 1.0, 0.0, &mut ell).unwrap();
        assert_eq!(ell, [0.0]);
    }

    /// Density-driven case with a hand value: u = (1, 0, 2.5), m = 0.1,
    /// dt = 0.1, r^H = (1.5, 0, 1.5), r^L = 0, alpha = 0.5. The blend
    /// density is 1 - 1.5 (1 - ell), and the relative bound 0.5 gives
    /// ell = 2/3.
    #[test]
    fn density_violation_hits_the_closed_form() {
        let g = gas();
        let u = [g.from_primitive(1.0, [0.0], 1.0)];
        let r_h = [State { rho: 1.5, mom: [0.0], e: 1.5 }];
        let r_l = [zero()];
        let mut ell = [f64::NAN];
        limiting_coefficients(&g, &u, &r_h, &r_l, &[0.1], 0.1, 0.5, &mut ell).unwrap();
        assert_abs_diff_eq!(ell[0], 2.0 / 3.0, epsilon = 1e-6);

        let blended = u[0] - (r_h[0] * (1.0 - ell[0]) + r_l[0] * ell[0]) * (0.1 / 0.1);
        assert!(blended.rho >= 0.5 * u[0].rho - 1e-13);
        assert!(g.pressure(&blended) >= 0.5 * g.pressure(&u[0]) - 1e-13);
    }

    /// Pressure-driven case: the density bound is slack (drho = 0) but the
    /// high-order update drains internal energy. With u = (1, 0, 2.5),
    /// r^H = (0, 0, 2.6), alpha = 0.5: p(ell) = 0.4 (2.5 - 2.6 (1 - ell))
    /// and the bound 0.5 gives ell = 1 - 1.25/2.6.
    #[test]
    fn pressure_violation_is_bisected() {
        let g = gas();
        let u = [g.from_primitive(1.0, [0.0], 1.0)];
        let r_h = [State { rho: 0.0, mom: [0.0], e: 2.6 }];
        let r_l = [zero()];
        let mut ell = [f64::NAN];
        limiting_coefficients(&g, &u, &r_h, &r_l, &[1.0], 1.0, 0.5, &mut ell).unwrap();
        assert_abs_diff_eq!(ell[0], 1.0 - 1.25 / 2.6, epsilon = 2e-9);

        let blended = u[0] - r_h[0] * (1.0 - ell[0]);
        assert!(g.pressure(&blended) >= 0.5 * g.pressure(&u[0]) - 1e-13);
    }

    #[test]
    fn inadmissible_low_order_update_reports_the_step_bound() {
        let g = gas();
        let u = [g.from_primitive(1.0, [0.0], 1.0)];
        let r_l = [State { rho: 2.0, mom: [0.0], e: 0.0 }];
        let mut ell = [f64::NAN];
        let err = limiting_coefficients(&g, &u, &r_l, &r_l, &[1.0], 1.0, 0.5, &mut ell)
            .unwrap_err();
        match err {
            Error::TimestepTooLarge { dt, bound } => {
                assert_eq!(dt, 1.0);
                // Density 1 - 2 s dt crosses zero at s dt = 0.5.
                assert_abs_diff_eq!(bound, 0.5, epsilon = 1e-9);
                assert!(bound < dt);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    fn state_and_residuals() -> impl Strategy<Value = (State<1>, State<1>, State<1>)> {
        let st = (0.2..2.0f64, -1.0..1.0f64, 0.2..2.0f64)
            .prop_map(|(r, v, p)| Gas::default().from_primitive(r, [v], p));
        let res = (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
            .prop_map(|(a, b, c)| State { rho: a, mom: [b], e: c });
        (st, res.clone(), res)
    }

    proptest! {
        /// For steps small enough that the low-order update is admissible,
        /// the returned coefficient is in [0, 1] and the blended update
        /// satisfies both relative bounds.
        #[test]
        fn blended_update_respects_relative_bounds(
            (u0, rh0, rl0) in state_and_residuals(),
            alpha in 0.0..0.9f64,
            dt in 1e-4..0.05f64,
        ) {
            let g = gas();
            let u = [u0];
            let r_h = [rh0];
            let r_l = [rl0];
            let mut ell = [f64::NAN];
            prop_assume!(
                limiting_coefficients(&g, &u, &r_h, &r_l, &[1.0], dt, alpha, &mut ell).is_ok()
            );
            prop_assert!((0.0..=1.0).contains(&ell[0]));

            let low = u0 - rl0 * dt;
            let blended = u0 - (rh0 * (1.0 - ell[0]) + rl0 * ell[0]) * dt;
            prop_assert!(blended.rho >= alpha * low.rho - 1e-12);
            prop_assert!(g.pressure(&blended) >= alpha * g.pressure(&low) - 1e-12);
        }
    }
}
