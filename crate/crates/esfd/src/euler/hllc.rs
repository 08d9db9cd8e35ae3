//! HLLC approximate Riemann solver (Harten-Lax-van Leer-contact).
//!
//! Three-wave model with Davis outer wavespeed bounds and the pressure-based
//! middle-wave estimate. Multi-dimensional states are handled by decomposing
//! the velocity into normal and tangential parts; the tangential velocity is
//! advected unchanged through the star region.

use std::sync::atomic::{AtomicBool, Ordering};

use super::{Gas, State};

/// Latch so the degenerate-wavespeed warning fires once per process; on
/// inadmissible states every flux evaluation would otherwise repeat it.
static DEGENERATE_WARNED: AtomicBool = AtomicBool::new(false);

impl Gas {
    /// HLLC flux across the interface with unit normal `nhat`, from state
    /// `ui` (on the side `nhat` points away from) to `uj`.
    ///
    /// Consistent, skew-symmetric, and entropy stable in practice; used as
    /// the low-order surface and limiting flux. On a degenerate wavespeed
    /// configuration (non-finite or vanishing contact-wave denominator,
    /// which cannot occur for admissible inputs) it falls back to the
    /// Lax-Friedrichs flux and logs the event.
    pub fn flux_hllc<const D: usize>(
        &self,
        ui: &State<D>,
        uj: &State<D>,
        nhat: &[f64; D],
    ) -> State<D> {
        let pl = self.pressure(ui);
        let pr = self.pressure(uj);
        let vl = ui.velocity();
        let vr = uj.velocity();
        let mut unl = 0.0;
        let mut unr = 0.0;
        for k in 0..D {
            unl += vl[k] * nhat[k];
            unr += vr[k] * nhat[k];
        }
        let cl = self.sound_speed(ui);
        let cr = self.sound_speed(uj);

        let s_l = (unl - cl).min(unr - cr);
        let s_r = (unl + cl).max(unr + cr);

        // Contact wavespeed from the pressure-based estimate. For admissible
        // states q_l < 0 < q_r, so the denominator is strictly negative.
        let q_l = ui.rho * (s_l - unl);
        let q_r = uj.rho * (s_r - unr);
        let denom = q_l - q_r;
        let s_m = (pr - pl + q_l * unl - q_r * unr) / denom;
        if !s_m.is_finite() || denom.abs() <= 1e-14 * (q_l.abs() + q_r.abs()) {
            if !DEGENERATE_WARNED.swap(true, Ordering::Relaxed) {
                log::warn!(
                    "degenerate HLLC wavespeeds (s_l = {s_l}, s_r = {s_r}); \
                     falling back to Lax-Friedrichs (repeats suppressed)"
                );
            }
            return self.flux_lxf(ui, uj, nhat);
        }

        if s_l >= 0.0 {
            return self.flux_normal(ui, nhat);
        }
        if s_r <= 0.0 {
            return self.flux_normal(uj, nhat);
        }

        // Subsonic: add the jump to the star state on the upwind side of the
        // contact. The star state keeps the tangential velocity and replaces
        // the normal velocity by s_m.
        let star = |u: &State<D>, vel: &[f64; D], un: f64, p: f64, q: f64, s: f64| {
            let fac = q / (s - s_m);
            let mut mom = [0.0; D];
            for k in 0..D {
                mom[k] = fac * (vel[k] + (s_m - un) * nhat[k]);
            }
            State {
                rho: fac,
                mom,
                e: fac * (u.e / u.rho + (s_m - un) * (s_m + p / q)),
            }
        };
        if s_m >= 0.0 {
            let u_star = star(ui, &vl, unl, pl, q_l, s_l);
            self.flux_normal(ui, nhat) + (u_star - *ui) * s_l
        } else {
            let u_star = star(uj, &vr, unr, pr, q_r, s_r);
            self.flux_normal(uj, nhat) + (u_star - *uj) * s_r
        }
    }
}
