//! Exact Riemann solver for the 1D ideal-gas Euler equations, used as an
//! independent oracle for shock-tube references. Newton iteration on the
//! pressure function with the two-rarefaction initial guess.

/// Primitive triple (density, velocity, pressure).
#[derive(Clone, Copy, Debug)]
pub struct Prim {
    pub rho: f64,
    pub v: f64,
    pub p: f64,
}

/// A solved Riemann problem, sampled along similarity rays `xi = x / t`.
#[derive(Clone, Copy, Debug)]
pub struct RiemannFan {
    gamma: f64,
    left: Prim,
    right: Prim,
    p_star: f64,
    v_star: f64,
}

/// Pressure function of one side and its derivative: the velocity change
/// across the wave as a function of the star pressure.
fn side(gamma: f64, p: f64, s: &Prim) -> (f64, f64) {
    if p > s.p {
        // Shock branch.
        let a = 2.0 / ((gamma + 1.0) * s.rho);
        let b = (gamma - 1.0) / (gamma + 1.0) * s.p;
        let root = (a / (p + b)).sqrt();
        ((p - s.p) * root, root * (1.0 - 0.5 * (p - s.p) / (p + b)))
    } else {
        // Rarefaction branch.
        let c = (gamma * s.p / s.rho).sqrt();
        let pr = p / s.p;
        (
            2.0 * c / (gamma - 1.0) * (pr.powf((gamma - 1.0) / (2.0 * gamma)) - 1.0),
            pr.powf(-(gamma + 1.0) / (2.0 * gamma)) / (s.rho * c),
        )
    }
}

/// Solves the Riemann problem with states `left` and `right`.
pub fn solve(gamma: f64, left: Prim, right: Prim) -> RiemannFan {
    let cl = (gamma * left.p / left.rho).sqrt();
    let cr = (gamma * right.p / right.rho).sqrt();
    // Two-rarefaction guess; positive whenever the states do not generate
    // vacuum, which the presets never do.
    let z = (gamma - 1.0) / (2.0 * gamma);
    let guess = ((cl + cr - 0.5 * (gamma - 1.0) * (right.v - left.v))
        / (cl / left.p.powf(z) + cr / right.p.powf(z)))
    .powf(1.0 / z);

    let mut p = guess.max(1e-300);
    for _ in 0..100 {
        let (fl, dl) = side(gamma, p, &left);
        let (fr, dr) = side(gamma, p, &right);
        let g = fl + fr + right.v - left.v;
        let mut next = p - g / (dl + dr);
        if next <= 0.0 {
            next = 0.5 * p;
        }
        let done = (next - p).abs() <= 1e-15 * next;
        p = next;
        if done {
            break;
        }
    }
    let v_star =
        0.5 * (left.v + right.v) + 0.5 * (side(gamma, p, &right).0 - side(gamma, p, &left).0);
    RiemannFan { gamma, left, right, p_star: p, v_star }
}

impl RiemannFan {
    pub fn p_star(&self) -> f64 {
        self.p_star
    }

    pub fn v_star(&self) -> f64 {
        self.v_star
    }

    /// The primitive state on the ray `xi = x / t`.
    pub fn sample(&self, xi: f64) -> Prim {
        if xi <= self.v_star {
            self.sample_side(xi, self.left, -1.0)
        } else {
            self.sample_side(xi, self.right, 1.0)
        }
    }

    /// Samples the wave between the star region and one outer state;
    /// `sign` is -1 for the left wave and +1 for the right wave.
    fn sample_side(&self, xi: f64, s: Prim, sign: f64) -> Prim {
        let g = self.gamma;
        let c = (g * s.p / s.rho).sqrt();
        let r = (g - 1.0) / (g + 1.0);
        if self.p_star > s.p {
            // Shock wave.
            let ratio = self.p_star / s.p;
            let speed = s.v + sign * c * ((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g)).sqrt();
            let outside = if sign < 0.0 { xi <= speed } else { xi >= speed };
            if outside {
                s
            } else {
                let rho = s.rho * (ratio + r) / (r * ratio + 1.0);
                Prim { rho, v: self.v_star, p: self.p_star }
            }
        } else {
            // Rarefaction wave.
            let c_star = c * (self.p_star / s.p).powf((g - 1.0) / (2.0 * g));
            let head = s.v + sign * c;
            let tail = self.v_star + sign * c_star;
            let outside = if sign < 0.0 { xi <= head } else { xi >= head };
            let past = if sign < 0.0 { xi >= tail } else { xi <= tail };
            if outside {
                s
            } else if past {
                let rho = s.rho * (self.p_star / s.p).powf(1.0 / g);
                Prim { rho, v: self.v_star, p: self.p_star }
            } else {
                // Inside the fan.
                let v = 2.0 / (g + 1.0) * (-sign * c + 0.5 * (g - 1.0) * s.v + xi);
                let cf = 2.0 / (g + 1.0) * (c - sign * 0.5 * (g - 1.0) * (s.v - xi));
                Prim {
                    rho: s.rho * (cf / c).powf(2.0 / (g - 1.0)),
                    v,
                    p: s.p * (cf / c).powf(2.0 * g / (g - 1.0)),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sod() -> RiemannFan {
        solve(
            1.4,
            Prim { rho: 1.0, v: 0.0, p: 1.0 },
            Prim { rho: 0.125, v: 0.0, p: 0.1 },
        )
    }

    #[test]
    fn sod_star_state_matches_the_tabulated_solution() {
        // Star values for the standard Sod tube quoted to five digits
        // throughout the literature.
        let fan = sod();
        assert_relative_eq!(fan.p_star(), 0.30313, max_relative = 1e-4);
        assert_relative_eq!(fan.v_star(), 0.92745, max_relative = 1e-4);
        // Densities on either side of the contact.
        assert_relative_eq!(fan.sample(0.9).rho, 0.42632, max_relative = 1e-4);
        assert_relative_eq!(fan.sample(0.95).rho, 0.26557, max_relative = 1e-4);
    }

    #[test]
    fn far_field_samples_return_the_input_states() {
        let fan = sod();
        let l = fan.sample(-10.0);
        assert_eq!((l.rho, l.v, l.p), (1.0, 0.0, 1.0));
        let r = fan.sample(10.0);
        assert_eq!((r.rho, r.v, r.p), (0.125, 0.0, 0.1));
    }

    #[test]
    fn the_fan_interior_is_continuous_at_head_and_tail() {
        let fan = sod();
        // Left rarefaction: head at v_l - c_l = -sqrt(1.4), tail at
        // v* - c*.
        let head = -(1.4f64).sqrt();
        let eps = 1e-9;
        let a = fan.sample(head - eps);
        let b = fan.sample(head + eps);
        assert_relative_eq!(a.rho, b.rho, epsilon = 1e-6);
        assert_relative_eq!(a.p, b.p, epsilon = 1e-6);
        let c_star = (1.4 * fan.p_star() / fan.sample(0.9).rho).sqrt();
        let tail = fan.v_star() - c_star;
        let a = fan.sample(tail - eps);
        let b = fan.sample(tail + eps);
        assert_relative_eq!(a.rho, b.rho, epsilon = 1e-6);
        assert_relative_eq!(a.v, b.v, epsilon = 1e-6);
    }

    #[test]
    fn symmetric_expansion_leaves_the_contact_at_rest() {
        let fan = solve(
            1.4,
            Prim { rho: 1.0, v: -0.5, p: 1.0 },
            Prim { rho: 1.0, v: 0.5, p: 1.0 },
        );
        assert!(fan.v_star().abs() < 1e-12);
        assert!(fan.p_star() < 1.0, "double expansion drops the pressure");
        let mid = fan.sample(0.0);
        assert!(mid.v.abs() < 1e-12);
    }

    #[test]
    fn extreme_pressure_ratios_converge_to_positive_star_pressure() {
        let fan = solve(
            1.4,
            Prim { rho: 2.0, v: 0.0, p: 1e9 },
            Prim { rho: 1e-3, v: 0.0, p: 1.0 },
        );
        assert!(fan.p_star() > 1.0 && fan.p_star() < 1e9);
        assert!(fan.v_star() > 0.0);
        // The residual of the pressure equation vanishes at the root.
        let (fl, _) = super::side(1.4, fan.p_star(), &Prim { rho: 2.0, v: 0.0, p: 1e9 });
        let (fr, _) = super::side(1.4, fan.p_star(), &Prim { rho: 1e-3, v: 0.0, p: 1.0 });
        assert!((fl + fr).abs() <= 1e-9 * fan.v_star().abs().max(1.0) * 1e3);
    }
}
