//! Minimal-norm solvers for the per-node entropy inequality
//! `a' theta >= b` — quadratic continuous knapsack problems in the stencil
//! coefficients.
//!
//! Three variants cover the four schemes:
//!
//! * [`solve_unbounded`]: `theta >= 0` only (ECAV). Closed form
//!   `theta = b a / |a|^2` when `b > 0`.
//! * [`solve_bounded`]: `0 <= theta <= upper` (KL and the relaxed KL
//!   trailing column). Exact breakpoint search on the dual variable.
//! * [`solve_relaxed`]: `theta >= 0` with possibly mixed-sign `a` (relaxed
//!   ECAV). Closed form on the clipped vector `a^c = max(a, 0)`.
//!
//! All solvers write into a caller-provided slice and report feasibility;
//! none allocate on the happy path (the breakpoint buffer is stack-backed
//! for stencil-sized problems).

use smallvec::SmallVec;

/// Whether the inequality could be satisfied within the variable bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    /// `b > 0` but no admissible `theta` reaches it; `theta` holds the
    /// most-dissipative fallback (all zeros for the unbounded variants,
    /// `upper` for the bounded one).
    Infeasible,
}

impl Feasibility {
    pub fn is_feasible(self) -> bool {
        matches!(self, Feasibility::Feasible)
    }
}

/// Minimal-norm `theta >= 0` with `a' theta >= b`; requires `a >= 0`
/// componentwise. Returns zeros when `b <= 0` (the inequality is slack).
pub fn solve_unbounded(a: &[f64], b: f64, theta: &mut [f64]) -> Feasibility {
    assert_eq!(a.len(), theta.len());
    debug_assert!(a.iter().all(|&ak| ak >= 0.0), "unbounded solve expects clipped a");
    theta.fill(0.0);
    if b <= 0.0 {
        return Feasibility::Feasible;
    }
    let denom: f64 = a.iter().map(|&ak| ak * ak).sum();
    if denom <= 0.0 {
        return Feasibility::Infeasible;
    }
    let mu = b / denom;
    for (tk, &ak) in theta.iter_mut().zip(a) {
        *tk = mu * ak;
    }
    Feasibility::Feasible
}

/// Minimal-norm `theta >= 0` with `a' theta >= b` for possibly mixed-sign
/// `a`: entries with `a_k <= 0` cannot help and stay at zero, so the
/// solution is the unbounded closed form on `a^c = max(a, 0)`.
pub fn solve_relaxed(a: &[f64], b: f64, theta: &mut [f64]) -> Feasibility {
    assert_eq!(a.len(), theta.len());
    theta.fill(0.0);
    if b <= 0.0 {
        return Feasibility::Feasible;
    }
    let denom: f64 = a.iter().map(|&ak| ak.max(0.0).powi(2)).sum();
    if denom <= 0.0 {
        return Feasibility::Infeasible;
    }
    let mu = b / denom;
    for (tk, &ak) in theta.iter_mut().zip(a) {
        *tk = mu * ak.max(0.0);
    }
    Feasibility::Feasible
}

/// Minimal-norm `0 <= theta <= upper` with `a' theta >= b`, mixed-sign `a`
/// allowed. When the constraint cannot be met even at `theta = upper` on
/// every helpful entry, `theta` is set to `upper` (the most dissipative
/// admissible point) and `Infeasible` is returned.
///
/// The KKT conditions give `theta_k = clamp(mu a_k, 0, upper_k)` for a dual
/// variable `mu >= 0`; `g(mu) = a' theta(mu)` is piecewise linear and
/// nondecreasing, so `mu` is found exactly by walking the saturation
/// breakpoints `upper_k / a_k` in ascending order.
pub fn solve_bounded(a: &[f64], b: f64, upper: &[f64], theta: &mut [f64]) -> Feasibility {
    assert_eq!(a.len(), upper.len());
    assert_eq!(a.len(), theta.len());
    debug_assert!(upper.iter().all(|&uk| uk >= 0.0));
    theta.fill(0.0);
    if b <= 0.0 {
        return Feasibility::Feasible;
    }

    // Entries that can contribute, their saturation breakpoints, and the
    // total reachable budget.
    let mut bps: SmallVec<[(f64, usize); 16]> = SmallVec::new();
    let mut s2 = 0.0; // sum a_k^2 over active (positive, unsaturated) entries
    let mut cap = 0.0; // sum a_k upper_k over positive entries
    for (k, (&ak, &uk)) in a.iter().zip(upper).enumerate() {
        if ak > 0.0 && uk > 0.0 {
            bps.push((uk / ak, k));
            s2 += ak * ak;
            cap += ak * uk;
        }
    }
    if cap < b {
        theta.copy_from_slice(upper);
        return Feasibility::Infeasible;
    }
    bps.sort_by(|x, y| x.0.total_cmp(&y.0));

    // Walk segments of g(mu) = sat + mu s2, saturating one entry per
    // breakpoint, until the root mu* = (b - sat) / s2 lands in the segment.
    let mut sat = 0.0;
    let mut mu = f64::INFINITY;
    for &(bp, k) in &bps {
        if s2 > 0.0 {
            let cand = (b - sat) / s2;
            if cand <= bp {
                mu = cand;
                break;
            }
        }
        sat += a[k] * upper[k];
        s2 -= a[k] * a[k];
    }
    // Fallthrough only via roundoff at cap ~= b: every helpful entry
    // saturates and mu = inf clamps them all to upper.
    for &(_, k) in &bps {
        theta[k] = (mu * a[k]).min(upper[k]);
    }
    Feasibility::Feasible
}
