//! Per-node assembly of the entropy-inequality constraint `a' theta >= b`
//! from precomputed per-edge scalars.
//!
//! The caller (the residual pipeline) evaluates, for every directed stencil
//! edge `e = (i -> j)` of a node, the entropy-variable contractions that
//! only it can compute cheaply — jumps, flux contractions, the violation
//! summand — and hands them to these functions as aligned slices. Assembly
//! is then pure arithmetic: scale by `|n_ij|`, clip, sum, and apply the
//! violation floor.
//!
//! All quantities here exclude the `|n_ij|` factor on input; it is applied
//! uniformly during assembly so a single convention holds across schemes.

/// Threshold under which an assembled violation `b` is treated as zero.
///
/// `scale` is the natural magnitude of the node's entropy-flux terms,
/// `sum_e |n_e| |f^H_e|`; violations below roundoff of that scale are
/// discretization noise, and chasing them would switch dissipation on and
/// off stochastically in smooth regions.
pub fn violation_floor(scale: f64) -> f64 {
    1e-14 * (1.0 + scale)
}

fn violation_sum(norm: &[f64], violation: &[f64], fh_scale: &[f64]) -> (f64, f64) {
    let mut b = 0.0;
    let mut scale = 0.0;
    for ((&ne, &ve), &fe) in norm.iter().zip(violation).zip(fh_scale) {
        b += ne * ve;
        scale += ne * fe;
    }
    (b, scale)
}

/// Assembles the artificial-viscosity constraint for one node.
///
/// Per-edge inputs (`m` stencil edges, aligned):
/// * `norm[e] = |n_ij|`
/// * `jump[e] = (v_j - v_i)'(u_j - u_i)` — nonnegative up to roundoff
/// * `violation[e] = (v_j - v_i)' f^H_e - (psi_j - psi_i) . nhat_e`
/// * `fh_scale[e] = |f^H_e|` — noise floor only
///
/// Writes `a[e] = |n_e| jump[e]` clipped to `>= 0` and returns the floored
/// violation `b`.
pub fn assemble_ecav(
    norm: &[f64],
    jump: &[f64],
    violation: &[f64],
    fh_scale: &[f64],
    a: &mut [f64],
) -> f64 {
    let m = norm.len();
    assert!(jump.len() == m && violation.len() == m && fh_scale.len() == m && a.len() == m);
    for e in 0..m {
        a[e] = (norm[e] * jump[e]).max(0.0);
    }
    let (b, scale) = violation_sum(norm, violation, fh_scale);
    if b <= violation_floor(scale) {
        0.0
    } else {
        b
    }
}

/// Assembles the flux-blending (knapsack) constraint for one node.
///
/// Same per-edge layout as [`assemble_ecav`] with
/// `jump[e] = (v_j - v_i)'(f^H_e - f^L_e)` and the per-edge positivity
/// floors `ell[e]` already symmetrized. Writes `a[e] = |n_e| jump[e]`
/// clipped to `>= 0` and `upper[e] = 1 - ell[e]`, and returns the floored
/// `b = violation - a' ell`: the part of the entropy violation not already
/// covered by the positivity blending (the flux later applies
/// `theta + ell`).
pub fn assemble_kl(
    norm: &[f64],
    jump: &[f64],
    violation: &[f64],
    fh_scale: &[f64],
    ell: &[f64],
    a: &mut [f64],
    upper: &mut [f64],
) -> f64 {
    let m = norm.len();
    assert!(
        jump.len() == m
            && violation.len() == m
            && fh_scale.len() == m
            && ell.len() == m
            && a.len() == m
            && upper.len() == m
    );
    let mut credit = 0.0;
    for e in 0..m {
        debug_assert!((0.0..=1.0).contains(&ell[e]));
        a[e] = (norm[e] * jump[e]).max(0.0);
        upper[e] = 1.0 - ell[e];
        credit += a[e] * ell[e];
    }
    let (raw, scale) = violation_sum(norm, violation, fh_scale);
    let b = raw - credit;
    if b <= violation_floor(scale) {
        0.0
    } else {
        b
    }
}

/// Assembles the relaxed constraint for one node: `m` per-edge columns plus
/// one trailing column for the entropy-flux variable `tau`.
///
/// Per-edge inputs with `d_e = u_i - u_j` (relaxed AV) or `f^L_e - f^H_e`
/// (relaxed knapsack):
/// * `vi_delta[e] = v_i' d_e`, `vj_delta[e] = v_j' d_e`
/// * `violation[e]`, `fh_scale[e]` as in [`assemble_ecav`]
///
/// Writes `a[e] = |n_e| vi_delta[e]` for `e < m` (mixed signs allowed) and
/// `a[m] = -sum_e |n_e| vj_delta[e]`; returns the floored plain violation
/// `b` (no positivity credit — the relaxed inequality keeps its original
/// right-hand side).
pub fn assemble_relaxed(
    norm: &[f64],
    vi_delta: &[f64],
    vj_delta: &[f64],
    violation: &[f64],
    fh_scale: &[f64],
    a: &mut [f64],
) -> f64 {
    let m = norm.len();
    assert!(
        vi_delta.len() == m
            && vj_delta.len() == m
            && violation.len() == m
            && fh_scale.len() == m
            && a.len() == m + 1
    );
    let mut tail = 0.0;
    for e in 0..m {
        a[e] = norm[e] * vi_delta[e];
        tail += norm[e] * vj_delta[e];
    }
    a[m] = -tail;
    let (b, scale) = violation_sum(norm, violation, fh_scale);
    if b <= violation_floor(scale) {
        0.0
    } else {
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::{Gas, State};
    use crate::sbp::{Axis, Grid, NormalTable, Sbp1d};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize) -> (Grid<1>, [Sbp1d; 1], NormalTable<1>) {
        let ax = Axis::periodic(n, -1.0, 1.0);
        let grid = Grid::new([ax]).unwrap();
        let ops = [Sbp1d::new(2, ax, 0).unwrap()];
        let table = NormalTable::build(&grid, &ops);
        (grid, ops, table)
    }

    /// Per-edge inputs for one node, computed the same way the residual
    /// pipeline does.
    struct EdgeData {
        norm: Vec<f64>,
        jump: Vec<f64>,
        violation: Vec<f64>,
        fh_scale: Vec<f64>,
        vi_delta: Vec<f64>,
        vj_delta: Vec<f64>,
    }

    fn edge_data(gas: &Gas, table: &NormalTable<1>, u: &[State<1>], i: usize) -> EdgeData {
        let vi = gas.entropy(&u[i]);
        let mut d = EdgeData {
            norm: vec![],
            jump: vec![],
            violation: vec![],
            fh_scale: vec![],
            vi_delta: vec![],
            vj_delta: vec![],
        };
        for e in table.entries(i) {
            let j = e.neighbor;
            let vj = gas.entropy(&u[j]);
            let dv = vj.v - vi.v;
            let fh = gas.flux_central(&u[i], &u[j], &e.unit);
            let dpsi = (vj.psi[0] - vi.psi[0]) * e.unit[0];
            let du = u[j] - u[i];
            d.norm.push(e.norm);
            d.jump.push(dv.dot(&du));
            d.violation.push(dv.dot(&fh) - dpsi);
            d.fh_scale.push(fh.norm());
            d.vi_delta.push(vi.v.dot(&(u[i] - u[j])));
            d.vj_delta.push(vj.v.dot(&(u[i] - u[j])));
        }
        d
    }

    fn wave_states(gas: &Gas, grid: &Grid<1>, perturb: f64, seed: u64) -> Vec<State<1>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..grid.num_nodes())
            .map(|i| {
                let x = grid.coords(i)[0];
                let r = 1.0 + 0.4 * (std::f64::consts::PI * x).sin()
                    + perturb * rng.gen_range(-1.0..1.0);
                let v = 1.7 + perturb * rng.gen_range(-1.0..1.0);
                let p = 1.0 + perturb * rng.gen_range(-1.0..1.0);
                gas.from_primitive(r, [v], p)
            })
            .collect()
    }

    #[test]
    fn constant_field_assembles_to_zero() {
        let gas = Gas::default();
        let (grid, _, table) = setup(8);
        let u: Vec<State<1>> = (0..grid.num_nodes())
            .map(|_| gas.from_primitive(1.2, [0.3], 0.9))
            .collect();
        for i in 0..grid.num_nodes() {
            let d = edge_data(&gas, &table, &u, i);
            let mut a = vec![f64::NAN; d.norm.len()];
            let b = assemble_ecav(&d.norm, &d.jump, &d.violation, &d.fh_scale, &mut a);
            assert_eq!(b, 0.0);
            assert!(a.iter().all(|&x| x == 0.0));
        }
    }

    /// Direct transcription of the two summations, written independently of
    /// the production code: loop over all other nodes, recover the stencil
    /// normal from the operator's Q entries, and accumulate.
    #[test]
    fn ecav_assembly_matches_brute_force() {
        let gas = Gas::default();
        let (grid, ops, table) = setup(8);
        let u = wave_states(&gas, &grid, 0.05, 42);
        let n = grid.num_nodes();

        for i in 0..n {
            let d = edge_data(&gas, &table, &u, i);
            let mut a = vec![0.0; d.norm.len()];
            let b = assemble_ecav(&d.norm, &d.jump, &d.violation, &d.fh_scale, &mut a);

            // Brute force over all j != i.
            let vi = gas.entropy(&u[i]);
            let mut b_ref = 0.0;
            let mut a_ref = std::collections::HashMap::new();
            for j in 0..n {
                if j == i {
                    continue;
                }
                let s = ops[0].q_entry(i, j) - ops[0].q_entry(j, i);
                if s == 0.0 {
                    continue;
                }
                let norm = s.abs();
                let nhat = [s / norm];
                let vj = gas.entropy(&u[j]);
                let dv = vj.v - vi.v;
                let fh = (gas.flux(&u[i], 0) + gas.flux(&u[j], 0)) * (0.5 * nhat[0]);
                b_ref += norm * (dv.dot(&fh) - (vj.psi[0] - vi.psi[0]) * nhat[0]);
                a_ref.insert(j, norm * dv.dot(&(u[j] - u[i])));
            }
            let floor = violation_floor(
                d.norm.iter().zip(&d.fh_scale).map(|(n, f)| n * f).sum::<f64>(),
            );
            let b_ref = if b_ref <= floor { 0.0 } else { b_ref };

            assert_abs_diff_eq!(b, b_ref, epsilon = 1e-13);
            for (e, entry) in table.entries(i).iter().enumerate() {
                assert_abs_diff_eq!(a[e], a_ref[&entry.neighbor].max(0.0), epsilon = 1e-13);
            }
        }
    }

    /// On a resolved smooth wave the violation is truncation error and
    /// shrinks rapidly under grid refinement.
    #[test]
    fn violation_decays_with_resolution() {
        let gas = Gas::default();
        let mut maxima = Vec::new();
        for n in [32, 64, 128] {
            let (grid, _, table) = setup(n);
            let u = wave_states(&gas, &grid, 0.0, 0);
            let mut max_b: f64 = 0.0;
            for i in 0..grid.num_nodes() {
                let d = edge_data(&gas, &table, &u, i);
                let mut a = vec![0.0; d.norm.len()];
                max_b = max_b.max(assemble_ecav(&d.norm, &d.jump, &d.violation, &d.fh_scale, &mut a));
            }
            maxima.push(max_b);
        }
        assert!(maxima[0] > 1e-9, "coarse grid should violate: {maxima:?}");
        assert!(maxima[0] > 3.0 * maxima[1], "{maxima:?}");
        assert!(maxima[1] > 3.0 * maxima[2], "{maxima:?}");
    }

    /// With the local Lax-Friedrichs low-order flux, the knapsack
    /// coefficients are the AV coefficients scaled by half the pairwise
    /// wavespeed: f^H - f^L = (lambda/2)(u_j - u_i).
    #[test]
    fn kl_coefficients_are_half_wavespeed_times_av() {
        let gas = Gas::default();
        let (grid, _, table) = setup(8);
        let u = wave_states(&gas, &grid, 0.05, 7);

        for i in 0..grid.num_nodes() {
            let d = edge_data(&gas, &table, &u, i);
            let vi = gas.entropy(&u[i]);

            let mut jump_kl = Vec::new();
            let mut lambda = Vec::new();
            for e in table.entries(i) {
                let j = e.neighbor;
                let vj = gas.entropy(&u[j]);
                let dv = vj.v - vi.v;
                let fh = gas.flux_central(&u[i], &u[j], &e.unit);
                let fl = gas.flux_lxf(&u[i], &u[j], &e.unit);
                jump_kl.push(dv.dot(&(fh - fl)));
                lambda.push(gas.max_wavespeed(&u[i], &u[j], &e.unit));
            }

            let m = d.norm.len();
            let (mut a_av, mut a_kl, mut upper) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
            let no_floor = vec![0.0; m];
            assemble_ecav(&d.norm, &d.jump, &d.violation, &d.fh_scale, &mut a_av);
            assemble_kl(
                &d.norm, &jump_kl, &d.violation, &d.fh_scale, &no_floor, &mut a_kl, &mut upper,
            );
            for e in 0..m {
                assert_abs_diff_eq!(a_kl[e], 0.5 * lambda[e] * a_av[e], epsilon = 1e-13);
                assert_eq!(upper[e], 1.0);
            }
        }
    }

    #[test]
    fn kl_hand_values_with_positivity_credit() {
        let mut a = [0.0];
        let mut upper = [0.0];
        let b = assemble_kl(&[2.0], &[0.5], &[0.3], &[0.0], &[0.25], &mut a, &mut upper);
        assert_eq!(a, [1.0]);
        assert_eq!(upper, [0.75]);
        assert_abs_diff_eq!(b, 0.6 - 0.25, epsilon = 1e-15);
    }

    #[test]
    fn floor_suppresses_roundoff_violations() {
        // Large fluxes, violation at roundoff scale: floored away.
        let mut a = [0.0];
        let b = assemble_ecav(&[1.0], &[0.0], &[1e-15], &[1e3], &mut a);
        assert_eq!(b, 0.0);
        // Same violation against O(1) fluxes clears the floor.
        let b = assemble_ecav(&[1.0], &[0.0], &[1e-13], &[1.0], &mut a);
        assert_abs_diff_eq!(b, 1e-13, epsilon = 1e-20);
    }

    /// Relaxed columns against a direct transcription, and the consistency
    /// identity: with every column at a common value w, the relaxed
    /// left-hand side collapses to the unrelaxed one because
    /// v_i'(u_i - u_j) - v_j'(u_i - u_j) = (v_j - v_i)'(u_j - u_i).
    #[test]
    fn relaxed_assembly_matches_brute_force_and_collapses() {
        let gas = Gas::default();
        let (grid, _, table) = setup(8);
        let u = wave_states(&gas, &grid, 0.05, 11);

        for i in 0..grid.num_nodes() {
            let d = edge_data(&gas, &table, &u, i);
            let m = d.norm.len();
            let mut a_rel = vec![0.0; m + 1];
            let b_rel =
                assemble_relaxed(&d.norm, &d.vi_delta, &d.vj_delta, &d.violation, &d.fh_scale, &mut a_rel);

            // Direct transcription.
            let vi = gas.entropy(&u[i]);
            let mut tail = 0.0;
            for (e, entry) in table.entries(i).iter().enumerate() {
                let j = entry.neighbor;
                let vj = gas.entropy(&u[j]);
                let du = u[i] - u[j];
                assert_abs_diff_eq!(a_rel[e], entry.norm * vi.v.dot(&du), epsilon = 1e-13);
                tail += entry.norm * vj.v.dot(&du);
            }
            assert_abs_diff_eq!(a_rel[m], -tail, epsilon = 1e-13);

            // Collapse identity at w = 0.37, against the unrelaxed row.
            let mut a_av = vec![0.0; m];
            let b_av = assemble_ecav(&d.norm, &d.jump, &d.violation, &d.fh_scale, &mut a_av);
            let w = 0.37;
            let lhs_rel: f64 = a_rel.iter().map(|x| x * w).sum();
            let lhs_av: f64 = a_av.iter().map(|x| x * w).sum();
            let scale: f64 = a_av.iter().sum::<f64>() + 1.0;
            assert_abs_diff_eq!(lhs_rel, lhs_av, epsilon = 1e-12 * scale);
            assert_eq!(b_rel, b_av);
        }
    }
}
