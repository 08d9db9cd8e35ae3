//! Entropy-inequality limiting: per-node constraint assembly, quadratic
//! knapsack solvers, positivity limiting coefficients, and the pairwise
//! symmetrization that keeps the blended scheme conservative.
//!
//! Each node `i` contributes one linear inequality `a_i' theta_i >= b_i`
//! over the diffusion coefficients of its stencil edges, where `b_i` is the
//! entropy violation of the high-order flux and `a_i` the available
//! dissipation per edge. The minimal-norm solution of that inequality (a
//! quadratic continuous knapsack problem) yields pre-symmetrized
//! coefficients; taking the pairwise maximum afterwards preserves the
//! inequality and restores conservation.
//!
//! Assembly and solves are independent per node and safe to run in parallel
//! against an immutable snapshot; symmetrization is a subsequent pairwise
//! merge over the coefficient table.

mod assemble;
mod knapsack;
mod positivity;

pub use assemble::{assemble_ecav, assemble_kl, assemble_relaxed, violation_floor};
pub use knapsack::{solve_bounded, solve_relaxed, solve_unbounded, Feasibility};
pub use positivity::{limiting_coefficients, max_admissible_dt};

use crate::sbp::NormalTable;

/// Replaces each pair's two per-entry values with their maximum, making the
/// table exactly symmetric (`v_ij = v_ji` bitwise). Used for both diffusion
/// and limiting coefficients.
pub fn symmetrize_max<const D: usize>(table: &NormalTable<D>, values: &mut [f64]) {
    assert_eq!(values.len(), table.num_entries());
    for pair in table.pairs() {
        let m = values[pair.e_ab].max(values[pair.e_ba]);
        values[pair.e_ab] = m;
        values[pair.e_ba] = m;
    }
}

/// Expands per-node values to per-entry values via the pairwise maximum:
/// `entry_ij = max(node_i, node_j)`. The result is symmetric by
/// construction.
pub fn expand_node_max<const D: usize>(
    table: &NormalTable<D>,
    node: &[f64],
    entries: &mut [f64],
) {
    assert_eq!(node.len(), table.num_nodes());
    assert_eq!(entries.len(), table.num_entries());
    for i in 0..table.num_nodes() {
        let range = table.range(i);
        for (e, entry) in range.clone().zip(table.entries(i)) {
            entries[e] = node[i].max(node[entry.neighbor]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbp::{Axis, Grid, NormalTable, Sbp1d};

    fn table_1d(n: usize) -> NormalTable<1> {
        let axis = Axis::periodic(n, 0.0, 1.0);
        let grid = Grid::new([axis]).unwrap();
        let ops = [Sbp1d::new(2, axis, 0).unwrap()];
        NormalTable::build(&grid, &ops)
    }

    #[test]
    fn symmetrize_takes_pairwise_maxima() {
        let table = table_1d(6);
        let mut vals: Vec<f64> = (0..table.num_entries()).map(|e| e as f64).collect();
        symmetrize_max(&table, &mut vals);
        for pair in table.pairs() {
            assert_eq!(vals[pair.e_ab], vals[pair.e_ba]);
            assert_eq!(vals[pair.e_ab], (pair.e_ab as f64).max(pair.e_ba as f64));
        }
    }

    #[test]
    fn expand_node_max_is_symmetric() {
        let table = table_1d(6);
        let node: Vec<f64> = vec![0.0, 0.9, 0.1, 0.5, 0.2, 0.7];
        let mut entries = vec![0.0; table.num_entries()];
        expand_node_max(&table, &node, &mut entries);
        for pair in table.pairs() {
            assert_eq!(entries[pair.e_ab], entries[pair.e_ba]);
            assert_eq!(entries[pair.e_ab], node[pair.a].max(node[pair.b]));
        }
    }
}
