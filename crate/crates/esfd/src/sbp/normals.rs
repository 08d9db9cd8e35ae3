//! Stencil "normal" tables: the node-pair form of an SBP discretization.
//!
//! For nodes `i != j` coupled by the operator along dimension `k`, the
//! stencil normal has the single nonzero component
//!
//! ```text
//!   n_ij,k = (Q_k - Q_k^T)_ij
//! ```
//!
//! (which reduces to `2 Q_k,ij` in the periodic/skew case), and boundary
//! nodes additionally carry `b_i,k = B_k,ii` scaled by the transverse mass.
//! These are outward-oriented, quadrature-scaled normals: in 2-D an x-pair
//! has `|n_ij| = 2 |Q_x| * dy`, and the per-node consistency identity
//! `sum_j n_ij,k + b_i,k = 0` holds exactly.
//!
//! Entries come in mirrored directed pairs with `n_ji = -n_ij` bitwise, so a
//! numerical flux evaluated once per unordered pair can be scattered to both
//! sides with an exact sign flip — the basis for machine-precision
//! conservation.

use super::grid::Grid;
use super::operator::Sbp1d;

/// One directed stencil edge `i -> j`.
#[derive(Clone, Debug)]
pub struct NormalEntry<const D: usize> {
    /// The neighbor node `j`.
    pub neighbor: usize,
    /// Scaled normal `n_ij` (exactly one nonzero component).
    pub normal: [f64; D],
    /// `|n_ij|`, identical bitwise for both directions of the pair.
    pub norm: f64,
    /// Unit normal `n_ij / |n_ij|` (+-1 in one slot).
    pub unit: [f64; D],
    /// Index into [`NormalTable::pairs`].
    pub pair: u32,
    /// True on the canonical direction (`i < j`) of the pair.
    pub forward: bool,
}

/// An unordered stencil pair with the flat indices of its two directed
/// entries.
#[derive(Clone, Copy, Debug)]
pub struct Pair {
    /// Lower node index.
    pub a: usize,
    /// Higher node index.
    pub b: usize,
    /// Entry index of the direction `a -> b`.
    pub e_ab: usize,
    /// Entry index of the direction `b -> a`.
    pub e_ba: usize,
}

/// Weak-boundary data for one node with `b_i != 0`.
#[derive(Clone, Debug)]
pub struct BoundaryEntry<const D: usize> {
    pub node: usize,
    /// Scaled outward boundary normal `b_i`.
    pub b: [f64; D],
    pub norm: f64,
    pub unit: [f64; D],
}

/// The complete node-pair table of a tensor-product SBP discretization.
#[derive(Clone, Debug)]
pub struct NormalTable<const D: usize> {
    offsets: Vec<usize>,
    entries: Vec<NormalEntry<D>>,
    pairs: Vec<Pair>,
    boundary: Vec<BoundaryEntry<D>>,
}

impl<const D: usize> NormalTable<D> {
    /// Build the table from per-dimension operator factors.
    pub fn build(grid: &Grid<D>, ops: &[Sbp1d; D]) -> Self {
        let n = grid.num_nodes();

        // First pass: directed entries per node, ordered by (dim, stored row
        // order). Row order is signed-offset order for periodic rows and
        // column order for bounded closure rows, so the layout is
        // translation-consistent on periodic grids.
        let mut offsets = Vec::with_capacity(n + 1);
        let mut entries: Vec<NormalEntry<D>> = Vec::new();
        offsets.push(0);
        for i in 0..n {
            let idx = grid.multi(i);
            for (k, op) in ops.iter().enumerate() {
                let a = idx[k];
                // Transverse mass: product of the other dimensions' weights.
                let mut tmass = 1.0;
                for (m, opm) in ops.iter().enumerate() {
                    if m != k {
                        tmass *= opm.mass(idx[m]);
                    }
                }
                for &(bcol, q) in op.row(a) {
                    let s = q - op.q_entry(bcol, a);
                    debug_assert!(
                        (q + op.q_entry(bcol, a)).abs() < 1e-13,
                        "off-diagonal Q not skew at ({a},{bcol})"
                    );
                    if s == 0.0 {
                        continue;
                    }
                    let mut jdx = idx;
                    jdx[k] = bcol;
                    let j = grid.flat(jdx);
                    let mut normal = [0.0; D];
                    normal[k] = s * tmass;
                    let norm = s.abs() * tmass;
                    let mut unit = [0.0; D];
                    unit[k] = normal[k] / norm;
                    entries.push(NormalEntry {
                        neighbor: j,
                        normal,
                        norm,
                        unit,
                        pair: u32::MAX,
                        forward: false,
                    });
                }
            }
            offsets.push(entries.len());
        }

        // Second pass: link mirrored directions into unordered pairs.
        let mut pairs = Vec::with_capacity(entries.len() / 2);
        for i in 0..n {
            for e in offsets[i]..offsets[i + 1] {
                let j = entries[e].neighbor;
                if j < i {
                    continue;
                }
                let rev = (offsets[j]..offsets[j + 1])
                    .find(|&r| entries[r].neighbor == i)
                    .expect("stencil table not symmetric");
                let p = pairs.len() as u32;
                pairs.push(Pair { a: i, b: j, e_ab: e, e_ba: rev });
                entries[e].pair = p;
                entries[e].forward = true;
                entries[rev].pair = p;
                entries[rev].forward = false;
            }
        }

        // Boundary normals.
        let mut boundary = Vec::new();
        for i in 0..n {
            let idx = grid.multi(i);
            let mut b = [0.0; D];
            let mut any = false;
            for (k, op) in ops.iter().enumerate() {
                let bd = op.boundary(idx[k]);
                if bd != 0.0 {
                    let mut tmass = 1.0;
                    for (m, opm) in ops.iter().enumerate() {
                        if m != k {
                            tmass *= opm.mass(idx[m]);
                        }
                    }
                    b[k] = bd * tmass;
                    any = true;
                }
            }
            if any {
                let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
                let mut unit = [0.0; D];
                for k in 0..D {
                    unit[k] = b[k] / norm;
                }
                boundary.push(BoundaryEntry { node: i, b, norm, unit });
            }
        }

        NormalTable { offsets, entries, pairs, boundary }
    }

    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_entries(&self) -> usize {
        self.entries.len()
    }

    /// Flat entry range of node `i`.
    pub fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Directed entries leaving node `i`.
    pub fn entries(&self, i: usize) -> &[NormalEntry<D>] {
        &self.entries[self.range(i)]
    }

    pub fn entry(&self, e: usize) -> &NormalEntry<D> {
        &self.entries[e]
    }

    pub fn all_entries(&self) -> &[NormalEntry<D>] {
        &self.entries
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn boundary(&self) -> &[BoundaryEntry<D>] {
        &self.boundary
    }

    /// CSR offsets (length `num_nodes + 1`).
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }
}

/// Per-node tensor-product mass `M_ii` (product of the 1-D weights).
pub fn node_mass<const D: usize>(grid: &Grid<D>, ops: &[Sbp1d; D]) -> Vec<f64> {
    (0..grid.num_nodes())
        .map(|i| {
            let idx = grid.multi(i);
            (0..D).map(|k| ops[k].mass(idx[k])).product()
        })
        .collect()
}
