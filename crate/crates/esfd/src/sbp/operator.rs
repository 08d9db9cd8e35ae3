//! One-dimensional summation-by-parts first-derivative operators.
//!
//! Internally we store the *mass-scaled* derivative matrix `Q = M * D`
//! (dimensionless, O(1) entries) together with the diagonal mass `M` and the
//! diagonal boundary matrix `B`. These satisfy the SBP algebra
//!
//! ```text
//!   Q + Q^T = B,    B = diag(-1, 0, ..., 0, +1)   (bounded)
//!   Q^T = -Q,       B = 0                          (periodic)
//! ```
//!
//! so the derivative itself is `D = M^{-1} Q`, while the flux-differencing
//! machinery reads its node-pair weights directly off `Q` (see
//! [`super::NormalTable`]). Supported interior orders are 2, 4 and 6; the
//! bounded closures are the classical diagonal-norm blocks with boundary
//! accuracy of half the interior order.

use crate::{Error, Result};

use super::grid::{Axis, Grid};

/// Central interior stencils for the scaled matrix `Q` (coefficients of the
/// positive offsets `+1..+hw`; negative offsets carry the opposite sign).
const CENTRAL_2: [f64; 1] = [1.0 / 2.0];
const CENTRAL_4: [f64; 2] = [2.0 / 3.0, -1.0 / 12.0];
const CENTRAL_6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

/// Boundary norm weights (multiples of dx) for the bounded closures.
const H_2: [f64; 1] = [1.0 / 2.0];
const H_4: [f64; 4] = [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0];
const H_6: [f64; 6] = [
    13649.0 / 43200.0,
    12013.0 / 8640.0,
    2711.0 / 4320.0,
    5359.0 / 4320.0,
    7877.0 / 8640.0,
    43801.0 / 43200.0,
];

/// Upper-left `Q` block of the order-4 bounded closure (4 rows x 6 cols).
const Q_BLOCK_4: [[f64; 6]; 4] = [
    [-1.0 / 2.0, 59.0 / 96.0, -1.0 / 12.0, -1.0 / 32.0, 0.0, 0.0],
    [-59.0 / 96.0, 0.0, 59.0 / 96.0, 0.0, 0.0, 0.0],
    [1.0 / 12.0, -59.0 / 96.0, 0.0, 59.0 / 96.0, -1.0 / 12.0, 0.0],
    [1.0 / 32.0, 0.0, -59.0 / 96.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
];

/// A one-dimensional SBP operator factor on a uniform axis.
#[derive(Clone, Debug)]
pub struct Sbp1d {
    pub order: usize,
    pub axis: Axis,
    /// Sparse rows of `Q`: `(column, value)`, diagonal omitted.
    rows: Vec<Vec<(usize, f64)>>,
    /// Diagonal mass `M_ii` (includes the grid spacing).
    mass: Vec<f64>,
    /// Diagonal of `B` (dimensionless: -1 / +1 at bounded ends, else 0).
    boundary: Vec<f64>,
}

impl Sbp1d {
    /// Build the operator for `axis`. `order` must be 2, 4 or 6.
    pub fn new(order: usize, axis: Axis, dim: usize) -> Result<Self> {
        axis.validate(dim)?;
        let central: &[f64] = match order {
            2 => &CENTRAL_2,
            4 => &CENTRAL_4,
            6 => &CENTRAL_6,
            _ => return Err(Error::UnsupportedOrder(order)),
        };
        let hw = central.len();
        let n = axis.n;
        let dx = axis.spacing();

        if axis.periodic {
            let min = 2 * hw + 1;
            if n < min {
                return Err(Error::GridTooSmall { dim, n, order, kind: "periodic", min });
            }
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let mut row = Vec::with_capacity(2 * hw);
                for o in (1..=hw).rev() {
                    row.push(((i + n - o) % n, -central[o - 1]));
                }
                for o in 1..=hw {
                    row.push(((i + o) % n, central[o - 1]));
                }
                rows.push(row);
            }
            return Ok(Sbp1d {
                order,
                axis,
                rows,
                mass: vec![dx; n],
                boundary: vec![0.0; n],
            });
        }

        // Bounded closure: boundary block rows + mirrored block at the right
        // end. The minimum size keeps the two blocks from interacting.
        let (block, h): (Vec<Vec<f64>>, &[f64]) = match order {
            2 => (vec![vec![-0.5, 0.5]], &H_2),
            4 => (Q_BLOCK_4.iter().map(|r| r.to_vec()).collect(), &H_4),
            6 => (order6_block(), &H_6),
            _ => unreachable!(),
        };
        let br = block.len();
        let bc = block[0].len();
        let min = (br + bc).max(2 * br).max(2 * hw + 1);
        if n < min {
            return Err(Error::GridTooSmall { dim, n, order, kind: "bounded", min });
        }

        let mut rows = vec![Vec::new(); n];
        for (i, brow) in block.iter().enumerate() {
            for (j, &q) in brow.iter().enumerate() {
                if q != 0.0 && j != i {
                    rows[i].push((j, q));
                }
            }
            // Mirrored block: Q_rev[i][j] = -Q[n-1-i][n-1-j].
            for (j, &q) in brow.iter().enumerate() {
                if q != 0.0 && j != i {
                    rows[n - 1 - i].push((n - 1 - j, -q));
                }
            }
        }
        for (i, row) in rows.iter_mut().enumerate().take(n - br).skip(br) {
            for o in (1..=hw).rev() {
                row.push((i - o, -central[o - 1]));
            }
            for o in 1..=hw {
                row.push((i + o, central[o - 1]));
            }
        }
        let (head, tail) = rows.split_at_mut(n - br);
        for row in head.iter_mut().take(br).chain(tail.iter_mut()) {
            row.sort_unstable_by_key(|&(j, _)| j);
        }

        let mut mass = vec![dx; n];
        for (i, &hi) in h.iter().enumerate() {
            mass[i] = hi * dx;
            mass[n - 1 - i] = hi * dx;
        }
        let mut boundary = vec![0.0; n];
        boundary[0] = -1.0;
        boundary[n - 1] = 1.0;

        Ok(Sbp1d { order, axis, rows, mass, boundary })
    }

    /// Number of nodes along the axis.
    pub fn len(&self) -> usize {
        self.axis.n
    }

    pub fn is_empty(&self) -> bool {
        self.axis.n == 0
    }

    /// Off-diagonal sparse row of the scaled matrix `Q`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Diagonal mass entry `M_ii` (includes dx).
    pub fn mass(&self, i: usize) -> f64 {
        self.mass[i]
    }

    /// Diagonal boundary entry `B_ii` (dimensionless).
    pub fn boundary(&self, i: usize) -> f64 {
        self.boundary[i]
    }

    /// Dense `Q + diag` entry lookup, including the diagonal part `B_ii / 2`.
    /// Intended for tests and table construction, not hot loops.
    pub fn q_entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.boundary[i] / 2.0;
        }
        self.rows[i]
            .iter()
            .find(|&&(c, _)| c == j)
            .map_or(0.0, |&(_, v)| v)
    }

    /// Apply the true derivative `M^{-1} Q` to a 1-D field.
    pub fn derivative_1d(&self, field: &[f64]) -> Result<Vec<f64>> {
        if field.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: field.len() });
        }
        let mut out = vec![0.0; field.len()];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = self.boundary[i] / 2.0 * field[i];
            for &(j, q) in &self.rows[i] {
                acc += q * field[j];
            }
            *o = acc / self.mass[i];
        }
        Ok(out)
    }
}

/// Apply the derivative along dimension `dim` of a flattened tensor-product
/// field: `out = (I x .. x D_dim x .. x I) field`.
pub fn apply_derivative<const D: usize>(
    grid: &Grid<D>,
    ops: &[Sbp1d; D],
    dim: usize,
    field: &[f64],
) -> Result<Vec<f64>> {
    let n = grid.num_nodes();
    if field.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: field.len() });
    }
    let op = &ops[dim];
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut idx = grid.multi(i);
        let a = idx[dim];
        let mut acc = op.boundary(a) / 2.0 * field[i];
        for &(j, q) in op.row(a) {
            idx[dim] = j;
            acc += q * field[grid.flat(idx)];
        }
        *o = acc / op.mass(a);
    }
    Ok(out)
}

/// Construct the order-6 boundary block (6 rows x 9 cols) numerically.
///
/// With the classical diagonal norm fixed, the block is determined (up to a
/// one-parameter family) by antisymmetry of its off-diagonal part, meshing
/// with the interior stencil, and exact differentiation of x^0..x^3 in the
/// boundary rows. We solve that linear system for the strictly upper
/// triangle of the 6x6 corner and pick the minimum-norm member of the
/// family.
fn order6_block() -> Vec<Vec<f64>> {
    // Unknowns: S_ij = Q_ij for 0 <= i < j <= 5, lexicographic.
    let mut cols = Vec::new();
    for i in 0..6usize {
        for j in (i + 1)..6 {
            cols.push((i, j));
        }
    }
    let idx = |i: usize, j: usize| cols.iter().position(|&p| p == (i, j)).unwrap();

    // Fixed entries: diagonal (B/2), and tail columns 6..8 determined by
    // antisymmetry against the interior rows.
    let central = &CENTRAL_6;
    let fixed = |i: usize, j: usize| -> f64 {
        if i == j {
            return if i == 0 { -0.5 } else { 0.0 };
        }
        if j >= 6 && j - i <= 3 {
            return central[j - i - 1];
        }
        0.0
    };

    // Exactness of D = H^{-1} Q on x^p, p = 0..3, for rows 0..5:
    //   sum_j Q_ij j^p = h_i * p * i^(p-1).
    let mut a = vec![vec![0.0f64; cols.len()]; 24];
    let mut rhs = vec![0.0f64; 24];
    for i in 0..6usize {
        for p in 0..4usize {
            let eq = i * 4 + p;
            let target = if p == 0 {
                0.0
            } else {
                H_6[i] * p as f64 * (i as f64).powi(p as i32 - 1)
            };
            rhs[eq] = target;
            for j in 0..9usize {
                let w = (j as f64).powi(p as i32);
                if j < 6 && j != i {
                    if i < j {
                        a[eq][idx(i, j)] += w;
                    } else {
                        a[eq][idx(j, i)] -= w;
                    }
                } else {
                    rhs[eq] -= fixed(i, j) * w;
                }
            }
        }
    }

    let mut s = solve_min_norm(&a, &rhs);

    // Iterative refinement: re-solving against the residual gains a few
    // digits, which matters because the derivative later divides these
    // entries by boundary masses as small as ~0.3.
    for _ in 0..2 {
        let residual: Vec<f64> = a
            .iter()
            .zip(&rhs)
            .map(|(row, &bi)| bi - row.iter().zip(&s).map(|(c, x)| c * x).sum::<f64>())
            .collect();
        let ds = solve_min_norm(&a, &residual);
        for (si, di) in s.iter_mut().zip(&ds) {
            *si += di;
        }
    }

    // Residual check: the system is known to be consistent; a failure here
    // means the hard-coded norm is wrong.
    for (eq, row) in a.iter().enumerate() {
        let r: f64 = row.iter().zip(&s).map(|(c, x)| c * x).sum::<f64>() - rhs[eq];
        assert!(r.abs() < 1e-12, "order-6 closure system inconsistent (eq {eq}: residual {r:e})");
    }

    let mut block = vec![vec![0.0f64; 9]; 6];
    for i in 0..6 {
        for j in 0..9 {
            block[i][j] = fixed(i, j);
        }
    }
    for (k, &(i, j)) in cols.iter().enumerate() {
        block[i][j] = s[k];
        block[j][i] = -s[k];
    }
    block
}

/// Minimum-norm solution of a consistent (possibly rank-deficient) dense
/// system, via row reduction with partial pivoting plus a least-squares
/// correction along the nullspace.
fn solve_min_norm(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let m = a.len();
    let n = a[0].len();
    let mut aug: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();

    let scale = aug
        .iter()
        .flat_map(|r| r.iter().take(n))
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let tol = 1e-11 * scale.max(1.0);

    let mut pivots: Vec<usize> = Vec::new(); // pivot column per reduced row
    let mut row = 0usize;
    for col in 0..n {
        let (best, best_val) = (row..m)
            .map(|r| (r, aug[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap_or((row, 0.0));
        if best_val <= tol {
            continue;
        }
        aug.swap(row, best);
        let p = aug[row][col];
        for v in aug[row].iter_mut() {
            *v /= p;
        }
        for r in 0..m {
            if r != row && aug[r][col] != 0.0 {
                let f = aug[r][col];
                for c in col..=n {
                    let sub = f * aug[row][c];
                    aug[r][c] -= sub;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    let rank = row;

    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();

    // Particular solution: free vars = 0.
    let mut x0 = vec![0.0f64; n];
    for (r, &pc) in pivots.iter().enumerate() {
        x0[pc] = aug[r][n];
    }

    if free.is_empty() {
        return x0;
    }

    // Nullspace basis: one vector per free column.
    let mut null: Vec<Vec<f64>> = Vec::with_capacity(free.len());
    for &fc in &free {
        let mut v = vec![0.0f64; n];
        v[fc] = 1.0;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -aug[r][fc];
        }
        null.push(v);
    }
    let _ = rank;

    // Minimize |x0 + N t|^2: solve (N^T N) t = -N^T x0.
    let k = null.len();
    let mut g = vec![vec![0.0f64; k + 1]; k];
    for (p, np) in null.iter().enumerate() {
        for (q, nq) in null.iter().enumerate() {
            g[p][q] = np.iter().zip(nq).map(|(x, y)| x * y).sum();
        }
        g[p][k] = -np.iter().zip(&x0).map(|(x, y)| x * y).sum::<f64>();
    }
    // Tiny Gaussian elimination.
    for c in 0..k {
        let piv = (c..k).max_by(|&r1, &r2| g[r1][c].abs().total_cmp(&g[r2][c].abs())).unwrap();
        g.swap(c, piv);
        let p = g[c][c];
        for v in g[c].iter_mut() {
            *v /= p;
        }
        for r in 0..k {
            if r != c {
                let f = g[r][c];
                for cc in c..=k {
                    let sub = f * g[c][cc];
                    g[r][cc] -= sub;
                }
            }
        }
    }
    for (p, np) in null.iter().enumerate() {
        let t = g[p][k];
        for (xi, ni) in x0.iter_mut().zip(np) {
            *xi += t * ni;
        }
    }
    x0
}
