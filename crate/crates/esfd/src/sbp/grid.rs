//! Uniform grids in one or two dimensions.

use crate::{Error, Result};

/// One axis of a tensor-product grid.
///
/// A periodic axis places `n` nodes at `lo + i*dx` with `dx = (hi-lo)/n`;
/// the node at `hi` is identified with the one at `lo` and not stored.
/// A bounded axis includes both endpoints, so `dx = (hi-lo)/(n-1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn periodic(n: usize, lo: f64, hi: f64) -> Self {
        Axis { n, lo, hi, periodic: true }
    }

    pub fn bounded(n: usize, lo: f64, hi: f64) -> Self {
        Axis { n, lo, hi, periodic: false }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.hi <= self.lo || self.n < 2 {
            return Err(Error::InvalidAxis { dim, lo: self.lo, hi: self.hi });
        }
        Ok(())
    }

    /// Node spacing.
    pub fn spacing(&self) -> f64 {
        if self.periodic {
            (self.hi - self.lo) / self.n as f64
        } else {
            (self.hi - self.lo) / (self.n - 1) as f64
        }
    }

    /// Coordinate of node `i`.
    pub fn coord(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }
}

/// A uniform tensor-product grid in `D` dimensions (`D` = 1 or 2).
///
/// Nodes are flattened with the first axis fastest: in 2-D, node
/// `(ix, iy)` has flat index `ix + nx * iy`.
#[derive(Clone, Debug)]
pub struct Grid<const D: usize> {
    pub axes: [Axis; D],
}

impl<const D: usize> Grid<D> {
    pub fn new(axes: [Axis; D]) -> Result<Self> {
        for (dim, ax) in axes.iter().enumerate() {
            ax.validate(dim)?;
        }
        Ok(Grid { axes })
    }

    /// Total number of nodes.
    pub fn num_nodes(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    /// Flat index of a multi-index.
    pub fn flat(&self, idx: [usize; D]) -> usize {
        let mut out = 0;
        let mut stride = 1;
        for k in 0..D {
            out += idx[k] * stride;
            stride *= self.axes[k].n;
        }
        out
    }

    /// Multi-index of a flat index.
    pub fn multi(&self, mut i: usize) -> [usize; D] {
        let mut idx = [0usize; D];
        for k in 0..D {
            idx[k] = i % self.axes[k].n;
            i /= self.axes[k].n;
        }
        idx
    }

    /// Physical coordinates of a node.
    pub fn coords(&self, i: usize) -> [f64; D] {
        let idx = self.multi(i);
        let mut x = [0.0; D];
        for k in 0..D {
            x[k] = self.axes[k].coord(idx[k]);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_axis_excludes_right_endpoint() {
        let ax = Axis::periodic(4, -1.0, 1.0);
        assert_eq!(ax.spacing(), 0.5);
        assert_eq!(ax.coord(0), -1.0);
        assert_eq!(ax.coord(3), 0.5);
    }

    #[test]
    fn bounded_axis_includes_both_endpoints() {
        let ax = Axis::bounded(5, 0.0, 1.0);
        assert_eq!(ax.spacing(), 0.25);
        assert_eq!(ax.coord(4), 1.0);
    }

    #[test]
    fn flat_and_multi_roundtrip_2d() {
        let g = Grid::new([Axis::periodic(3, 0.0, 1.0), Axis::periodic(5, 0.0, 1.0)]).unwrap();
        assert_eq!(g.num_nodes(), 15);
        for i in 0..15 {
            assert_eq!(g.flat(g.multi(i)), i);
        }
        assert_eq!(g.flat([2, 4]), 2 + 3 * 4);
    }

    #[test]
    fn degenerate_axis_rejected() {
        assert!(Grid::new([Axis::periodic(4, 1.0, 1.0)]).is_err());
        assert!(Grid::new([Axis::bounded(1, 0.0, 1.0)]).is_err());
        assert!(Grid::new([Axis::bounded(4, 0.0, f64::NAN)]).is_err());
    }
}
