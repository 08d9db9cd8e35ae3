//! Grid-refinement studies against analytic solutions.

use std::io::Write;

use anyhow::{Context, Result};
use serde::Serialize;

use esfd::euler::State;
use esfd::solver::{LowFlux, Scheme};

use crate::config::Setup;
use crate::problems::Problem;
use crate::runner::{execute, RunOutput};

/// One row of a refinement study.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvergenceRow {
    pub order: usize,
    pub n: usize,
    pub error: f64,
    /// log2 of the error ratio against the previous row; present only when
    /// the resolution exactly doubled.
    pub rate: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub problem: Problem,
    pub scheme: Scheme,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// The rows of one stencil order, in the order they were produced.
    pub fn for_order(&self, order: usize) -> Vec<ConvergenceRow> {
        self.rows.iter().copied().filter(|r| r.order == order).collect()
    }
}

/// Mass-weighted discrete L2 distance of the conservative state from the
/// analytic solution at the run's final time:
/// `sqrt(sum_i M_ii |u_i - u_exact(x_i, T)|^2)` over all components.
pub fn l2_error<const D: usize>(
    out: &RunOutput<D>,
    exact: fn([f64; D], f64) -> State<D>,
) -> f64 {
    let t = out.field.time;
    let mut acc = 0.0;
    for (i, u) in out.field.states.iter().enumerate() {
        let d = (*u - exact(out.system.grid().coords(i), t)).norm();
        acc += out.system.mass()[i] * d * d;
    }
    acc.sqrt()
}

/// Runs `problem` for every (order, n) combination and collects errors and
/// estimated convergence rates.
pub fn study(
    problem: Problem,
    scheme: Scheme,
    low_flux: Option<LowFlux>,
    orders: &[usize],
    grids: &[usize],
) -> Result<ConvergenceReport> {
    let spec = problem
        .spec_1d()
        .with_context(|| format!("{} is not a 1D problem", problem.name()))?;
    let exact = spec
        .exact
        .with_context(|| format!("{} has no analytic solution", problem.name()))?;

    let mut rows = Vec::with_capacity(orders.len() * grids.len());
    for &order in orders {
        let mut prev: Option<(usize, f64)> = None;
        for &n in grids {
            let mut setup = Setup::preset(problem, Some(n));
            setup.scheme = scheme;
            setup.order = order;
            setup.alpha = None;
            if let Some(flux) = low_flux {
                setup.low_flux = flux;
            }
            let out = execute(&spec, &setup)
                .with_context(|| format!("order {order}, n = {n}"))?;
            let error = l2_error(&out, exact);
            let rate = prev
                .filter(|&(pn, _)| n == 2 * pn)
                .map(|(_, pe)| (pe / error).log2());
            rows.push(ConvergenceRow { order, n, error, rate });
            prev = Some((n, error));
        }
    }
    Ok(ConvergenceReport { problem, scheme, rows })
}

/// Writes the report as CSV with columns `N,n,error,rate` (rate blank on
/// the first row of each order).
pub fn write_csv<W: Write>(report: &ConvergenceReport, mut w: W) -> std::io::Result<()> {
    writeln!(w, "N,n,error,rate")?;
    for row in &report.rows {
        match row.rate {
            Some(rate) => writeln!(w, "{},{},{:e},{:.2}", row.order, row.n, row.error, rate)?,
            None => writeln!(w, "{},{},{:e},", row.order, row.n, row.error)?,
        }
    }
    Ok(())
}
