//! Executes resolved runs and writes their artifacts (snapshot CSV,
//! JSON-lines run log, summary JSON).

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use esfd::euler::Gas;
use esfd::sbp::Grid;
use esfd::solver::{
    integrate_adaptive, integrate_fixed, write_snapshot, AdaptiveOpts, Boundary, Positivity,
    RunLog, SchemeConfig, SolutionField, System,
};

use crate::config::{scheme_name, Setup};
use crate::problems::{BoundaryKind, Drive, ProblemSpec, GAMMA};

/// The in-memory results of a finished run.
pub struct RunOutput<const D: usize> {
    pub system: System<D>,
    pub field: SolutionField<D>,
    pub log: RunLog<D>,
    pub wall_seconds: f64,
}

/// Builds the system for `spec` at the setup's resolution and scheme.
pub fn build_system<const D: usize>(
    spec: &ProblemSpec<D>,
    setup: &Setup,
) -> esfd::Result<System<D>> {
    let grid = Grid::new(spec.axes(setup.n))?;
    let gas = Gas::new(GAMMA);
    let config = SchemeConfig {
        scheme: setup.scheme,
        low_flux: setup.low_flux,
        order: setup.order,
        positivity: setup.alpha.map(|alpha| Positivity { alpha }),
        boundary: match spec.info.boundary {
            BoundaryKind::Periodic => Boundary::Periodic,
            _ => Boundary::Reflective,
        },
    };
    match spec.info.boundary {
        BoundaryKind::Dirichlet => System::new_with_dirichlet(grid, gas, config, spec.ic),
        _ => System::new(grid, gas, config),
    }
}

/// Integrates the problem to its final time and returns the trajectory
/// log alongside the final state.
pub fn execute<const D: usize>(
    spec: &ProblemSpec<D>,
    setup: &Setup,
) -> esfd::Result<RunOutput<D>> {
    let system = build_system(spec, setup)?;
    let mut field = system.project(spec.ic);
    let start = Instant::now();
    let log = match setup.drive {
        Drive::FixedDt(_) | Drive::FixedDtPerNode(_) => {
            let dt = setup.drive.dt_at(setup.n).expect("fixed drive has a dt");
            integrate_fixed(&system, &mut field, dt, setup.t_final, setup.integrator)?
        }
        Drive::Adaptive { abstol, reltol } => {
            let opts = AdaptiveOpts { abstol, reltol, ..AdaptiveOpts::default() };
            integrate_adaptive(&system, &mut field, setup.t_final, &opts)?
        }
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    Ok(RunOutput { system, field, log, wall_seconds })
}

/// Runs a 1D setup.
pub fn run_1d(setup: &Setup) -> Result<RunOutput<1>> {
    let spec = setup
        .problem
        .spec_1d()
        .with_context(|| format!("{} is not a 1D problem", setup.problem.name()))?;
    execute(&spec, setup).map_err(Into::into)
}

/// Runs a 2D setup.
pub fn run_2d(setup: &Setup) -> Result<RunOutput<2>> {
    let spec = setup
        .problem
        .spec_2d()
        .with_context(|| format!("{} is not a 2D problem", setup.problem.name()))?;
    execute(&spec, setup).map_err(Into::into)
}

/// Summary statistics of a finished run, written as `summary.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub scheme: String,
    pub order: usize,
    pub n: usize,
    pub nodes: usize,
    pub t_final: f64,
    pub steps: usize,
    pub accepted: usize,
    pub admissible: bool,
    pub min_density: f64,
    pub min_pressure: f64,
    pub total_conserved: Vec<f64>,
    pub total_entropy: f64,
    pub max_entropy_residual_rel: f64,
    pub wall_seconds: f64,
}

pub fn summarize<const D: usize>(setup: &Setup, out: &RunOutput<D>) -> RunSummary {
    let gas = out.system.gas();
    let mut min_density = f64::INFINITY;
    let mut min_pressure = f64::INFINITY;
    for u in &out.field.states {
        let (rho, _, p) = gas.primitive(u);
        min_density = min_density.min(rho);
        min_pressure = min_pressure.min(p);
    }
    let (total, entropy) = out.system.totals(&out.field.states);
    let max_entropy_residual_rel = out
        .log
        .records
        .iter()
        .map(|r| r.entropy_residual_rel)
        .fold(f64::NEG_INFINITY, f64::max);
    RunSummary {
        problem: setup.problem.name().to_string(),
        scheme: scheme_name(setup.scheme).to_string(),
        order: setup.order,
        n: setup.n,
        nodes: out.system.num_nodes(),
        t_final: out.field.time,
        steps: out.log.records.len(),
        accepted: out.log.accepted().count(),
        admissible: out.field.admissible,
        min_density,
        min_pressure,
        total_conserved: (0..D + 2).map(|c| total.component(c)).collect(),
        total_entropy: entropy,
        max_entropy_residual_rel,
        wall_seconds: out.wall_seconds,
    }
}

/// Writes `snapshot.csv`, `run_log.jsonl`, and `summary.json` into `dir`.
pub fn write_artifacts<const D: usize>(
    setup: &Setup,
    out: &RunOutput<D>,
    dir: &Path,
) -> Result<RunSummary> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let snapshot = dir.join("snapshot.csv");
    let mut w = BufWriter::new(File::create(&snapshot)?);
    write_snapshot(&out.system, &out.field.states, &mut w)?;
    w.flush()?;

    let log_path = dir.join("run_log.jsonl");
    let mut w = BufWriter::new(File::create(&log_path)?);
    for record in &out.log.records {
        serde_json::to_writer(&mut w, record)?;
        writeln!(w)?;
    }
    w.flush()?;

    let summary = summarize(setup, out);
    let mut w = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut w, &summary)?;
    writeln!(w)?;
    w.flush()?;
    Ok(summary)
}

/// Runs a setup of either dimension, writing artifacts when `dir` is given.
pub fn run_to_dir(setup: &Setup, dir: Option<&Path>) -> Result<RunSummary> {
    match setup.problem.dim() {
        1 => {
            let out = run_1d(setup)?;
            finish(setup, &out, dir)
        }
        2 => {
            let out = run_2d(setup)?;
            finish(setup, &out, dir)
        }
        d => unreachable!("no {d}-dimensional presets"),
    }
}

fn finish<const D: usize>(
    setup: &Setup,
    out: &RunOutput<D>,
    dir: Option<&Path>,
) -> Result<RunSummary> {
    match dir {
        Some(dir) => write_artifacts(setup, out, dir),
        None => Ok(summarize(setup, out)),
    }
}

/// Process exit code for a failed run: 3 for inadmissible states, 4 for
/// timestep failures, 1 otherwise.
pub fn failure_exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<esfd::Error>() {
        Some(esfd::Error::InadmissibleState { .. }) => 3,
        Some(esfd::Error::TimestepTooLarge { .. } | esfd::Error::DtUnderflow { .. }) => 4,
        _ => 1,
    }
}
