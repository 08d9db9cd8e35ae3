//! Wall-clock comparison of a limited scheme against the unlimited
//! high-order baseline on the same grid. Informational only; no thresholds.

use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use esfd::solver::{step, Scheme, SolutionField, System};

use crate::config::{scheme_name, Setup};
use crate::problems::ProblemSpec;
use crate::runner::build_system;

#[derive(Clone, Debug, Serialize)]
pub struct TimingRow {
    pub scheme: String,
    pub n: usize,
    pub order: usize,
    pub steps: usize,
    pub seconds: f64,
    pub seconds_per_step: f64,
}

/// Times `steps` fixed steps of the setup's scheme and of the high-order
/// baseline on the same grid.
pub fn compare(setup: &Setup, steps: usize) -> Result<Vec<TimingRow>> {
    let mut baseline = setup.clone();
    baseline.scheme = Scheme::HighOrder;
    baseline.alpha = None;
    match setup.problem.dim() {
        1 => {
            let spec = setup.problem.spec_1d().expect("1D problem");
            Ok(vec![time_one(&spec, setup, steps)?, time_one(&spec, &baseline, steps)?])
        }
        2 => {
            let spec = setup.problem.spec_2d().expect("2D problem");
            Ok(vec![time_one(&spec, setup, steps)?, time_one(&spec, &baseline, steps)?])
        }
        d => unreachable!("no {d}-dimensional presets"),
    }
}

fn time_one<const D: usize>(
    spec: &ProblemSpec<D>,
    setup: &Setup,
    steps: usize,
) -> Result<TimingRow> {
    let system = build_system(spec, setup).map_err(anyhow::Error::from)?;
    let mut field = system.project(spec.ic);
    let dt = match setup.drive.dt_at(setup.n) {
        Some(dt) => dt,
        None => stable_dt(&system, &field),
    };
    let mut ws = system.workspace();
    let start = Instant::now();
    for _ in 0..steps {
        step(&system, &mut field, dt, setup.integrator, &mut ws)
            .with_context(|| format!("timing {}", scheme_name(setup.scheme)))?;
    }
    let seconds = start.elapsed().as_secs_f64();
    Ok(TimingRow {
        scheme: scheme_name(setup.scheme).to_string(),
        n: setup.n,
        order: setup.order,
        steps,
        seconds,
        seconds_per_step: seconds / steps.max(1) as f64,
    })
}

/// A conservative fixed step from the initial data: 0.3 h / max wavespeed.
fn stable_dt<const D: usize>(system: &System<D>, field: &SolutionField<D>) -> f64 {
    let gas = system.gas();
    let mut speed = 0.0f64;
    for u in &field.states {
        for k in 0..D {
            let mut unit = [0.0; D];
            unit[k] = 1.0;
            speed = speed.max(gas.max_wavespeed(u, u, &unit));
        }
    }
    let h = (0..D)
        .map(|k| system.grid().axes[k].spacing())
        .fold(f64::INFINITY, f64::min);
    0.3 * h / speed.max(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Problem;

    #[test]
    fn comparisons_time_both_schemes() {
        let mut setup = Setup::preset(Problem::DensityWave, Some(24));
        setup.scheme = Scheme::Kl;
        let rows = compare(&setup, 5).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].scheme, "kl");
        assert_eq!(rows[1].scheme, "high_order");
        for row in rows {
            assert_eq!(row.steps, 5);
            assert!(row.seconds >= 0.0 && row.seconds_per_step >= 0.0);
        }
    }
}
