//! Embedded-pair adaptive time stepping.

use super::stepper::{finalize_admissibility, step_ssprk43, RunLog, StepRecord};
use super::{KahanState, Scheme, SolutionField, System};
use crate::euler::State;
use crate::{Error, Result};

/// Adaptive controller options.
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveOpts {
    /// Absolute tolerance per conservative component.
    pub abstol: f64,
    /// Relative tolerance per conservative component.
    pub reltol: f64,
    /// Starting step; a CFL-style estimate from the initial data when
    /// absent.
    pub initial_dt: Option<f64>,
    /// Budget on attempted steps (accepted plus rejected).
    pub max_steps: usize,
}

impl Default for AdaptiveOpts {
    fn default() -> Self {
        AdaptiveOpts { abstol: 1e-6, reltol: 1e-4, initial_dt: None, max_steps: 1_000_000 }
    }
}

/// Weighted RMS of the embedded error estimate: tolerance-scaled per node
/// and component, acceptance at `err <= 1`.
fn error_norm<const D: usize>(
    err: &[State<D>],
    before: &[State<D>],
    after: &[State<D>],
    abstol: f64,
    reltol: f64,
) -> f64 {
    let mut sum = 0.0;
    for i in 0..err.len() {
        for c in 0..D + 2 {
            let scale =
                abstol + reltol * before[i].component(c).abs().max(after[i].component(c).abs());
            let q = err[i].component(c) / scale;
            sum += q * q;
        }
    }
    (sum / (err.len() * (D + 2)) as f64).sqrt()
}

/// CFL-style initial step estimate from the acoustic wavespeed.
fn initial_dt_estimate<const D: usize>(system: &System<D>, u: &[State<D>]) -> f64 {
    let gas = system.gas();
    let mut speed = 0.0f64;
    for ui in u {
        if !gas.is_admissible(ui) {
            continue;
        }
        let c = gas.sound_speed(ui);
        let vel = ui.velocity();
        for v in vel {
            speed = speed.max(v.abs() + c);
        }
    }
    let h = (0..D)
        .map(|k| system.grid().axes[k].spacing())
        .fold(f64::INFINITY, f64::min);
    if speed > 0.0 && h.is_finite() {
        0.5 * h / speed
    } else {
        1e-3
    }
}

/// Integrates to `t_final` with the embedded SSPRK(4,3) pair and a
/// PI-free step controller `dt <- dt clamp(0.9 err^(-1/3), 0.2, 5)`.
/// Rejected steps are retried with the shrunken step; admissibility
/// failures inside a step (positivity finding the low-order update
/// inadmissible) reject with `dt <- dt/2`.
pub fn integrate_adaptive<const D: usize>(
    system: &System<D>,
    field: &mut SolutionField<D>,
    t_final: f64,
    opts: &AdaptiveOpts,
) -> Result<RunLog<D>> {
    if t_final < field.time {
        return Err(Error::InvalidConfig(
            "final time precedes the field's current time".into(),
        ));
    }
    if !(opts.abstol > 0.0) || !(opts.reltol >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "adaptive tolerances must be positive, got abstol {} reltol {}",
            opts.abstol, opts.reltol
        )));
    }
    let check = system.config().scheme != Scheme::HighOrder;
    let mut ws = system.workspace();
    let mut log = RunLog::default();
    let mut boundary_integral = KahanState::default();
    let mut prev: Vec<State<D>> = Vec::new();
    let mut err: Vec<State<D>> = Vec::new();

    let mut dt = opts
        .initial_dt
        .unwrap_or_else(|| initial_dt_estimate(system, &field.states))
        .min((t_final - field.time).max(f64::MIN_POSITIVE));
    let tiny = 1e-12 * t_final.abs().max(1.0);
    let mut attempts = 0usize;
    let mut index = 0usize;

    while field.time < t_final - tiny {
        attempts += 1;
        if attempts > opts.max_steps {
            return Err(Error::InvalidConfig(format!(
                "adaptive integration exceeded the {}-step budget at t = {}",
                opts.max_steps, field.time
            )));
        }
        if dt < 1e-14 * t_final.abs().max(1.0) {
            return Err(Error::DtUnderflow { t: field.time, dt });
        }
        let t = field.time;
        let h = dt.min(t_final - t);
        prev.clone_from(&field.states);

        let sd = match step_ssprk43(system, &mut ws, &mut field.states, t, h, check, Some(&mut err))
        {
            Ok(sd) => sd,
            Err(Error::TimestepTooLarge { .. }) => {
                // The stage states were never advanced; shrink and retry.
                dt = 0.5 * h;
                continue;
            }
            Err(e) => return Err(e),
        };
        let en = error_norm(&err, &prev, &field.states, opts.abstol, opts.reltol);
        let accepted = en <= 1.0;
        let factor = (0.9 * en.powf(-1.0 / 3.0)).clamp(0.2, 5.0);

        index += 1;
        if accepted {
            field.time = t + h;
            if (field.time - t_final).abs() <= tiny {
                field.time = t_final;
            }
            finalize_admissibility(system, field)?;
            boundary_integral.add(&sd.boundary_flux);
        } else {
            std::mem::swap(&mut field.states, &mut prev);
        }
        log.records.push(StepRecord {
            step: index,
            t: t + h,
            dt: h,
            accepted,
            error_norm: Some(en),
            entropy_residual_rel: sd.max_entropy_residual_rel,
            diagnostics: system.diagnostics(
                &field.states,
                boundary_integral.total(),
                sd.max_entropy_residual,
            ),
        });
        dt = h * factor;
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::Gas;
    use crate::sbp::{Axis, Grid};
    use crate::solver::{integrate_fixed, Boundary, Integrator, LowFlux, SchemeConfig};

    fn wave_setup(n: usize) -> (System<1>, SolutionField<1>) {
        let grid = Grid::new([Axis { n, lo: -1.0, hi: 1.0, periodic: true }]).unwrap();
        let config = SchemeConfig {
            scheme: Scheme::Ecav,
            low_flux: LowFlux::Lxf,
            order: 4,
            positivity: None,
            boundary: Boundary::Periodic,
        };
        let system = System::new(grid, Gas::new(1.4), config).unwrap();
        let gas = Gas::new(1.4);
        let field = system.project(|x| {
            gas.from_primitive(1.0 + 0.5 * (std::f64::consts::PI * x[0]).sin(), [1.7], 1.0)
        });
        (system, field)
    }

    #[test]
    fn comfortable_tolerances_accept_every_step() {
        let (system, mut field) = wave_setup(24);
        let opts = AdaptiveOpts { abstol: 1e-4, reltol: 1e-3, ..AdaptiveOpts::default() };
        let log = integrate_adaptive(&system, &mut field, 0.3, &opts).unwrap();
        assert!(!log.records.is_empty());
        assert!(log.records.iter().all(|r| r.accepted));
        assert_eq!(field.time, 0.3);
    }

    #[test]
    fn tighter_tolerances_track_the_reference_more_closely() {
        let distance_at = |abstol: f64, reltol: f64| {
            let (system, mut field) = wave_setup(20);
            let opts = AdaptiveOpts { abstol, reltol, ..AdaptiveOpts::default() };
            integrate_adaptive(&system, &mut field, 0.25, &opts).unwrap();
            let (system2, mut reference) = wave_setup(20);
            integrate_fixed(&system2, &mut reference, 2.5e-4, 0.25, Integrator::Ssprk43).unwrap();
            field
                .states
                .iter()
                .zip(&reference.states)
                .map(|(a, b)| (a.rho - b.rho).abs())
                .fold(0.0, f64::max)
        };
        let loose = distance_at(1e-3, 1e-2);
        let tight = distance_at(1e-8, 1e-8);
        assert!(
            tight < 0.2 * loose,
            "tight tolerance error {tight:e} vs loose {loose:e}"
        );
    }

    #[test]
    fn vanishing_error_grows_the_step_by_the_cap() {
        // A uniform state is stationary: the embedded estimate is pure
        // roundoff, so the controller should hit its 5x growth cap.
        let grid = Grid::new([Axis { n: 16, lo: 0.0, hi: 1.0, periodic: true }]).unwrap();
        let config = SchemeConfig {
            scheme: Scheme::Ecav,
            low_flux: LowFlux::Lxf,
            order: 2,
            positivity: None,
            boundary: Boundary::Periodic,
        };
        let system = System::new(grid, Gas::new(1.4), config).unwrap();
        let mut field = system.project(|_| Gas::new(1.4).from_primitive(1.0, [0.3], 2.0));
        let opts =
            AdaptiveOpts { abstol: 1e-8, reltol: 1e-8, initial_dt: Some(1e-6), ..Default::default() };
        let log = integrate_adaptive(&system, &mut field, 1e-3, &opts).unwrap();
        assert!(log.records.iter().all(|r| r.accepted));
        for pair in log.records.windows(2).take(3) {
            let ratio = pair[1].dt / pair[0].dt;
            assert!(ratio > 4.9, "growth ratio {ratio}");
        }
    }

    #[test]
    fn impossible_tolerances_underflow_the_step() {
        let (system, mut field) = wave_setup(16);
        let opts = AdaptiveOpts {
            abstol: 1e-300,
            reltol: 1e-300,
            initial_dt: Some(1e-4),
            ..Default::default()
        };
        let err = integrate_adaptive(&system, &mut field, 0.5, &opts).unwrap_err();
        assert!(matches!(err, Error::DtUnderflow { .. }), "got {err:?}");
    }
}
