//! Explicit Runge-Kutta steppers and fixed-step integration.
//!
//! Both steppers recompute the limiting coefficients at every stage.
//! Positivity enforcement is tied to SSPRK(4,3): each of its stages is a
//! forward-Euler update with `dt/2`, which is exactly the substep the
//! relative positivity bounds protect, and the third-stage convex
//! combination preserves admissibility. Classical RK4 has no such
//! structure, so configurations with positivity enforcement reject it.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    Diagnostics, KahanState, Scheme, SolutionField, StageContext, StageDiagnostics, System,
    Workspace,
};
use crate::euler::State;
use crate::{Error, Result};

/// Explicit stepper choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Integrator {
    /// Classical fourth-order Runge-Kutta.
    #[default]
    Rk4,
    /// Four-stage third-order strong-stability-preserving pair with an
    /// embedded second-order error estimate.
    Ssprk43,
}

/// Aggregated stage diagnostics for one step. Boundary quantities are
/// already weighted by the stepper's quadrature (`sum_s b_s w_s dt`), so
/// accumulating them across steps yields the time integral.
#[derive(Clone, Copy, Debug)]
pub struct StepDiagnostics<const D: usize> {
    pub max_entropy_residual: f64,
    pub max_entropy_residual_rel: f64,
    pub boundary_flux: State<D>,
    pub boundary_entropy: f64,
    pub fallbacks: usize,
}

impl<const D: usize> StepDiagnostics<D> {
    fn new() -> Self {
        StepDiagnostics {
            max_entropy_residual: f64::NEG_INFINITY,
            max_entropy_residual_rel: f64::NEG_INFINITY,
            boundary_flux: State::zero(),
            boundary_entropy: 0.0,
            fallbacks: 0,
        }
    }

    fn absorb(&mut self, sd: &StageDiagnostics<D>, weight: f64) {
        self.max_entropy_residual = self.max_entropy_residual.max(sd.max_entropy_residual);
        self.max_entropy_residual_rel =
            self.max_entropy_residual_rel.max(sd.max_entropy_residual_rel);
        self.boundary_flux += sd.boundary_flux * weight;
        self.boundary_entropy += sd.boundary_entropy * weight;
        self.fallbacks += sd.fallbacks;
    }
}

/// One line of the run log.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct StepRecord<const D: usize> {
    pub step: usize,
    /// Time after the step (the attempted target time for rejected steps).
    pub t: f64,
    pub dt: f64,
    pub accepted: bool,
    /// Weighted RMS of the embedded error estimate (adaptive runs only).
    pub error_norm: Option<f64>,
    /// Largest relative entropy-constraint residual over the step's stages.
    pub entropy_residual_rel: f64,
    pub diagnostics: Diagnostics<D>,
}

/// Step history of an integration run.
#[derive(Clone, Debug, Default, Serialize)]
pub struct RunLog<const D: usize> {
    pub records: Vec<StepRecord<D>>,
}

impl<const D: usize> RunLog<D> {
    pub fn last(&self) -> Option<&StepRecord<D>> {
        self.records.last()
    }

    /// Accepted steps only.
    pub fn accepted(&self) -> impl Iterator<Item = &StepRecord<D>> {
        self.records.iter().filter(|r| r.accepted)
    }
}

fn ensure_len<const D: usize>(v: &mut Vec<State<D>>, n: usize) {
    if v.len() != n {
        v.clear();
        v.resize(n, State::zero());
    }
}

fn validate_step<const D: usize>(
    system: &System<D>,
    dt: f64,
    integrator: Integrator,
) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidConfig(format!("step size must be positive, got {dt}")));
    }
    if system.config().positivity.is_some() && integrator != Integrator::Ssprk43 {
        return Err(Error::InvalidConfig(
            "positivity enforcement requires the ssprk43 integrator".into(),
        ));
    }
    Ok(())
}

/// `out_i = base_i - k_i dt / M_ii`, the forward-Euler building block.
fn stage_from<const D: usize>(
    out: &mut [State<D>],
    base: &[State<D>],
    k: &[State<D>],
    mass: &[f64],
    dt: f64,
) {
    out.par_iter_mut().enumerate().for_each(|(i, o)| {
        *o = base[i] - k[i] * (dt / mass[i]);
    });
}

fn step_rk4<const D: usize>(
    system: &System<D>,
    ws: &mut Workspace<D>,
    u: &mut Vec<State<D>>,
    t: f64,
    dt: f64,
    check: bool,
) -> Result<StepDiagnostics<D>> {
    let n = u.len();
    let mass = system.mass();
    let [mut k1, mut k2, mut k3, mut k4] = std::mem::take(&mut ws.k);
    let mut stage = std::mem::take(&mut ws.stage);
    let mut trial = std::mem::take(&mut ws.trial);
    for b in [&mut k1, &mut k2, &mut k3, &mut k4, &mut stage, &mut trial] {
        ensure_len(b, n);
    }
    let ctx = |time| StageContext { time, fe_dt: dt, check_admissibility: check };
    let mut diag = StepDiagnostics::new();
    let mut sd = StageDiagnostics::default();

    system.stage_rhs(u, ctx(t), ws, &mut k1, Some(&mut sd))?;
    diag.absorb(&sd, dt / 6.0);
    stage_from(&mut stage, u, &k1, mass, 0.5 * dt);

    system.stage_rhs(&stage, ctx(t + 0.5 * dt), ws, &mut k2, Some(&mut sd))?;
    diag.absorb(&sd, dt / 3.0);
    stage_from(&mut stage, u, &k2, mass, 0.5 * dt);

    system.stage_rhs(&stage, ctx(t + 0.5 * dt), ws, &mut k3, Some(&mut sd))?;
    diag.absorb(&sd, dt / 3.0);
    stage_from(&mut stage, u, &k3, mass, dt);

    system.stage_rhs(&stage, ctx(t + dt), ws, &mut k4, Some(&mut sd))?;
    diag.absorb(&sd, dt / 6.0);

    trial.par_iter_mut().enumerate().for_each(|(i, o)| {
        *o = u[i] - (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / (6.0 * mass[i]));
    });

    std::mem::swap(u, &mut trial);
    ws.k = [k1, k2, k3, k4];
    ws.stage = stage;
    ws.trial = trial;
    Ok(diag)
}

/// Shu-Osher form of SSPRK(4,3): three half-step forward-Euler stages, a
/// `2/3 : 1/3` convex rewind, and a final half-step stage. Writes the
/// embedded second-order error estimate `(k1 + k2 + k3 - 3 k4) dt / (12 M)`
/// into `err_out` when requested.
pub(super) fn step_ssprk43<const D: usize>(
    system: &System<D>,
    ws: &mut Workspace<D>,
    u: &mut Vec<State<D>>,
    t: f64,
    dt: f64,
    check: bool,
    err_out: Option<&mut Vec<State<D>>>,
) -> Result<StepDiagnostics<D>> {
    let n = u.len();
    let mass = system.mass();
    let h = 0.5 * dt;
    let [mut k1, mut k2, mut k3, mut k4] = std::mem::take(&mut ws.k);
    let mut stage = std::mem::take(&mut ws.stage);
    let mut trial = std::mem::take(&mut ws.trial);
    for b in [&mut k1, &mut k2, &mut k3, &mut k4, &mut stage, &mut trial] {
        ensure_len(b, n);
    }
    let ctx = |time| StageContext { time, fe_dt: h, check_admissibility: check };
    let mut diag = StepDiagnostics::new();
    let mut sd = StageDiagnostics::default();

    system.stage_rhs(u, ctx(t), ws, &mut k1, Some(&mut sd))?;
    diag.absorb(&sd, dt / 6.0);
    stage_from(&mut stage, u, &k1, mass, h);

    system.stage_rhs(&stage, ctx(t + h), ws, &mut k2, Some(&mut sd))?;
    diag.absorb(&sd, dt / 6.0);
    trial.par_iter_mut().enumerate().for_each(|(i, o)| {
        *o = stage[i] - k2[i] * (h / mass[i]);
    });

    system.stage_rhs(&trial, ctx(t + dt), ws, &mut k3, Some(&mut sd))?;
    diag.absorb(&sd, dt / 6.0);
    // v3 = 2/3 u + 1/3 (v2 + h f(v2)); the convex combination keeps the
    // stage admissible whenever its ingredients are.
    stage.par_iter_mut().enumerate().for_each(|(i, s)| {
        let v3tmp = trial[i] - k3[i] * (h / mass[i]);
        *s = u[i] * (2.0 / 3.0) + v3tmp * (1.0 / 3.0);
    });

    system.stage_rhs(&stage, ctx(t + h), ws, &mut k4, Some(&mut sd))?;
    diag.absorb(&sd, dt / 2.0);
    trial.par_iter_mut().enumerate().for_each(|(i, o)| {
        *o = stage[i] - k4[i] * (h / mass[i]);
    });

    if let Some(err) = err_out {
        ensure_len(err, n);
        err.par_iter_mut().enumerate().for_each(|(i, e)| {
            *e = (k1[i] + k2[i] + k3[i] - k4[i] * 3.0) * (dt / (12.0 * mass[i]));
        });
    }

    std::mem::swap(u, &mut trial);
    ws.k = [k1, k2, k3, k4];
    ws.stage = stage;
    ws.trial = trial;
    Ok(diag)
}

pub(super) fn finalize_admissibility<const D: usize>(
    system: &System<D>,
    field: &mut SolutionField<D>,
) -> Result<()> {
    match system.config().scheme {
        Scheme::HighOrder => {
            if field.admissible
                && system.check_admissible(&field.states, Some(field.time)).is_err()
            {
                field.admissible = false;
                log::warn!(
                    "high-order solution left the admissible set at t = {}",
                    field.time
                );
            }
            Ok(())
        }
        _ => system.check_admissible(&field.states, Some(field.time)),
    }
}

/// Advances the field by one step of size `dt`.
pub fn step<const D: usize>(
    system: &System<D>,
    field: &mut SolutionField<D>,
    dt: f64,
    integrator: Integrator,
    ws: &mut Workspace<D>,
) -> Result<StepDiagnostics<D>> {
    validate_step(system, dt, integrator)?;
    let check = system.config().scheme != Scheme::HighOrder;
    let t = field.time;
    let diag = match integrator {
        Integrator::Rk4 => step_rk4(system, ws, &mut field.states, t, dt, check)?,
        Integrator::Ssprk43 => {
            step_ssprk43(system, ws, &mut field.states, t, dt, check, None)?
        }
    };
    field.time = t + dt;
    finalize_admissibility(system, field)?;
    Ok(diag)
}

/// Integrates to `t_final` with fixed step `dt` (the final step is
/// shortened to land exactly on `t_final`).
pub fn integrate_fixed<const D: usize>(
    system: &System<D>,
    field: &mut SolutionField<D>,
    dt: f64,
    t_final: f64,
    integrator: Integrator,
) -> Result<RunLog<D>> {
    if t_final < field.time {
        return Err(Error::InvalidConfig(
            "final time precedes the field's current time".into(),
        ));
    }
    validate_step(system, dt, integrator)?;
    let mut ws = system.workspace();
    let mut log = RunLog::default();
    let mut boundary_integral = KahanState::default();
    let tiny = 1e-12 * t_final.abs().max(1.0);
    let mut index = 0usize;
    while field.time < t_final - tiny {
        let h = dt.min(t_final - field.time);
        let sd = step(system, field, h, integrator, &mut ws)?;
        if (field.time - t_final).abs() <= tiny {
            field.time = t_final;
        }
        boundary_integral.add(&sd.boundary_flux);
        index += 1;
        log.records.push(StepRecord {
            step: index,
            t: field.time,
            dt: h,
            accepted: true,
            error_norm: None,
            entropy_residual_rel: sd.max_entropy_residual_rel,
            diagnostics: system.diagnostics(
                &field.states,
                boundary_integral.total(),
                sd.max_entropy_residual,
            ),
        });
    }
    Ok(log)
}
