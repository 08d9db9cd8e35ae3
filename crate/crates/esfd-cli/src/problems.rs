//! Benchmark problem presets: initial conditions, domains, final times,
//! boundary treatments, and default scheme pairings.

use std::f64::consts::PI;

use esfd::euler::{Gas, State};
use esfd::sbp::Axis;
use esfd::solver::{Integrator, LowFlux, Scheme};

/// Ratio of specific heats shared by all presets.
pub const GAMMA: f64 = 1.4;

/// Default timestep policy of a preset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Drive {
    /// Fixed step, independent of resolution.
    FixedDt(f64),
    /// Fixed step scaled with resolution: `dt = c / n`.
    FixedDtPerNode(f64),
    /// Embedded-error adaptive stepping with these tolerances.
    Adaptive { abstol: f64, reltol: f64 },
}

impl Drive {
    /// The fixed step at resolution `n`, if this policy is fixed-step.
    pub fn dt_at(&self, n: usize) -> Option<f64> {
        match *self {
            Drive::FixedDt(dt) => Some(dt),
            Drive::FixedDtPerNode(c) => Some(c / n as f64),
            Drive::Adaptive { .. } => None,
        }
    }
}

/// Boundary treatment of a preset. Dirichlet exterior states are sampled
/// from the initial condition, holding the solution constant at the
/// boundaries over time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    Dirichlet,
    Reflective,
}

/// The available benchmark problems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Problem {
    /// Smooth density advection at constant velocity and pressure; has an
    /// analytic solution, so it anchors the convergence studies.
    DensityWave,
    /// The standard shock tube: right-moving shock and contact, left
    /// rarefaction.
    Sod,
    /// A Mach-3 shock running into a sinusoidal density field.
    ShuOsher,
    /// A near-vacuum shock tube with pressure ratio 1e9 and density ratio
    /// 2000; exercises positivity enforcement.
    Leblanc,
    /// Two blast waves colliding between reflective walls.
    WoodwardColella,
    /// Kelvin-Helmholtz instability of a periodic shear layer.
    Khi2d,
}

/// Preset metadata that does not depend on the spatial dimension.
#[derive(Clone, Copy, Debug)]
pub struct PresetInfo {
    pub problem: Problem,
    pub t_final: f64,
    pub boundary: BoundaryKind,
    pub drive: Drive,
    pub integrator: Integrator,
    /// Default scheme pairing for this problem.
    pub scheme: Scheme,
    pub low_flux: LowFlux,
    pub order: usize,
    /// Relative-positivity strength, when the preset enforces positivity.
    pub alpha: Option<f64>,
    /// Nodes per axis used when no resolution is requested.
    pub default_n: usize,
}

/// A fully described benchmark setup at an as-yet-unchosen resolution.
#[derive(Clone, Copy, Debug)]
pub struct ProblemSpec<const D: usize> {
    pub info: PresetInfo,
    /// Domain extents per axis.
    pub domain: [(f64, f64); D],
    pub ic: fn([f64; D]) -> State<D>,
    /// Analytic solution, when one exists.
    pub exact: Option<fn([f64; D], f64) -> State<D>>,
}

impl<const D: usize> ProblemSpec<D> {
    /// Grid axes at `n` nodes per dimension.
    pub fn axes(&self, n: usize) -> [Axis; D] {
        let periodic = self.info.boundary == BoundaryKind::Periodic;
        std::array::from_fn(|k| Axis {
            n,
            lo: self.domain[k].0,
            hi: self.domain[k].1,
            periodic,
        })
    }
}

impl Problem {
    pub const ALL: [Problem; 6] = [
        Problem::DensityWave,
        Problem::Sod,
        Problem::ShuOsher,
        Problem::Leblanc,
        Problem::WoodwardColella,
        Problem::Khi2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::DensityWave => "density_wave",
            Problem::Sod => "sod",
            Problem::ShuOsher => "shu_osher",
            Problem::Leblanc => "leblanc",
            Problem::WoodwardColella => "woodward_colella",
            Problem::Khi2d => "khi2d",
        }
    }

    pub fn from_name(name: &str) -> Option<Problem> {
        Problem::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Spatial dimension of the preset.
    pub fn dim(self) -> usize {
        match self {
            Problem::Khi2d => 2,
            _ => 1,
        }
    }

    pub fn info(self) -> PresetInfo {
        match self {
            Problem::DensityWave => PresetInfo {
                problem: self,
                t_final: 1.0,
                boundary: BoundaryKind::Periodic,
                drive: Drive::FixedDt(1e-4),
                integrator: Integrator::Rk4,
                scheme: Scheme::Ecav,
                low_flux: LowFlux::Lxf,
                order: 4,
                alpha: None,
                default_n: 64,
            },
            Problem::Sod => PresetInfo {
                problem: self,
                t_final: 0.2,
                boundary: BoundaryKind::Dirichlet,
                drive: Drive::Adaptive { abstol: 1e-6, reltol: 1e-4 },
                integrator: Integrator::Ssprk43,
                scheme: Scheme::Ecav,
                low_flux: LowFlux::Hllc,
                order: 4,
                alpha: None,
                default_n: 200,
            },
            Problem::ShuOsher => PresetInfo {
                problem: self,
                t_final: 1.8,
                boundary: BoundaryKind::Dirichlet,
                drive: Drive::Adaptive { abstol: 1e-6, reltol: 1e-4 },
                integrator: Integrator::Ssprk43,
                scheme: Scheme::Ecav,
                low_flux: LowFlux::Hllc,
                order: 4,
                alpha: None,
                default_n: 500,
            },
            // The fixed-step anchors scale with resolution: 6e-8 at
            // n = 4000 for Leblanc, 2e-5 at n = 1200 for Woodward-Colella.
            Problem::Leblanc => PresetInfo {
                problem: self,
                t_final: 1e-4,
                boundary: BoundaryKind::Dirichlet,
                drive: Drive::FixedDtPerNode(6e-8 * 4000.0),
                integrator: Integrator::Ssprk43,
                scheme: Scheme::Kl,
                low_flux: LowFlux::Hllc,
                order: 4,
                alpha: Some(0.5),
                default_n: 400,
            },
            Problem::WoodwardColella => PresetInfo {
                problem: self,
                t_final: 0.038,
                boundary: BoundaryKind::Reflective,
                drive: Drive::FixedDtPerNode(2e-5 * 1200.0),
                integrator: Integrator::Ssprk43,
                scheme: Scheme::Kl,
                low_flux: LowFlux::Hllc,
                order: 4,
                alpha: Some(0.1),
                default_n: 300,
            },
            Problem::Khi2d => PresetInfo {
                problem: self,
                t_final: 5.0,
                boundary: BoundaryKind::Periodic,
                drive: Drive::Adaptive { abstol: 1e-6, reltol: 1e-4 },
                integrator: Integrator::Ssprk43,
                scheme: Scheme::Ecav,
                low_flux: LowFlux::Hllc,
                order: 4,
                alpha: None,
                default_n: 64,
            },
        }
    }

    /// The 1D preset, if this is a 1D problem.
    pub fn spec_1d(self) -> Option<ProblemSpec<1>> {
        let info = self.info();
        let spec = match self {
            Problem::DensityWave => ProblemSpec {
                info,
                domain: [(-1.0, 1.0)],
                ic: density_wave_ic,
                exact: Some(density_wave_exact),
            },
            Problem::Sod => ProblemSpec {
                info,
                domain: [(0.0, 1.0)],
                ic: sod_ic,
                exact: None,
            },
            Problem::ShuOsher => ProblemSpec {
                info,
                domain: [(-5.0, 5.0)],
                ic: shu_osher_ic,
                exact: None,
            },
            Problem::Leblanc => ProblemSpec {
                info,
                domain: [(-10.0, 10.0)],
                ic: leblanc_ic,
                exact: None,
            },
            Problem::WoodwardColella => ProblemSpec {
                info,
                domain: [(0.0, 1.0)],
                ic: woodward_colella_ic,
                exact: None,
            },
            Problem::Khi2d => return None,
        };
        Some(spec)
    }

    /// The 2D preset, if this is a 2D problem.
    pub fn spec_2d(self) -> Option<ProblemSpec<2>> {
        match self {
            Problem::Khi2d => Some(ProblemSpec {
                info: self.info(),
                domain: [(-1.0, 1.0), (-1.0, 1.0)],
                ic: khi_ic,
                exact: None,
            }),
            _ => None,
        }
    }
}

fn gas() -> Gas {
    Gas::new(GAMMA)
}

fn density_wave_ic(x: [f64; 1]) -> State<1> {
    gas().from_primitive(1.0 + 0.5 * (PI * x[0]).sin(), [1.7], 1.0)
}

/// The density wave advects passively: velocity and pressure stay
/// constant and the density profile is transported at speed 1.7.
fn density_wave_exact(x: [f64; 1], t: f64) -> State<1> {
    density_wave_ic([x[0] - 1.7 * t])
}

fn sod_ic(x: [f64; 1]) -> State<1> {
    if x[0] < 0.5 {
        gas().from_primitive(1.0, [0.0], 1.0)
    } else {
        gas().from_primitive(0.125, [0.0], 0.1)
    }
}

fn shu_osher_ic(x: [f64; 1]) -> State<1> {
    if x[0] < -4.0 {
        gas().from_primitive(3.857143, [2.629369], 10.3333)
    } else {
        gas().from_primitive(1.0 + 0.2 * (5.0 * x[0]).sin(), [0.0], 1.0)
    }
}

fn leblanc_ic(x: [f64; 1]) -> State<1> {
    if x[0] < 0.0 {
        gas().from_primitive(2.0, [0.0], 1e9)
    } else {
        gas().from_primitive(1e-3, [0.0], 1.0)
    }
}

fn woodward_colella_ic(x: [f64; 1]) -> State<1> {
    let p = if x[0] < 0.1 {
        1e3
    } else if x[0] < 0.9 {
        1e-2
    } else {
        1e2
    };
    gas().from_primitive(1.0, [0.0], p)
}

fn khi_ic(x: [f64; 2]) -> State<2> {
    let b = (15.0 * x[1] + 7.5).tanh() - (15.0 * x[1] - 7.5).tanh();
    let rho = 0.5 + 0.75 * b;
    let v1 = 0.5 * (b - 1.0);
    let v2 = 0.1 * (2.0 * PI * x[0]).sin();
    gas().from_primitive(rho, [v1, v2], 1.0)
}
