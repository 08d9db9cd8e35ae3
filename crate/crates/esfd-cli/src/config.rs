//! Run configuration: a TOML file selects a problem preset and the scheme,
//! resolution, and time integration to apply to it. Omitted settings fall
//! back to the preset defaults (see `docs/configuration.md` for the schema).

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use esfd::solver::{Integrator, LowFlux, Scheme};

use crate::problems::{Drive, Problem};

/// A parsed configuration file.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemSection,
    pub scheme: SchemeSection,
    #[serde(default)]
    pub time: TimeSection,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    /// Preset name (`density_wave`, `sod`, `shu_osher`, `leblanc`,
    /// `woodward_colella`, `khi2d`).
    pub name: String,
    /// Nodes per axis; preset default when omitted.
    pub n: Option<usize>,
    /// Final-time override.
    pub t_final: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: SchemeKind,
    /// Stencil design order (2-5); preset default when omitted.
    pub order: Option<usize>,
    /// Low-order two-point flux; preset default when omitted.
    pub flux: Option<FluxKind>,
    /// Relative-positivity strength in [0, 1]. Omitting it disables
    /// positivity enforcement.
    pub alpha: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub integrator: Option<IntegratorKind>,
    /// Fixed timestep. Mutually exclusive with the tolerances.
    pub dt: Option<f64>,
    pub abstol: Option<f64>,
    pub reltol: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    HighOrder,
    LowOrder,
    Ecav,
    Kl,
    Recav,
    Rkl,
}

impl SchemeKind {
    pub fn to_scheme(self) -> Scheme {
        match self {
            SchemeKind::HighOrder => Scheme::HighOrder,
            SchemeKind::LowOrder => Scheme::LowOrder,
            SchemeKind::Ecav => Scheme::Ecav,
            SchemeKind::Kl => Scheme::Kl,
            SchemeKind::Recav => Scheme::Recav,
            SchemeKind::Rkl => Scheme::Rkl,
        }
    }

    pub fn from_name(name: &str) -> Option<SchemeKind> {
        match name {
            "high_order" => Some(SchemeKind::HighOrder),
            "low_order" => Some(SchemeKind::LowOrder),
            "ecav" => Some(SchemeKind::Ecav),
            "kl" => Some(SchemeKind::Kl),
            "recav" => Some(SchemeKind::Recav),
            "rkl" => Some(SchemeKind::Rkl),
            _ => None,
        }
    }
}

/// Display name of a scheme, matching the config spelling.
pub fn scheme_name(scheme: Scheme) -> &'static str {
    match scheme {
        Scheme::HighOrder => "high_order",
        Scheme::LowOrder => "low_order",
        Scheme::Ecav => "ecav",
        Scheme::Kl => "kl",
        Scheme::Recav => "recav",
        Scheme::Rkl => "rkl",
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FluxKind {
    Lxf,
    Hllc,
}

impl FluxKind {
    pub fn to_flux(self) -> LowFlux {
        match self {
            FluxKind::Lxf => LowFlux::Lxf,
            FluxKind::Hllc => LowFlux::Hllc,
        }
    }

    pub fn from_name(name: &str) -> Option<FluxKind> {
        match name {
            "lxf" => Some(FluxKind::Lxf),
            "hllc" => Some(FluxKind::Hllc),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum IntegratorKind {
    Rk4,
    Ssprk43,
}

impl IntegratorKind {
    pub fn to_integrator(self) -> Integrator {
        match self {
            IntegratorKind::Rk4 => Integrator::Rk4,
            IntegratorKind::Ssprk43 => Integrator::Ssprk43,
        }
    }
}

/// A fully resolved run: preset defaults merged with overrides.
#[derive(Clone, Debug)]
pub struct Setup {
    pub problem: Problem,
    pub n: usize,
    pub t_final: f64,
    pub scheme: Scheme,
    pub order: usize,
    pub low_flux: LowFlux,
    pub alpha: Option<f64>,
    pub drive: Drive,
    pub integrator: Integrator,
}

impl Setup {
    /// The preset defaults for `problem`, at resolution `n` when given.
    pub fn preset(problem: Problem, n: Option<usize>) -> Setup {
        let info = problem.info();
        Setup {
            problem,
            n: n.unwrap_or(info.default_n),
            t_final: info.t_final,
            scheme: info.scheme,
            order: info.order,
            low_flux: info.low_flux,
            alpha: info.alpha,
            drive: info.drive,
            integrator: info.integrator,
        }
    }
}

impl RunConfig {
    /// Parses a configuration from TOML text. Parse errors carry the
    /// offending line and field.
    pub fn parse(text: &str) -> Result<RunConfig> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    /// Merges the file with the preset defaults into a concrete setup.
    pub fn resolve(&self) -> Result<Setup> {
        let problem = Problem::from_name(&self.problem.name).with_context(|| {
            format!(
                "problem.name: unknown problem {:?} (expected one of {})",
                self.problem.name,
                Problem::ALL.map(|p| p.name()).join(", ")
            )
        })?;
        let mut setup = Setup::preset(problem, self.problem.n);
        if let Some(t) = self.problem.t_final {
            if !(t.is_finite() && t > 0.0) {
                bail!("problem.t_final: must be positive and finite, got {t}");
            }
            setup.t_final = t;
        }

        setup.scheme = self.scheme.kind.to_scheme();
        if let Some(order) = self.scheme.order {
            if !(2..=5).contains(&order) {
                bail!("scheme.order: supported stencil orders are 2-5, got {order}");
            }
            setup.order = order;
        }
        if let Some(flux) = self.scheme.flux {
            setup.low_flux = flux.to_flux();
        }
        // Positivity is opt-in per file: an omitted alpha disables it even
        // when the preset default enables it.
        setup.alpha = self.scheme.alpha;

        if let Some(integrator) = self.time.integrator {
            setup.integrator = integrator.to_integrator();
        }
        match (self.time.dt, self.time.abstol, self.time.reltol) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => {
                bail!("time: dt and abstol/reltol are mutually exclusive")
            }
            (Some(dt), None, None) => {
                if !(dt.is_finite() && dt > 0.0) {
                    bail!("time.dt: must be positive and finite, got {dt}");
                }
                setup.drive = Drive::FixedDt(dt);
            }
            (None, Some(abstol), Some(reltol)) => {
                setup.drive = Drive::Adaptive { abstol, reltol };
                setup.integrator = Integrator::Ssprk43;
            }
            (None, Some(_), None) | (None, None, Some(_)) => {
                bail!("time: abstol and reltol must be given together")
            }
            (None, None, None) => {}
        }
        Ok(setup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_full_config_resolves_to_its_literal_values() {
        let cfg = RunConfig::parse(
            r#"
            [problem]
            name = "leblanc"
            n = 400

            [scheme]
            kind = "kl"
            order = 4
            flux = "hllc"
            alpha = 0.5

            [time]
            integrator = "ssprk43"
            dt = 6e-7
            "#,
        )
        .unwrap();
        let setup = cfg.resolve().unwrap();
        assert_eq!(setup.problem, Problem::Leblanc);
        assert_eq!(setup.n, 400);
        assert_eq!(setup.scheme, Scheme::Kl);
        assert_eq!(setup.low_flux, LowFlux::Hllc);
        assert_eq!(setup.alpha, Some(0.5));
        assert_eq!(setup.drive, Drive::FixedDt(6e-7));
        assert_eq!(setup.integrator, Integrator::Ssprk43);
    }

    #[test]
    fn omitted_settings_fall_back_to_the_preset() {
        let cfg = RunConfig::parse(
            "[problem]\nname = \"density_wave\"\n[scheme]\nkind = \"ecav\"\n",
        )
        .unwrap();
        let setup = cfg.resolve().unwrap();
        assert_eq!(setup.n, 64);
        assert_eq!(setup.order, 4);
        assert_eq!(setup.t_final, 1.0);
        assert_eq!(setup.drive, Drive::FixedDt(1e-4));
        assert_eq!(setup.integrator, Integrator::Rk4);
        assert_eq!(setup.alpha, None, "positivity is opt-in per file");
    }

    #[test]
    fn unknown_fields_are_rejected_with_their_location() {
        let err = RunConfig::parse(
            "[problem]\nname = \"sod\"\n[scheme]\nkind = \"kl\"\nspeed = 3\n",
        )
        .unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("speed"), "{msg}");
        assert!(msg.contains("line 5"), "{msg}");
    }

    #[test]
    fn conflicting_time_sections_are_rejected() {
        let cfg = RunConfig::parse(
            "[problem]\nname = \"sod\"\n[scheme]\nkind = \"kl\"\n[time]\ndt = 1e-3\nabstol = 1e-6\n",
        )
        .unwrap();
        assert!(cfg.resolve().is_err());

        let cfg = RunConfig::parse(
            "[problem]\nname = \"sod\"\n[scheme]\nkind = \"kl\"\n[time]\nabstol = 1e-6\n",
        )
        .unwrap();
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn unknown_problem_names_are_rejected() {
        let cfg = RunConfig::parse(
            "[problem]\nname = \"vortex\"\n[scheme]\nkind = \"ecav\"\n",
        )
        .unwrap();
        let msg = format!("{:#}", cfg.resolve().unwrap_err());
        assert!(msg.contains("vortex") && msg.contains("density_wave"), "{msg}");
    }

    #[test]
    fn adaptive_tolerances_force_the_embedded_integrator() {
        let cfg = RunConfig::parse(
            "[problem]\nname = \"density_wave\"\n[scheme]\nkind = \"ecav\"\n[time]\nintegrator = \"rk4\"\nabstol = 1e-6\nreltol = 1e-4\n",
        )
        .unwrap();
        let setup = cfg.resolve().unwrap();
        assert_eq!(setup.integrator, Integrator::Ssprk43);
        assert_eq!(setup.drive, Drive::Adaptive { abstol: 1e-6, reltol: 1e-4 });
    }
}
