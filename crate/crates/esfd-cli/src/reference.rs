//! Fine-grid low-order reference profiles with on-disk caching.

use std::collections::hash_map::DefaultHasher;
use std::fs;
use std::hash::{Hash, Hasher};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use esfd::solver::{LowFlux, Scheme};

use crate::config::Setup;
use crate::problems::Problem;
use crate::runner::{run_1d, RunOutput};

/// A 1D reference profile: primitives at node coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceProfile {
    pub n: usize,
    pub x: Vec<f64>,
    pub density: Vec<f64>,
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

/// The setup used for reference runs: the robust low-order scheme with the
/// HLLC flux on a 4th-order stencil, keeping the preset timestep policy.
pub fn reference_setup(problem: Problem, n: usize) -> Setup {
    let mut setup = Setup::preset(problem, Some(n));
    setup.scheme = Scheme::LowOrder;
    setup.low_flux = LowFlux::Hllc;
    setup.order = 4;
    setup.alpha = None;
    setup
}

fn cache_key(setup: &Setup) -> String {
    format!(
        "problem={} n={} order={} flux={:?} drive={:?} t_final={}",
        setup.problem.name(),
        setup.n,
        setup.order,
        setup.low_flux,
        setup.drive,
        setup.t_final,
    )
}

fn cache_path(dir: &Path, problem: Problem, n: usize, key: &str) -> PathBuf {
    let mut h = DefaultHasher::new();
    key.hash(&mut h);
    dir.join(format!("ref_{}_n{}_{:016x}.csv", problem.name(), n, h.finish()))
}

/// Computes (or loads from `cache_dir`) the low-order reference profile of
/// a 1D problem at resolution `n`. A cache file that fails validation is
/// silently recomputed.
pub fn reference_profile(
    problem: Problem,
    n: usize,
    cache_dir: Option<&Path>,
) -> Result<ReferenceProfile> {
    let setup = reference_setup(problem, n);
    let key = cache_key(&setup);
    let path = cache_dir.map(|dir| cache_path(dir, problem, n, &key));
    if let Some(path) = &path {
        if let Some(profile) = load_cached(path, &key) {
            return Ok(profile);
        }
    }
    let out = run_1d(&setup).with_context(|| format!("reference run for {key}"))?;
    let profile = profile_from(&out);
    if let Some(path) = &path {
        if let Err(err) = store_cached(path, &key, &profile) {
            log::warn!("could not cache reference at {}: {err}", path.display());
        }
    }
    Ok(profile)
}

fn profile_from(out: &RunOutput<1>) -> ReferenceProfile {
    let gas = out.system.gas();
    let n = out.field.states.len();
    let mut profile = ReferenceProfile {
        n,
        x: Vec::with_capacity(n),
        density: Vec::with_capacity(n),
        velocity: Vec::with_capacity(n),
        pressure: Vec::with_capacity(n),
    };
    for (i, u) in out.field.states.iter().enumerate() {
        let (rho, vel, p) = gas.primitive(u);
        profile.x.push(out.system.grid().coords(i)[0]);
        profile.density.push(rho);
        profile.velocity.push(vel[0]);
        profile.pressure.push(p);
    }
    profile
}

fn load_cached(path: &Path, key: &str) -> Option<ReferenceProfile> {
    let text = fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    if lines.next()?.strip_prefix("# ")? != key {
        return None;
    }
    if lines.next()? != "x,rho,v,p" {
        return None;
    }
    let mut profile =
        ReferenceProfile { n: 0, x: vec![], density: vec![], velocity: vec![], pressure: vec![] };
    for line in lines {
        let mut cols = line.split(',').map(str::parse::<f64>);
        profile.x.push(cols.next()?.ok()?);
        profile.density.push(cols.next()?.ok()?);
        profile.velocity.push(cols.next()?.ok()?);
        profile.pressure.push(cols.next()?.ok()?);
        if cols.next().is_some() {
            return None;
        }
    }
    profile.n = profile.x.len();
    (profile.n > 0).then_some(profile)
}

fn store_cached(path: &Path, key: &str, profile: &ReferenceProfile) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = format!("# {key}\nx,rho,v,p\n");
    for i in 0..profile.n {
        text.push_str(&format!(
            "{},{},{},{}\n",
            profile.x[i], profile.density[i], profile.velocity[i], profile.pressure[i]
        ));
    }
    fs::write(path, text)
}

/// The rightmost position where the density crosses down through
/// `threshold`, linearly interpolated between nodes. Falls back to the last
/// node when the profile stays above the threshold, and `None` when it
/// never reaches it.
pub fn shock_position(x: &[f64], density: &[f64], threshold: f64) -> Option<f64> {
    if density.last()? >= &threshold {
        return x.last().copied();
    }
    for i in (0..x.len().saturating_sub(1)).rev() {
        let (a, b) = (density[i], density[i + 1]);
        if a >= threshold && b < threshold {
            let t = (a - threshold) / (a - b);
            return Some(x[i] + t * (x[i + 1] - x[i]));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shock_positions_interpolate_the_crossing() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let rho = [1.0, 1.0, 0.5, 0.1];
        // Crossing of 0.75 lies halfway between x = 1 and x = 2.
        assert_eq!(shock_position(&x, &rho, 0.75), Some(1.5));
        // A threshold below every value: profile never drops through it.
        assert_eq!(shock_position(&x, &rho, 0.05), Some(3.0));
        // A threshold above every value.
        assert_eq!(shock_position(&x, &rho, 2.0), None);
    }

    #[test]
    fn cached_profiles_round_trip_and_reject_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let mut setup = reference_setup(Problem::Sod, 48);
        setup.t_final = 0.02;
        // Shorten the run through the cache key so this stays a unit test.
        let key = cache_key(&setup);
        let out = run_1d(&setup).unwrap();
        let profile = profile_from(&out);
        let path = cache_path(dir.path(), Problem::Sod, 48, &key);
        store_cached(&path, &key, &profile).unwrap();
        assert_eq!(load_cached(&path, &key).unwrap(), profile);

        // A stale key misses.
        assert!(load_cached(&path, "other key").is_none());
        // Corrupt numeric data misses and would be recomputed.
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("not,a,number,row\n");
        fs::write(&path, &text).unwrap();
        assert!(load_cached(&path, &key).is_none());
    }

    #[test]
    fn reference_profiles_hit_the_cache_on_the_second_call() {
        let dir = tempfile::tempdir().unwrap();
        let first = reference_profile(Problem::Sod, 32, Some(dir.path())).unwrap();
        let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
        assert_eq!(files.len(), 1);
        let second = reference_profile(Problem::Sod, 32, Some(dir.path())).unwrap();
        assert_eq!(first, second);
    }
}
