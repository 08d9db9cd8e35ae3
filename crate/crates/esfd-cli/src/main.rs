//! The `esfd` benchmark binary: single runs from config files, convergence
//! studies, reference profiles, and timing comparisons.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use esfd_cli::config::{FluxKind, RunConfig, SchemeKind, Setup};
use esfd_cli::problems::Problem;
use esfd_cli::{convergence, reference, runner, timing};

#[derive(Parser)]
#[command(name = "esfd", version, about = "Entropy-stable finite-difference Euler benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a single run described by a TOML config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory for snapshot.csv, run_log.jsonl, and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-refinement study on a problem with an analytic solution.
    Converge {
        #[arg(long, default_value = "density_wave")]
        problem: String,
        #[arg(long, default_value = "ecav")]
        scheme: String,
        /// Comma-separated stencil orders.
        #[arg(long, default_value = "2,3,4,5")]
        orders: String,
        /// Either a doubling range `16..512` or comma-separated node counts.
        #[arg(long, default_value = "16..512")]
        grids: String,
        /// Low-order flux override (lxf or hllc).
        #[arg(long)]
        flux: Option<String>,
        /// Directory for the convergence CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute and cache a fine-grid low-order reference profile.
    Reference {
        #[arg(long)]
        problem: String,
        #[arg(long)]
        n: usize,
        /// Cache directory (default: ./reference).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wall-clock comparison of a scheme against the high-order baseline.
    Time {
        #[arg(long, default_value = "density_wave")]
        problem: String,
        #[arg(long, default_value = "kl")]
        scheme: String,
        #[arg(long, default_value_t = 256)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long, default_value_t = 100)]
        steps: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(err) = init_threads() {
        eprintln!("error: {err:#}");
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(runner::failure_exit_code(&err))
            }
        }
    }
}

/// ESFD_THREADS caps the rayon worker count for everything below.
fn init_threads() -> Result<()> {
    match std::env::var("ESFD_THREADS") {
        Ok(value) => {
            let threads: usize = value
                .parse()
                .context("ESFD_THREADS must be a positive integer")?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .context("initializing the thread pool")?;
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn dispatch(command: Command) -> Result<ExitCode> {
    match command {
        Command::Run { config, out } => {
            let config = match RunConfig::load(&config).and_then(|c| c.resolve()) {
                Ok(setup) => setup,
                Err(err) => {
                    eprintln!("error: {err:#}");
                    return Ok(ExitCode::from(2));
                }
            };
            run(&config, out.as_deref())
        }
        Command::Converge { problem, scheme, orders, grids, flux, out } => {
            converge(&problem, &scheme, &orders, &grids, flux.as_deref(), out.as_deref())
        }
        Command::Reference { problem, n, out } => {
            let problem = parse_problem(&problem).map_err(usage)?;
            let dir = out.unwrap_or_else(|| PathBuf::from("reference"));
            let profile = reference::reference_profile(problem, n, Some(&dir))?;
            println!(
                "{} reference at n = {}: density range [{:.6e}, {:.6e}], cached in {}",
                problem.name(),
                profile.n,
                profile.density.iter().fold(f64::INFINITY, |a, &b| a.min(b)),
                profile.density.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)),
                dir.display(),
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Time { problem, scheme, n, order, steps } => {
            let mut setup = Setup::preset(parse_problem(&problem).map_err(usage)?, Some(n));
            setup.scheme = parse_scheme(&scheme).map_err(usage)?;
            setup.order = order;
            if !matches!(setup.scheme, esfd::solver::Scheme::Kl | esfd::solver::Scheme::Rkl) {
                setup.alpha = None;
            }
            let rows = timing::compare(&setup, steps)?;
            println!("scheme        n     order  steps   seconds     s/step");
            for row in &rows {
                println!(
                    "{:<12} {:<6} {:<6} {:<7} {:<11.4} {:.6}",
                    row.scheme, row.n, row.order, row.steps, row.seconds, row.seconds_per_step
                );
            }
            if let [limited, baseline] = rows.as_slice() {
                if baseline.seconds > 0.0 {
                    println!(
                        "overhead vs high_order: {:.2}x",
                        limited.seconds / baseline.seconds
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn run(setup: &Setup, out: Option<&Path>) -> Result<ExitCode> {
    let summary = runner::run_to_dir(setup, out)?;
    println!(
        "{} {} N={} n={}: steps={} accepted={} min_rho={:.3e} min_p={:.3e} wall={:.2}s",
        summary.problem,
        summary.scheme,
        summary.order,
        summary.n,
        summary.steps,
        summary.accepted,
        summary.min_density,
        summary.min_pressure,
        summary.wall_seconds,
    );
    if !summary.admissible {
        eprintln!("run finished with inadmissible states (expected for the unlimited scheme on shocks)");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn converge(
    problem: &str,
    scheme: &str,
    orders: &str,
    grids: &str,
    flux: Option<&str>,
    out: Option<&Path>,
) -> Result<ExitCode> {
    let problem = parse_problem(problem).map_err(usage)?;
    let scheme = parse_scheme(scheme).map_err(usage)?;
    let flux = flux.map(parse_flux).transpose().map_err(usage)?;
    let orders = parse_orders(orders).map_err(usage)?;
    let grids = parse_grids(grids).map_err(usage)?;
    let report = convergence::study(problem, scheme, flux, &orders, &grids)?;

    let mut table = Vec::new();
    convergence::write_csv(&report, &mut table)?;
    print!("{}", String::from_utf8(table).expect("csv is utf-8"));

    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!(
            "convergence_{}_{}.csv",
            problem.name(),
            esfd_cli::config::scheme_name(scheme)
        ));
        let mut w = BufWriter::new(File::create(&path)?);
        convergence::write_csv(&report, &mut w)?;
        w.flush()?;
        eprintln!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

/// Command-line argument error; `main` maps it to the usage exit code (2),
/// matching what malformed config files and clap's own errors produce.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(err: anyhow::Error) -> anyhow::Error {
    anyhow::Error::new(UsageError(format!("{err:#}")))
}

fn parse_problem(name: &str) -> Result<Problem> {
    Problem::from_name(name).with_context(|| {
        format!(
            "unknown problem {name:?} (expected one of {})",
            Problem::ALL.map(|p| p.name()).join(", ")
        )
    })
}

fn parse_scheme(name: &str) -> Result<esfd::solver::Scheme> {
    SchemeKind::from_name(name)
        .map(SchemeKind::to_scheme)
        .with_context(|| format!("unknown scheme {name:?}"))
}

fn parse_flux(name: &str) -> Result<esfd::solver::LowFlux> {
    FluxKind::from_name(name)
        .map(FluxKind::to_flux)
        .with_context(|| format!("unknown flux {name:?} (expected lxf or hllc)"))
}

fn parse_orders(text: &str) -> Result<Vec<usize>> {
    let orders: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad order {s:?}")))
        .collect::<Result<_>>()?;
    if orders.is_empty() {
        bail!("no orders given");
    }
    Ok(orders)
}

/// `lo..hi` expands by doubling; otherwise a comma-separated list.
fn parse_grids(text: &str) -> Result<Vec<usize>> {
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().with_context(|| format!("bad grid bound {lo:?}"))?;
        let hi: usize = hi.trim().parse().with_context(|| format!("bad grid bound {hi:?}"))?;
        if lo == 0 || hi < lo {
            bail!("grid range must satisfy 0 < lo <= hi");
        }
        let mut grids = Vec::new();
        let mut n = lo;
        while n <= hi {
            grids.push(n);
            n *= 2;
        }
        return Ok(grids);
    }
    let grids: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad grid size {s:?}")))
        .collect::<Result<_>>()?;
    if grids.is_empty() {
        bail!("no grids given");
    }
    Ok(grids)
}
