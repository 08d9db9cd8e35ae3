//! End-to-end checks of the benchmark binary and the shipped config files.

use std::path::{Path, PathBuf};
use std::process::Command;

use esfd_cli::config::RunConfig;
use esfd_cli::problems::Problem;
use esfd_cli::riemann::{self, Prim};
use esfd_cli::runner::{run_1d, summarize};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_esfd"))
}

#[test]
fn shipped_configs_parse_and_resolve() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_none_or(|e| e != "toml") {
            continue;
        }
        let setup = RunConfig::load(&path)
            .and_then(|c| c.resolve())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(setup.n >= 16, "{}: degenerate grid", path.display());
        seen += 1;
    }
    assert!(seen >= 7, "expected the full set of shipped configs, found {seen}");
}

#[test]
fn low_order_sod_converges_to_the_exact_riemann_solution() {
    let (summary, l1) = sod_low_order_l1(400);
    assert!(summary.admissible);
    // First-order smearing of the contact dominates at this resolution.
    assert!(l1 < 2e-2, "L1 density error {l1:.2e}");
}

/// Fine-grid variant of the same comparison; ~a minute of runtime.
#[test]
#[ignore]
fn low_order_sod_converges_to_the_exact_riemann_solution_fine() {
    let (coarse, fine) = (sod_low_order_l1(400).1, sod_low_order_l1(3200).1);
    // The contact layer smears at O(h^{2/3}), so 8x the resolution buys
    // roughly a factor 4 in L1; anything much less indicates a bias.
    assert!(fine < coarse / 3.0, "coarse {coarse:.2e} vs fine {fine:.2e}");
}

fn sod_low_order_l1(n: usize) -> (esfd_cli::runner::RunSummary, f64) {
    use esfd_cli::config::{FluxKind, SchemeKind};

    let mut setup = esfd_cli::config::Setup::preset(Problem::Sod, Some(n));
    setup.scheme = SchemeKind::LowOrder.to_scheme();
    setup.low_flux = FluxKind::Hllc.to_flux();
    let out = run_1d(&setup).unwrap();

    let left = Prim { rho: 1.0, v: 0.0, p: 1.0 };
    let right = Prim { rho: 0.125, v: 0.0, p: 0.1 };
    let fan = riemann::solve(1.4, left, right);
    let t = out.field.time;
    let mut l1 = 0.0;
    for (i, u) in out.field.states.iter().enumerate() {
        let x = out.system.grid().coords(i)[0];
        let exact = fan.sample((x - 0.5) / t);
        l1 += out.system.mass()[i] * (u.rho - exact.rho).abs();
    }
    (summarize(&setup, &out), l1)
}

#[test]
fn unlimited_high_order_run_on_sod_is_flagged_and_exits_3() {
    let status = bin()
        .args(["run", "--config"])
        .arg(configs_dir().join("sod_high_order.toml"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[problem]\nname = \"sod\"\nnodes = 200\n").unwrap();
    let output = bin().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&output.stderr);
    assert!(msg.contains("nodes"), "stderr should name the unknown key: {msg}");
}

#[test]
fn bad_cli_values_exit_2() {
    for args in [
        ["converge", "--scheme", "bogus"].as_slice(),
        &["converge", "--grids", "64..32"],
        &["reference", "--problem", "bogus", "--n", "100"],
        &["time", "--scheme", "bogus"],
    ] {
        let output = bin().args(args).output().unwrap();
        assert_eq!(
            output.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
}

#[test]
fn converge_subcommand_prints_the_rate_table() {
    let output = bin()
        .args([
            "converge",
            "--problem",
            "density_wave",
            "--scheme",
            "ecav",
            "--orders",
            "2",
            "--grids",
            "16..32",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,n,error,rate"));
    assert_eq!(lines.clone().count(), 2);
    let last = lines.nth(1).unwrap();
    let rate: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
    assert!(rate > 1.5, "order-2 rate, got {rate} in {text}");
}

#[test]
fn run_writes_artifacts_and_reports_success() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("wave.toml");
    std::fs::write(
        &cfg,
        "[problem]\nname = \"density_wave\"\nn = 32\nt_final = 0.01\n\n\
         [scheme]\nkind = \"kl\"\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let output = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    for name in ["snapshot.csv", "run_log.jsonl", "summary.json"] {
        assert!(out_dir.join(name).exists(), "missing {name}");
    }
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("density_wave"), "summary line: {text}");
}
