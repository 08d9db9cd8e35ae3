//! Benchmark harness for the `esfd` solver library: problem presets,
//! run configuration, convergence studies, reference solutions, and
//! timing comparisons. The `esfd` binary in this crate exposes these as
//! subcommands; the library surface exists so integration tests can
//! drive the same code paths in-process.

pub mod config;
pub mod convergence;
pub mod problems;
pub mod reference;
pub mod riemann;
pub mod runner;
pub mod timing;
