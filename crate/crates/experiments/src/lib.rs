//! Monte Carlo experiment layer: configuration, drivers, statistics, and
//! reproducible run artifacts for the regularized logarithmic Schrödinger
//! laboratory.
//!
//! The [`runner::run`] entry point executes one experiment described by an
//! [`ExperimentSpec`] and returns a [`RunRecord`] — manifest, per-sample
//! accounting, aggregated tables, and power-law fits — that serializes to
//! an output directory as `manifest.json` plus one CSV per table.  The
//! `slogs` binary in this crate is a thin argument-parsing shell around
//! that function.
//!
//! Reproducibility contract: for a fixed config snapshot and master seed,
//! every byte of every artifact except the manifest's wall-clock
//! timestamps is identical across runs and across worker counts.

pub mod checks;
pub mod config;
pub mod fit;
pub mod record;
pub mod runner;

pub use config::{ConfigError, ExperimentKind, ExperimentSpec, InitKind, InitSpec};
pub use fit::{fit_loglog_slope, FitError, FitResult};
pub use record::{FitSummary, Manifest, RunRecord, SampleReport, Table};
pub use runner::run;
