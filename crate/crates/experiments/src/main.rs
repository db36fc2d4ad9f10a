//! `slogs` — command-line front end of the experiment layer.
//!
//! Exit codes: `0` success, `1` unusable configuration or arguments,
//! `2` experiment completed but must not be trusted (exclusion quota
//! exceeded or an inequality violated), `3` internal or I/O failure.
//! Diagnostics go to stderr; results go to files in `--out`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slogs_experiments::{runner, ExperimentKind, ExperimentSpec};

#[derive(Parser)]
#[command(
    name = "slogs",
    version,
    about = "Monte Carlo laboratory for the regularized stochastic logarithmic Schrödinger equation"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Experiment configuration file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for `manifest.json` and the result CSVs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the config's master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (default: `SLOGS_WORKERS`, then all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Suppress progress notes on stderr.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate independent sample paths and record observable series.
    Simulate,
    /// Strong ε-convergence of the regularized equation under coupled noise.
    Converge,
    /// Temporal regularity of the solution: mean-square increments vs lag.
    Hoelder,
    /// Uniform-in-ε moment bounds of norms and energy.
    Momentsweep,
    /// Mass conservation audit across time schemes.
    Massdrift,
    /// Worst-case margins of the analytic inequalities on random batches.
    Check,
    /// Deterministic solver oracles; needs no config and writes no files.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let kind = match cli.cmd {
        Cmd::Simulate => ExperimentKind::SingleRun,
        Cmd::Converge => ExperimentKind::EpsConvergence,
        Cmd::Hoelder => ExperimentKind::TemporalHoelder,
        Cmd::Momentsweep => ExperimentKind::MomentSweep,
        Cmd::Massdrift => ExperimentKind::MassDrift,
        Cmd::Check => ExperimentKind::InequalityCheck,
        Cmd::Selftest => return run_selftest(),
    };

    let workers = match resolve_workers(cli.workers) {
        Ok(w) => w,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let Some(config) = cli.config else {
        eprintln!("error: --config is required for `{}`", kind.name());
        return ExitCode::from(1);
    };
    let Some(out) = cli.out else {
        eprintln!("error: --out is required for `{}`", kind.name());
        return ExitCode::from(1);
    };

    let mut spec = match ExperimentSpec::from_file(kind, &config) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = cli.seed {
        spec.override_seed(seed);
    }

    if !cli.quiet {
        eprintln!(
            "{}: {} samples, seed {}, {} workers",
            kind.name(),
            spec.n_samples,
            spec.noise.master_seed,
            workers
        );
    }

    let record = match runner::run(&spec, workers) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    match record.write_to(&out) {
        Ok(paths) => {
            if !cli.quiet {
                eprintln!(
                    "wrote {} files to {} ({} completed, {} excluded)",
                    paths.len(),
                    out.display(),
                    record.completed,
                    record.excluded
                );
            }
        }
        Err(e) => {
            eprintln!("error: cannot write results to {}: {e}", out.display());
            return ExitCode::from(3);
        }
    }

    if record.invalid {
        eprintln!(
            "error: run is not trustworthy ({} of {} samples excluded)",
            record.excluded,
            record.samples.len()
        );
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn resolve_workers(flag: Option<usize>) -> Result<usize, String> {
    let workers = match flag {
        Some(w) => w,
        None => match std::env::var("SLOGS_WORKERS") {
            Ok(v) => v
                .parse::<usize>()
                .map_err(|_| format!("SLOGS_WORKERS must be a positive integer, got `{v}`"))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if workers == 0 {
        return Err("worker count must be at least 1".to_string());
    }
    Ok(workers)
}

fn run_selftest() -> ExitCode {
    let reports = slogs_experiments::checks::selftest();
    let mut ok = true;
    for r in &reports {
        let verdict = if r.pass() { "pass" } else { "FAIL" };
        println!("{:28} {:>12.5e}  (tol {:.1e})  {}", r.name, r.error, r.tol, verdict);
        ok &= r.pass();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
