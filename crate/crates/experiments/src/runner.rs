//! Monte Carlo experiment drivers.
//!
//! Every experiment follows the same shape: build solvers up front, run the
//! per-sample work in a dedicated thread pool with *ordered* collection,
//! then aggregate sequentially.  Per-sample work is a pure function of
//! `(master seed, sample index)` — the noise is derived counter-style, never
//! from a shared mutable generator — so the results are byte-identical for
//! any worker count, which the reproducibility tests assert verbatim.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use slogs_field_core::ComplexField;
use slogs_noise::{NoiseStream, QWienerModel};
use slogs_observables::stats::jackknife_mean_se;
use slogs_observables::SeriesRecorder;
use slogs_solver::{PathState, PathStatus, Scheme, Solver};

use crate::checks;
use crate::config::{ConfigError, ExperimentKind, ExperimentSpec};
use crate::fit::fit_loglog_slope;
use crate::record::{cell, FnvHasher, Manifest, RunRecord, SampleReport, Table, Timestamps};

/// Runs the experiment described by `spec` on `workers` threads and returns
/// the full record (manifest, per-sample accounting, tables, fits).  Writing
/// to disk is the caller's business.
pub fn run(spec: &ExperimentSpec, workers: usize) -> Result<RunRecord, ConfigError> {
    let workers = workers.max(1);
    let started = Timestamps::now();
    let mut record = RunRecord {
        manifest: Manifest {
            experiment: spec.kind.name().to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            master_seed: spec.noise.master_seed,
            config: spec.snapshot.clone(),
            timestamps: Timestamps {
                started_unix_s: started,
                finished_unix_s: started,
            },
        },
        samples: Vec::new(),
        completed: 0,
        excluded: 0,
        invalid: false,
        fits: BTreeMap::new(),
        tables: BTreeMap::new(),
    };

    match spec.kind {
        ExperimentKind::SingleRun => run_single(spec, workers, &mut record)?,
        ExperimentKind::EpsConvergence => run_eps_convergence(spec, workers, &mut record)?,
        ExperimentKind::TemporalHoelder => run_hoelder(spec, workers, &mut record)?,
        ExperimentKind::MomentSweep => run_moment_sweep(spec, workers, &mut record)?,
        ExperimentKind::MassDrift => run_mass_drift(spec, workers, &mut record)?,
        ExperimentKind::InequalityCheck => run_inequality_check(spec, &mut record),
    }

    if !record.fits.is_empty() {
        let mut t = Table::new(&[
            "name",
            "slope",
            "intercept",
            "r_squared",
            "slope_stderr",
            "ci_low",
            "ci_high",
        ]);
        for (name, f) in &record.fits {
            t.push(vec![
                name.clone(),
                cell(f.slope),
                cell(f.intercept),
                cell(f.r_squared),
                cell(f.slope_stderr),
                cell(f.slope_ci_low),
                cell(f.slope_ci_high),
            ]);
        }
        record.tables.insert("fits".to_string(), t);
    }

    record.manifest.timestamps.finished_unix_s = Timestamps::now();
    Ok(record)
}

// ---------------------------------------------------------------------------
// Shared machinery
// ---------------------------------------------------------------------------

/// One sample's accounting plus whatever the experiment measured on it;
/// `payload` is `None` when the sample is excluded.
struct SampleOutcome<T> {
    report: SampleReport,
    payload: Option<T>,
}

/// Ordered parallel map over sample indices in a dedicated pool, so the
/// caller controls the worker count exactly (the global pool is never used).
fn par_samples<T: Send>(
    workers: usize,
    n: usize,
    f: impl Fn(u64) -> SampleOutcome<T> + Sync + Send,
) -> Vec<SampleOutcome<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool construction cannot fail for n ≥ 1");
    pool.install(|| (0..n as u64).into_par_iter().map(f).collect())
}

fn status_word(status: PathStatus) -> &'static str {
    match status {
        PathStatus::Running => "running",
        PathStatus::Finished => "finished",
        PathStatus::BlowUp => "blow_up",
        PathStatus::NoConvergence => "no_convergence",
    }
}

/// Digest of the increments a sample consumes: step count, dt, and the full
/// first / middle / last Wiener increments.  A pure function of the noise
/// model and the sample index — the regularization never enters — so every
/// run of a coupled family (an ε-ladder, a scheme comparison) must report
/// the same hash for the same sample.
fn noise_fingerprint(model: &QWienerModel, dt: f64, steps: u64, sample: u64) -> String {
    let mut h = FnvHasher::new();
    h.absorb_f64(dt);
    h.absorb_f64(steps as f64);
    if steps > 0 {
        let mut probes: Vec<u64> = vec![0, steps / 2, steps - 1];
        probes.dedup();
        for step in probes {
            let stream = NoiseStream::derive(model.spec().master_seed, sample, step);
            let dw = model
                .sample_increment(dt, &stream)
                .expect("dt was validated at configuration time");
            for z in dw.values() {
                h.absorb_f64(z.re);
                h.absorb_f64(z.im);
            }
        }
    }
    h.finish()
}

fn l2_diff_sq(a: &ComplexField, b: &ComplexField) -> f64 {
    let s: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum();
    a.grid().cell_volume() * s
}

/// The sampling rule shared by the series recorder and the snapshot
/// observers: initial state, terminal state, and every `stride`-th step.
fn is_due(step: u64, stride: u64, total: u64) -> bool {
    step == 0 || step == total || step % stride == 0
}

/// Jackknife mean and standard error, degrading to `se = 0` for a single
/// sample (the fit then falls back to uniform weights).
fn mean_se(xs: &[f64]) -> (f64, f64) {
    match xs.len() {
        0 => (f64::NAN, f64::NAN),
        1 => (xs[0], 0.0),
        _ => jackknife_mean_se(xs).expect("length ≥ 2 checked"),
    }
}

fn build_base_model(spec: &ExperimentSpec) -> QWienerModel {
    QWienerModel::new(spec.noise, spec.grid)
        .expect("noise model was validated at configuration time")
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

/// Integrates `n_samples` independent paths of the base equation and records
/// the full observable series of each, plus a one-row-per-path summary of
/// the terminal observables.
fn run_single(
    spec: &ExperimentSpec,
    workers: usize,
    record: &mut RunRecord,
) -> Result<(), ConfigError> {
    let eq = spec.base_equation()?;
    let solver = spec.build_solver(eq)?;
    let model = build_base_model(spec);
    let u0 = spec.initial_field();
    let steps = solver.steps();
    let dt = spec.solver.dt;

    type SinglePayload = slogs_observables::ObservableSeries;
    let outcomes = par_samples(workers, spec.n_samples, |sample| {
        let mut rec = SeriesRecorder::new(eq, spec.alpha, spec.stride, steps)
            .expect("recorder parameters were validated at configuration time");
        let end = solver
            .evolve(&u0, sample, |st| rec.record(st))
            .expect("initial state was validated at configuration time");
        let report = SampleReport {
            index: sample,
            status: status_word(end.status).to_string(),
            noise_hash: noise_fingerprint(&model, dt, steps, sample),
        };
        SampleOutcome::<SinglePayload> {
            report,
            payload: Some(rec.into_series()),
        }
    });

    let mut summary = Table::new(&[
        "sample", "status", "t_final", "mass", "kinetic", "entropy", "energy", "h1", "h2",
        "l2_alpha",
    ]);
    for (i, out) in outcomes.iter().enumerate() {
        let series = out.payload.as_ref().expect("single runs always record");
        let mut row = vec![i.to_string(), out.report.status.clone()];
        match (series.times().last(), series.rows().last()) {
            (Some(&t), Some(last)) => {
                row.push(cell(t));
                row.extend(last.iter().map(|&v| cell(v)));
            }
            _ => row.extend(std::iter::repeat_with(|| cell(f64::NAN)).take(8)),
        }
        summary.push(row);

        let mut t = Table::new(&["time", "mass", "kinetic", "entropy", "energy", "h1", "h2",
            "l2_alpha"]);
        for (time, obs) in series.times().iter().zip(series.rows()) {
            let mut r = vec![cell(*time)];
            r.extend(obs.iter().map(|&v| cell(v)));
            t.push(r);
        }
        record.tables.insert(format!("series_{i:03}"), t);
    }
    record.tables.insert("summary".to_string(), summary);
    record.samples = outcomes.into_iter().map(|o| o.report).collect();
    record.account(spec.n_samples);
    Ok(())
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

/// Strong ε-convergence under coupled noise: every sample integrates the
/// reference regularization and the whole ladder on the *same* Wiener path,
/// and reports `sup_t ‖u_ε(t) − u_ref(t)‖²` over the sampled time grid.
/// A sample is excluded if any of its runs fails to finish.
fn run_eps_convergence(
    spec: &ExperimentSpec,
    workers: usize,
    record: &mut RunRecord,
) -> Result<(), ConfigError> {
    let eps_ref = spec
        .eps_reference
        .expect("configuration requires a reference ε for convergence runs");
    let ref_eq = EquationSpecAt::new(spec, eps_ref)?;
    let ref_solver = spec.build_solver(ref_eq.0)?;
    let ladder_solvers: Vec<Solver> = spec
        .eps_ladder
        .iter()
        .map(|&eps| spec.build_solver(EquationSpecAt::new(spec, eps)?.0))
        .collect::<Result<_, _>>()?;
    let model = build_base_model(spec);
    let u0 = spec.initial_field();
    let steps = ref_solver.steps();
    let dt = spec.solver.dt;
    let stride = spec.stride;

    let outcomes = par_samples(workers, spec.n_samples, |sample| {
        let hash = noise_fingerprint(&model, dt, steps, sample);
        // Reference trajectory, snapshotted on the sampling grid.
        let mut ref_snaps: Vec<ComplexField> = Vec::new();
        let end = ref_solver
            .evolve(&u0, sample, |st| {
                if snapshot_due(st, stride, steps) {
                    ref_snaps.push(st.u.clone());
                }
            })
            .expect("initial state was validated at configuration time");
        if end.status != PathStatus::Finished {
            return SampleOutcome {
                report: SampleReport {
                    index: sample,
                    status: status_word(end.status).to_string(),
                    noise_hash: hash,
                },
                payload: None,
            };
        }

        // Ladder trajectories on the same Wiener path, diffed on the fly.
        let mut sups: Vec<f64> = Vec::with_capacity(ladder_solvers.len());
        for solver in &ladder_solvers {
            let mut sup = 0.0_f64;
            let mut row = 0usize;
            let end = solver
                .evolve(&u0, sample, |st| {
                    if snapshot_due(st, stride, steps) {
                        sup = sup.max(l2_diff_sq(&st.u, &ref_snaps[row]));
                        row += 1;
                    }
                })
                .expect("initial state was validated at configuration time");
            if end.status != PathStatus::Finished {
                return SampleOutcome {
                    report: SampleReport {
                        index: sample,
                        status: status_word(end.status).to_string(),
                        noise_hash: hash,
                    },
                    payload: None,
                };
            }
            sups.push(sup);
        }
        SampleOutcome {
            report: SampleReport {
                index: sample,
                status: "finished".to_string(),
                noise_hash: hash,
            },
            payload: Some(sups),
        }
    });

    let surviving: Vec<&Vec<f64>> = outcomes.iter().filter_map(|o| o.payload.as_ref()).collect();
    let mut table = Table::new(&["epsilon", "err_mean", "err_se", "samples_used"]);
    let mut points: Vec<(f64, f64, f64)> = Vec::new();
    for (j, &eps) in spec.eps_ladder.iter().enumerate() {
        let vals: Vec<f64> = surviving.iter().map(|s| s[j]).collect();
        let (mean, se) = mean_se(&vals);
        table.push(vec![
            cell(eps),
            cell(mean),
            cell(se),
            vals.len().to_string(),
        ]);
        points.push((eps, mean, se));
    }
    record.tables.insert("errors".to_string(), table);
    if points.len() >= 3 && points.iter().all(|p| p.1 > 0.0) {
        if let Ok(fit) = fit_loglog_slope(&points) {
            record.fits.insert("err_vs_eps".to_string(), fit.into());
        }
    }
    record.samples = outcomes.into_iter().map(|o| o.report).collect();
    record.account(spec.n_samples);
    Ok(())
}

/// Snapshot rule for coupled-path observers: the sampling grid of
/// [`is_due`], restricted to states that carry valid data.
fn snapshot_due(st: &PathState, stride: u64, total: u64) -> bool {
    matches!(st.status, PathStatus::Running | PathStatus::Finished)
        && is_due(st.step_index, stride, total)
}

/// Tiny adapter so ladder construction can use `?` inside `map`.
struct EquationSpecAt(slogs_regularization::EquationSpec);

impl EquationSpecAt {
    fn new(spec: &ExperimentSpec, eps: f64) -> Result<Self, ConfigError> {
        let reg = spec.reg_at(eps)?;
        slogs_regularization::EquationSpec::new(spec.lambda, reg)
            .map(EquationSpecAt)
            .map_err(|e| ConfigError::Domain(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// hoelder
// ---------------------------------------------------------------------------

/// Temporal regularity probe: for each configured lag τ, measures
/// `‖u(a+τ) − u(a)‖²` averaged over the anchor grid `a = j·T/10`,
/// `j = 0..=7` (anchors whose pair leaves the horizon are dropped), then
/// averages over samples.  The log-log slope against τ estimates the
/// Hölder exponent of the squared increment.
fn run_hoelder(
    spec: &ExperimentSpec,
    workers: usize,
    record: &mut RunRecord,
) -> Result<(), ConfigError> {
    let eq = spec.base_equation()?;
    let solver = spec.build_solver(eq)?;
    let model = build_base_model(spec);
    let u0 = spec.initial_field();
    let steps = solver.steps();
    let dt = spec.solver.dt;

    let anchor_steps: Vec<u64> = (0..=7)
        .map(|j| ((j as f64) * (steps as f64) / 10.0).round() as u64)
        .collect();
    let lag_steps: Vec<u64> = spec
        .hoelder_lags
        .iter()
        .map(|&lag| (lag / dt).round() as u64)
        .collect();
    // Anchor/pair step set each path must snapshot.
    let mut wanted: BTreeSet<u64> = BTreeSet::new();
    for &a in &anchor_steps {
        for &l in &lag_steps {
            if a + l <= steps {
                wanted.insert(a);
                wanted.insert(a + l);
            }
        }
    }

    let outcomes = par_samples(workers, spec.n_samples, |sample| {
        let mut snaps: BTreeMap<u64, ComplexField> = BTreeMap::new();
        let end = solver
            .evolve(&u0, sample, |st| {
                if matches!(st.status, PathStatus::Running | PathStatus::Finished)
                    && wanted.contains(&st.step_index)
                {
                    snaps.entry(st.step_index).or_insert_with(|| st.u.clone());
                }
            })
            .expect("initial state was validated at configuration time");
        let report = SampleReport {
            index: sample,
            status: status_word(end.status).to_string(),
            noise_hash: noise_fingerprint(&model, dt, steps, sample),
        };
        if end.status != PathStatus::Finished {
            return SampleOutcome { report, payload: None };
        }
        let moments: Vec<f64> = lag_steps
            .iter()
            .map(|&l| {
                let pairs: Vec<f64> = anchor_steps
                    .iter()
                    .filter(|&&a| a + l <= steps)
                    .map(|&a| l2_diff_sq(&snaps[&(a + l)], &snaps[&a]))
                    .collect();
                pairs.iter().sum::<f64>() / pairs.len() as f64
            })
            .collect();
        SampleOutcome {
            report,
            payload: Some(moments),
        }
    });

    let surviving: Vec<&Vec<f64>> = outcomes.iter().filter_map(|o| o.payload.as_ref()).collect();
    let mut table = Table::new(&["lag", "moment_mean", "moment_se", "anchors", "samples_used"]);
    let mut points: Vec<(f64, f64, f64)> = Vec::new();
    for (j, &l) in lag_steps.iter().enumerate() {
        let lag_eff = l as f64 * dt;
        let anchors = anchor_steps.iter().filter(|&&a| a + l <= steps).count();
        let vals: Vec<f64> = surviving.iter().map(|s| s[j]).collect();
        let (mean, se) = mean_se(&vals);
        table.push(vec![
            cell(lag_eff),
            cell(mean),
            cell(se),
            anchors.to_string(),
            vals.len().to_string(),
        ]);
        points.push((lag_eff, mean, se));
    }
    record.tables.insert("moments".to_string(), table);
    if points.len() >= 3 && points.iter().all(|p| p.1 > 0.0) {
        if let Ok(fit) = fit_loglog_slope(&points) {
            record.fits.insert("moment_vs_lag".to_string(), fit.into());
        }
    }
    record.samples = outcomes.into_iter().map(|o| o.report).collect();
    record.account(spec.n_samples);
    Ok(())
}

// ---------------------------------------------------------------------------
// momentsweep
// ---------------------------------------------------------------------------

/// Names and per-run suprema of the five tracked path functionals.
const SWEEP_CHANNELS: [&str; 5] = ["l2_sup", "h1_sup", "h2_sup", "l2_alpha_sup", "energy_abs_sup"];

/// Uniform-in-ε moment bounds: for every ladder ε, integrates the same
/// Wiener paths and tracks `E[(sup_t q)^p]` for
/// `q ∈ {‖u‖, ‖u‖_{H¹}, ‖u‖_{H²}, ‖u‖_{L²_α}, |H_ε|}` and every configured
/// even order `p`.  A sample failing at *any* ε is excluded everywhere so
/// the ensembles stay comparable across the ladder.
fn run_moment_sweep(
    spec: &ExperimentSpec,
    workers: usize,
    record: &mut RunRecord,
) -> Result<(), ConfigError> {
    let solvers: Vec<Solver> = spec
        .eps_ladder
        .iter()
        .map(|&eps| spec.build_solver(EquationSpecAt::new(spec, eps)?.0))
        .collect::<Result<_, _>>()?;
    let equations: Vec<slogs_regularization::EquationSpec> = spec
        .eps_ladder
        .iter()
        .map(|&eps| EquationSpecAt::new(spec, eps).map(|e| e.0))
        .collect::<Result<_, _>>()?;
    let model = build_base_model(spec);
    let u0 = spec.initial_field();
    let steps = solvers[0].steps();
    let dt = spec.solver.dt;

    let outcomes = par_samples(workers, spec.n_samples, |sample| {
        let hash = noise_fingerprint(&model, dt, steps, sample);
        let mut per_eps: Vec<[f64; 5]> = Vec::with_capacity(solvers.len());
        for (solver, eq) in solvers.iter().zip(&equations) {
            let mut rec = SeriesRecorder::new(*eq, spec.alpha, spec.stride, steps)
                .expect("recorder parameters were validated at configuration time");
            let end = solver
                .evolve(&u0, sample, |st| rec.record(st))
                .expect("initial state was validated at configuration time");
            if end.status != PathStatus::Finished {
                return SampleOutcome {
                    report: SampleReport {
                        index: sample,
                        status: status_word(end.status).to_string(),
                        noise_hash: hash,
                    },
                    payload: None,
                };
            }
            let series = rec.series();
            let sup = |name: &str| series.column_max(name).expect("channel exists");
            let abs_sup = |name: &str| {
                series
                    .column(name)
                    .expect("channel exists")
                    .iter()
                    .fold(0.0_f64, |m, v| m.max(v.abs()))
            };
            per_eps.push([
                sup("mass").sqrt(),
                sup("h1"),
                sup("h2"),
                sup("l2_alpha"),
                abs_sup("energy"),
            ]);
        }
        SampleOutcome {
            report: SampleReport {
                index: sample,
                status: "finished".to_string(),
                noise_hash: hash,
            },
            payload: Some(per_eps),
        }
    });

    let surviving: Vec<&Vec<[f64; 5]>> =
        outcomes.iter().filter_map(|o| o.payload.as_ref()).collect();
    let mut columns = vec!["epsilon".to_string(), "order".to_string()];
    for ch in SWEEP_CHANNELS {
        columns.push(format!("{ch}_p_mean"));
        columns.push(format!("{ch}_p_se"));
    }
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    // Fit points for order 2, one series per channel.
    let mut fit_points: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); SWEEP_CHANNELS.len()];
    for (j, &eps) in spec.eps_ladder.iter().enumerate() {
        for &p in &spec.moment_orders {
            let mut row = vec![cell(eps), p.to_string()];
            for (c, _) in SWEEP_CHANNELS.iter().enumerate() {
                let vals: Vec<f64> = surviving
                    .iter()
                    .map(|s| s[j][c].powi(p as i32))
                    .collect();
                let (mean, se) = mean_se(&vals);
                row.push(cell(mean));
                row.push(cell(se));
                if p == 2 {
                    fit_points[c].push((eps, mean, se));
                }
            }
            table.push(row);
        }
    }
    record.tables.insert("moments".to_string(), table);
    for (c, ch) in SWEEP_CHANNELS.iter().enumerate() {
        let pts = &fit_points[c];
        if pts.len() >= 3 && pts.iter().all(|p| p.1 > 0.0) {
            if let Ok(fit) = fit_loglog_slope(pts) {
                record.fits.insert(format!("{ch}_vs_eps"), fit.into());
            }
        }
    }
    record.samples = outcomes.into_iter().map(|o| o.report).collect();
    record.account(spec.n_samples);
    Ok(())
}

// ---------------------------------------------------------------------------
// massdrift
// ---------------------------------------------------------------------------

struct ComboDrift {
    finished: bool,
    max_rel: f64,
    final_rel: f64,
}

/// Mass-conservation audit: integrates the configured equation and noise
/// case under every time scheme the case admits, tracking the worst and
/// terminal relative mass deviation of each path.  The per-sample status
/// accounting follows the *configured* scheme; the other schemes only
/// contribute table rows.
fn run_mass_drift(
    spec: &ExperimentSpec,
    workers: usize,
    record: &mut RunRecord,
) -> Result<(), ConfigError> {
    let eq = spec.base_equation()?;
    let schemes = [
        ("split_step", Scheme::SplitStep),
        ("exp_euler", Scheme::ExpEuler),
        ("midpoint", Scheme::StratonovichMidpoint),
    ];
    let mut combos: Vec<(&'static str, Solver)> = Vec::new();
    for (label, scheme) in schemes {
        let mut cfg = spec.solver;
        cfg.scheme = scheme;
        let model = QWienerModel::new(spec.noise, spec.grid)
            .map_err(|e| ConfigError::Domain(e.to_string()))?;
        // A scheme the noise case does not admit is skipped, not an error;
        // the configured combination was already validated at parse time.
        if let Ok(solver) = Solver::new(eq, model, cfg) {
            combos.push((label, solver));
        }
    }
    let configured = match spec.solver.scheme {
        Scheme::SplitStep => "split_step",
        Scheme::ExpEuler => "exp_euler",
        Scheme::StratonovichMidpoint => "midpoint",
    };
    let case_word = match spec.noise.case {
        slogs_noise::NoiseCase::AdditiveComplex => "additive",
        slogs_noise::NoiseCase::MultiplicativeComplex => "multiplicative",
        slogs_noise::NoiseCase::MultiplicativeReal => "conservative",
    };
    let model = build_base_model(spec);
    let u0 = spec.initial_field();
    let steps = combos[0].1.steps();
    let dt = spec.solver.dt;

    let outcomes = par_samples(workers, spec.n_samples, |sample| {
        let mut drifts: Vec<ComboDrift> = Vec::with_capacity(combos.len());
        let mut configured_status = PathStatus::Finished;
        for (label, solver) in &combos {
            let mut m0 = f64::NAN;
            let mut max_rel = 0.0_f64;
            let mut final_rel = f64::NAN;
            let end = solver
                .evolve(&u0, sample, |st| {
                    if !matches!(st.status, PathStatus::Running | PathStatus::Finished) {
                        return;
                    }
                    if st.step_index == 0 {
                        m0 = st.norms.l2_sq;
                    }
                    let rel = (st.norms.l2_sq - m0).abs() / m0;
                    max_rel = max_rel.max(rel);
                    final_rel = rel;
                })
                .expect("initial state was validated at configuration time");
            if *label == configured {
                configured_status = end.status;
            }
            drifts.push(ComboDrift {
                finished: end.status == PathStatus::Finished,
                max_rel,
                final_rel,
            });
        }
        SampleOutcome {
            report: SampleReport {
                index: sample,
                status: status_word(configured_status).to_string(),
                noise_hash: noise_fingerprint(&model, dt, steps, sample),
            },
            payload: Some(drifts),
        }
    });

    let mut table = Table::new(&[
        "scheme",
        "case",
        "paths_finished",
        "max_rel_drift",
        "mean_final_drift",
        "final_drift_se",
    ]);
    for (c, (label, _)) in combos.iter().enumerate() {
        let finished: Vec<&ComboDrift> = outcomes
            .iter()
            .filter_map(|o| o.payload.as_ref())
            .map(|d| &d[c])
            .filter(|d| d.finished)
            .collect();
        let max_rel = finished.iter().fold(f64::NAN, |m, d| {
            if m.is_nan() {
                d.max_rel
            } else {
                m.max(d.max_rel)
            }
        });
        let finals: Vec<f64> = finished.iter().map(|d| d.final_rel).collect();
        let (mean, se) = mean_se(&finals);
        table.push(vec![
            label.to_string(),
            case_word.to_string(),
            finished.len().to_string(),
            cell(max_rel),
            cell(mean),
            cell(se),
        ]);
    }
    record.tables.insert("drift".to_string(), table);
    record.samples = outcomes.into_iter().map(|o| o.report).collect();
    record.account(spec.n_samples);
    Ok(())
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

/// Batch sizes of the analytic check suites; fixed so the margins table is
/// a deterministic function of the master seed alone.
const CHECK_PAIRS: usize = 100_000;
const CHECK_FIELDS: usize = 10_000;

/// Measures the worst-case margins of every analytic inequality on fresh
/// random batches (pair bounds, coefficient conditions, weighted
/// interpolation) and tabulates them; no paths are integrated.
fn run_inequality_check(spec: &ExperimentSpec, record: &mut RunRecord) {
    let seed = spec.noise.master_seed;
    let mut rows = checks::regularization_margins(CHECK_PAIRS, seed);
    rows.extend(checks::g_catalog_margins(CHECK_PAIRS, seed ^ 0x9e37_79b9));
    rows.extend(checks::interpolation_margins(CHECK_FIELDS, seed ^ 0x5105_0e5b));

    let mut table = Table::new(&["suite", "label", "worst", "bound", "ratio", "holds"]);
    for r in &rows {
        table.push(vec![
            r.suite.to_string(),
            r.label.clone(),
            cell(r.worst),
            cell(r.bound),
            cell(r.ratio()),
            r.holds().to_string(),
        ]);
    }
    record.tables.insert("margins".to_string(), table);
    record.samples = Vec::new();
    record.account(0);
    // A violated inequality is a failed experiment even though no paths run.
    record.invalid = record.invalid || rows.iter().any(|r| !r.holds());
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{load, ExperimentKind};

    const FAST_BASE: &str = "
        grid.points = 64
        solver.dt = 1e-3
        solver.t_end = 0.02
        exp.samples = 3
        noise.kmax = 4
    ";

    fn errs_column(record: &RunRecord) -> Vec<f64> {
        record.tables["errors"]
            .rows
            .iter()
            .map(|r| r[1].parse::<f64>().unwrap())
            .collect()
    }

    #[test]
    fn coupled_ladder_at_reference_epsilon_gives_exactly_zero_error() {
        let text = format!("{FAST_BASE}\nexp.eps_ladder = 1e-2\nexp.eps_reference = 1e-4");
        let mut spec = load(ExperimentKind::EpsConvergence, &text).unwrap();
        // Force the reference onto the ladder value: identical equations on
        // identical Wiener paths must agree bitwise.
        spec.eps_reference = Some(1e-2);
        let record = run(&spec, 2).unwrap();
        assert_eq!(record.completed, 3);
        assert!(errs_column(&record).iter().all(|&e| e == 0.0));
    }

    #[test]
    fn zero_lambda_decouples_the_error_from_epsilon() {
        let text = format!(
            "{FAST_BASE}\neq.lambda = 0.0\nexp.eps_ladder = 1e-1, 1e-2\nexp.eps_reference = 1e-4"
        );
        let spec = load(ExperimentKind::EpsConvergence, &text).unwrap();
        let record = run(&spec, 2).unwrap();
        assert!(errs_column(&record).iter().all(|&e| e == 0.0));
        // No fit: the error is identically zero.
        assert!(record.fits.is_empty());
    }

    #[test]
    fn worker_count_does_not_change_any_output() {
        let text = format!(
            "{FAST_BASE}\nexp.eps_ladder = 1e-1, 3e-2, 1e-2\nexp.eps_reference = 1e-3"
        );
        let spec = load(ExperimentKind::EpsConvergence, &text).unwrap();
        let a = run(&spec, 1).unwrap();
        let b = run(&spec, 4).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_eq!(a.tables, b.tables);
        // Manifests agree except for the wall-clock bracket, the single
        // nondeterministic field.
        let strip = |r: &RunRecord| {
            let mut v: serde_json::Value = serde_json::from_str(&r.manifest_json()).unwrap();
            v["manifest"].as_object_mut().unwrap().remove("timestamps");
            v
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn conservative_split_step_keeps_mass_to_round_off() {
        let text = "
            grid.points = 64
            solver.dt = 1e-3
            solver.t_end = 0.2
            exp.samples = 2
            noise.kmax = 4
        ";
        let spec = load(ExperimentKind::MassDrift, text).unwrap();
        let record = run(&spec, 2).unwrap();
        let drift = &record.tables["drift"];
        let row = drift
            .rows
            .iter()
            .find(|r| r[0] == "split_step")
            .expect("configured scheme is always a row");
        assert_eq!(row[2], "2", "both paths finish");
        let max_rel: f64 = row[3].parse().unwrap();
        assert!(max_rel <= 1e-10, "max relative drift {max_rel}");
    }

    #[test]
    fn single_run_records_series_and_summary() {
        let spec = load(ExperimentKind::SingleRun, FAST_BASE).unwrap();
        let record = run(&spec, 2).unwrap();
        assert!(record.tables.contains_key("summary"));
        assert_eq!(record.tables["summary"].rows.len(), 3);
        // 20 steps, stride 10 → rows at steps 0, 10, 20.
        assert_eq!(record.tables["series_000"].rows.len(), 3);
        assert_eq!(record.samples.len(), 3);
        assert!(record.samples.iter().all(|s| s.status == "finished"));
    }

    #[test]
    fn hoelder_moments_grow_with_the_lag() {
        let text = "
            grid.points = 64
            solver.dt = 1e-3
            solver.t_end = 0.2
            exp.samples = 4
            noise.case = additive
            noise.kmax = 4
            exp.hoelder_lags = 1e-2, 4e-2
        ";
        let spec = load(ExperimentKind::TemporalHoelder, text).unwrap();
        let record = run(&spec, 2).unwrap();
        let rows = &record.tables["moments"].rows;
        assert_eq!(rows.len(), 2);
        let m1: f64 = rows[0][1].parse().unwrap();
        let m2: f64 = rows[1][1].parse().unwrap();
        assert!(m1 > 0.0 && m2 > m1, "moments {m1} {m2}");
    }

    #[test]
    fn check_run_tabulates_margins_without_paths() {
        let spec = load(ExperimentKind::InequalityCheck, "exp.samples = 1").unwrap();
        // Tiny batches for speed: call the aggregation directly.
        let mut record = run_check_record(&spec);
        run_inequality_check_scaled(&spec, &mut record, 500, 50);
        assert!(!record.invalid);
        let margins = &record.tables["margins"];
        assert!(margins.rows.iter().all(|r| r[5] == "true"));
        assert!(margins.rows.len() >= 20);
    }

    fn run_check_record(spec: &ExperimentSpec) -> RunRecord {
        RunRecord {
            manifest: Manifest {
                experiment: spec.kind.name().to_string(),
                version: "test".into(),
                master_seed: spec.noise.master_seed,
                config: spec.snapshot.clone(),
                timestamps: Timestamps {
                    started_unix_s: 0,
                    finished_unix_s: 0,
                },
            },
            samples: Vec::new(),
            completed: 0,
            excluded: 0,
            invalid: false,
            fits: BTreeMap::new(),
            tables: BTreeMap::new(),
        }
    }

    fn run_inequality_check_scaled(
        spec: &ExperimentSpec,
        record: &mut RunRecord,
        pairs: usize,
        fields: usize,
    ) {
        let seed = spec.noise.master_seed;
        let mut rows = checks::regularization_margins(pairs, seed);
        rows.extend(checks::g_catalog_margins(pairs, seed ^ 1));
        rows.extend(checks::interpolation_margins(fields, seed ^ 2));
        let mut table = Table::new(&["suite", "label", "worst", "bound", "ratio", "holds"]);
        for r in &rows {
            table.push(vec![
                r.suite.to_string(),
                r.label.clone(),
                cell(r.worst),
                cell(r.bound),
                cell(r.ratio()),
                r.holds().to_string(),
            ]);
        }
        record.tables.insert("margins".to_string(), table);
        record.account(0);
        record.invalid = record.invalid || rows.iter().any(|r| !r.holds());
    }
}
