//! Acceptance gate: ten end-to-end criteria, each printing one
//! `ACCEPTANCE …: PASS/FAIL` line (visible with `--nocapture`) and failing
//! the build if its pinned tolerance or runtime budget is missed.
//!
//! Statistical criteria run the shipped example configs at desk scale
//! (d = 1, N = 256, T = 1, dt = 2.5e−4, 64 samples) with fixed seeds, so
//! every number here is reproducible bit-for-bit.

use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;
use slogs_experiments::{checks, runner, ExperimentKind, ExperimentSpec};
use slogs_field_core::{Boundary, ComplexField, Grid};
use slogs_noise::{GKind, NoiseCase, NoiseSpec, QWienerModel, SpectrumSpec};
use slogs_regularization::{EquationSpec, RegKind};
use slogs_solver::{PathStatus, Scheme, Solver, SolverConfig};

const TAU: f64 = std::f64::consts::TAU;

/// Prints the criterion's verdict line and enforces both the content check
/// and the runtime budget.
fn conclude(id: &str, label: &str, started: Instant, budget_s: u64, pass: bool, detail: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    let in_budget = elapsed <= budget_s as f64;
    let verdict = if pass && in_budget { "PASS" } else { "FAIL" };
    println!(
        "ACCEPTANCE {id} {label}: {verdict} ({detail}; {elapsed:.1}s of {budget_s}s budget)"
    );
    assert!(pass, "{id} {label}: {detail}");
    assert!(
        in_budget,
        "{id} {label}: runtime {elapsed:.1}s exceeds the {budget_s}s budget"
    );
}

fn shipped_config(kind: ExperimentKind, name: &str) -> ExperimentSpec {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    ExperimentSpec::from_file(kind, &path).expect("shipped config must load")
}

fn parse_cell(t: &slogs_experiments::Table, row: usize, col: usize) -> f64 {
    t.rows[row][col].parse().expect("numeric cell")
}

#[test]
fn criterion_01_regularization_property_suite() {
    let t0 = Instant::now();
    let rows = checks::regularization_margins(100_000, 2024);
    let worst = rows.iter().map(|r| r.ratio()).fold(0.0_f64, f64::max);
    let pass = rows.iter().all(|r| r.holds()) && rows.len() >= 16;
    conclude(
        "01",
        "regularization pair/uniform/derivative bounds",
        t0,
        10,
        pass,
        &format!("{} suites, worst ratio {worst:.6}", rows.len()),
    );
}

#[test]
fn criterion_02_diffusion_coefficient_suite() {
    let t0 = Instant::now();
    let rows = checks::g_catalog_margins(100_000, 7);
    let worst = rows.iter().map(|r| r.ratio()).fold(0.0_f64, f64::max);
    let pass = rows.iter().all(|r| r.holds()) && rows.len() == 8;
    conclude(
        "02",
        "diffusion-coefficient catalog conditions",
        t0,
        10,
        pass,
        &format!("4 families x 2 conditions, worst ratio {worst:.6}"),
    );
}

#[test]
fn criterion_03_mass_conservation_across_g_catalog() {
    let t0 = Instant::now();
    let grid = Grid::new(1, TAU, 256, Boundary::PeriodicTorus).unwrap();
    let eq = EquationSpec::new(-1.0, RegKind::log_shift(1e-3).unwrap()).unwrap();
    let u0 = ComplexField::from_fn(grid, |x| {
        Complex64::new((-0.5 * x[0] * x[0]).exp(), 0.0)
    });
    let kinds: [(&str, GKind); 6] = [
        ("one", GKind::One),
        ("inverse_shift", GKind::InverseShift { c: 1.0 }),
        ("rational", GKind::Rational { c: 1.0 }),
        ("rational_sq", GKind::RationalSq { c: 1.0 }),
        ("log_rational", GKind::LogRationalG { c: 0.5 }),
        ("super_log", GKind::SuperLog { c: 1.0 }),
    ];
    let mut worst_overall: f64 = 0.0;
    let mut pass = true;
    for (name, g) in kinds {
        let noise = NoiseSpec {
            case: NoiseCase::MultiplicativeReal,
            spectrum: SpectrumSpec {
                decay_exponent: 3.0,
                amplitude: 0.5,
                k_max: 8,
            },
            g,
            master_seed: 4242,
        };
        let model = QWienerModel::new(noise, grid).unwrap();
        // 10^4 steps per path at the desk-scale step.
        let solver = Solver::new(eq, model, SolverConfig::new(Scheme::SplitStep, 2.5e-4, 2.5))
            .unwrap();
        let mut worst: f64 = 0.0;
        for sample in 0..16 {
            let mut m0 = f64::NAN;
            let end = solver
                .evolve(&u0, sample, |st| {
                    if st.step_index == 0 {
                        m0 = st.norms.l2_sq;
                    }
                    if matches!(st.status, PathStatus::Running | PathStatus::Finished) {
                        worst = worst.max((st.norms.l2_sq - m0).abs() / m0);
                    }
                })
                .unwrap();
            pass &= end.status == PathStatus::Finished;
        }
        pass &= worst <= 1e-10;
        worst_overall = worst_overall.max(worst);
        assert!(
            worst <= 1e-10,
            "coefficient family `{name}`: relative mass drift {worst:.3e}"
        );
    }

    // The massdrift experiment driver must agree on its split-step row.
    let spec = shipped_config(ExperimentKind::MassDrift, "massdrift.cfg");
    let record = runner::run(&spec, 1).unwrap();
    let drift = &record.tables["drift"];
    let row = drift
        .rows
        .iter()
        .position(|r| r[0] == "split_step")
        .expect("split_step row");
    pass &= drift.rows[row][2] == "16";
    pass &= parse_cell(drift, row, 3) <= 1e-10;
    pass &= !record.invalid;

    conclude(
        "03",
        "conservative-noise mass preservation",
        t0,
        120,
        pass,
        &format!("worst relative drift {worst_overall:.3e} over 6 coefficient families x 16 paths x 10^4 steps"),
    );
}

#[test]
fn criterion_04_epsilon_strong_convergence_rate() {
    let t0 = Instant::now();
    let spec = shipped_config(ExperimentKind::EpsConvergence, "converge.cfg");
    let record = runner::run(&spec, 1).unwrap();
    let fit = record.fits.get("err_vs_eps").expect("convergence fit");

    let mut pass = record.completed == 64 && record.excluded == 0 && !record.invalid;
    pass &= (0.7..=1.3).contains(&fit.slope);
    pass &= fit.r_squared >= 0.95;

    // The mean error must not increase as ε decreases (3 SE slack).
    let errors = &record.tables["errors"];
    for w in 0..errors.rows.len() - 1 {
        let (m0, s0) = (parse_cell(errors, w, 1), parse_cell(errors, w, 2));
        let (m1, s1) = (parse_cell(errors, w + 1, 1), parse_cell(errors, w + 1, 2));
        pass &= m1 <= m0 + 3.0 * (s0 + s1);
    }

    conclude(
        "04",
        "strong convergence rate in the regularization parameter",
        t0,
        900,
        pass,
        &format!(
            "slope {:.3} (target [0.7, 1.3]), R^2 {:.4}",
            fit.slope, fit.r_squared
        ),
    );
}

#[test]
fn criterion_05_temporal_hoelder_exponent() {
    let t0 = Instant::now();
    let spec = shipped_config(ExperimentKind::TemporalHoelder, "hoelder.cfg");
    let record = runner::run(&spec, 1).unwrap();
    let fit = record.fits.get("moment_vs_lag").expect("lag fit");
    let pass = record.completed == 64
        && !record.invalid
        && (0.8..=1.2).contains(&fit.slope);
    conclude(
        "05",
        "temporal regularity exponent of mean-square increments",
        t0,
        600,
        pass,
        &format!("slope {:.3} (target [0.8, 1.2]), R^2 {:.4}", fit.slope, fit.r_squared),
    );
}

#[test]
fn criterion_06_uniform_moment_bounds() {
    let t0 = Instant::now();
    let spec = shipped_config(ExperimentKind::MomentSweep, "momentsweep.cfg");
    let record = runner::run(&spec, 1).unwrap();
    let moments = &record.tables["moments"];
    let mut pass = record.completed == 64 && !record.invalid;

    // Band checks: deviation from the ladder mean of E[(sup_t q)^2].
    let band = |col: usize, tol: f64| -> (bool, f64) {
        let vals: Vec<f64> = (0..moments.rows.len())
            .map(|r| parse_cell(moments, r, col))
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let dev = vals
            .iter()
            .map(|v| (v - mean).abs() / mean)
            .fold(0.0_f64, f64::max);
        (dev <= tol, dev)
    };
    let (h1_ok, h1_dev) = band(4, 0.20);
    let (eng_ok, eng_dev) = band(10, 0.30);
    pass &= h1_ok && eng_ok;

    let h2 = record.fits.get("h2_sup_vs_eps").expect("h2 fit");
    pass &= (-2.3..=0.0).contains(&h2.slope);

    conclude(
        "06",
        "uniform-in-epsilon moment bounds",
        t0,
        900,
        pass,
        &format!(
            "H1 band {:.1}% (<=20%), H2 slope {:.4} (target [-2.3, 0]), energy band {:.1}% (<=30%)",
            100.0 * h1_dev,
            h2.slope,
            100.0 * eng_dev
        ),
    );
}

#[test]
fn criterion_07_weighted_interpolation_inequality() {
    let t0 = Instant::now();
    let rows = checks::interpolation_margins(10_000, 77);
    let worst = rows.iter().map(|r| r.ratio()).fold(0.0_f64, f64::max);
    let pass = rows.len() == 2 && rows.iter().all(|r| r.holds());
    conclude(
        "07",
        "weighted interpolation inequality with derived constant",
        t0,
        30,
        pass,
        &format!("10^4 envelope fields x 2 parameter pairs, worst ratio {worst:.4}"),
    );
}

#[test]
fn criterion_08_deterministic_oracles() {
    let t0 = Instant::now();
    let reports = checks::selftest();
    let pass = reports.len() == 3 && reports.iter().all(|r| r.pass());
    let detail = reports
        .iter()
        .map(|r| format!("{} {:.2e} (tol {:.0e})", r.name, r.error, r.tol))
        .collect::<Vec<_>>()
        .join(", ");
    conclude("08", "deterministic solver oracles", t0, 60, pass, &detail);
}

#[test]
fn criterion_09_scheme_cross_validation() {
    let t0 = Instant::now();
    let grid = Grid::new(1, TAU, 256, Boundary::PeriodicTorus).unwrap();
    let eq = EquationSpec::new(-1.0, RegKind::log_shift(1e-3).unwrap()).unwrap();
    let noise = NoiseSpec {
        case: NoiseCase::MultiplicativeReal,
        spectrum: SpectrumSpec {
            decay_exponent: 3.0,
            amplitude: 0.5,
            k_max: 8,
        },
        g: GKind::Rational { c: 1.0 },
        master_seed: 99,
    };
    let u0 = ComplexField::from_fn(grid, |x| {
        Complex64::new((-0.5 * x[0] * x[0]).exp(), 0.0)
    });

    // Terminal gap between the drift-corrected Euler evolution and the
    // splitting evolution on one shared noise path.
    let gap = |dt: f64, sample: u64| -> f64 {
        let run = |scheme: Scheme| -> ComplexField {
            let model = QWienerModel::new(noise, grid).unwrap();
            let solver = Solver::new(eq, model, SolverConfig::new(scheme, dt, 1.0)).unwrap();
            let end = solver.evolve(&u0, sample, |_| {}).unwrap();
            assert_eq!(end.status, PathStatus::Finished);
            end.u
        };
        let a = run(Scheme::ExpEuler);
        let b = run(Scheme::SplitStep);
        let s: f64 = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        (grid.cell_volume() * s).sqrt()
    };

    let dt = 1e-3;
    let mut ratios = Vec::new();
    for sample in 0..8 {
        let coarse = gap(dt, sample);
        let fine = gap(dt / 2.0, sample);
        ratios.push(coarse / fine);
    }
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let pass = mean_ratio >= 1.7 && ratios.iter().all(|r| r.is_finite() && *r > 1.0);
    conclude(
        "09",
        "drift-correction cross-validation between integrators",
        t0,
        300,
        pass,
        &format!("gap shrink factor {mean_ratio:.3} on dt halving (target >= 1.7), 8 paths"),
    );
}

#[test]
fn criterion_10_reproducibility_across_worker_counts() {
    let t0 = Instant::now();
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("repro");
    std::fs::create_dir_all(&tmp).unwrap();
    let cfg_path = tmp.join("repro.cfg");
    std::fs::write(
        &cfg_path,
        "grid.points = 256\n\
         grid.extent = 12.0\n\
         eq.lambda = -0.5\n\
         eq.reg = log_rational\n\
         eq.epsilon = 1e-3\n\
         noise.case = conservative\n\
         noise.amplitude = 0.5\n\
         noise.kmax = 8\n\
         noise.seed = 31\n\
         solver.dt = 1e-3\n\
         solver.t_end = 0.25\n\
         exp.samples = 16\n\
         exp.eps_ladder = 1e-1, 3e-2, 1e-2\n\
         exp.eps_reference = 1e-4\n",
    )
    .unwrap();

    let bin = env!("CARGO_BIN_EXE_slogs");
    let run_with = |workers: &str, out: &str| -> PathBuf {
        let dir = tmp.join(out);
        let status = std::process::Command::new(bin)
            .args([
                "converge",
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                dir.to_str().unwrap(),
                "--workers",
                workers,
                "--quiet",
            ])
            .status()
            .expect("binary runs");
        assert!(status.success(), "exit status {status:?}");
        dir
    };
    let dir1 = run_with("1", "w1");
    let dir4 = run_with("4", "w4");

    let listing = |dir: &PathBuf| -> Vec<String> {
        let mut names: Vec<String> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        names
    };
    let names = listing(&dir1);
    let mut pass = names == listing(&dir4);
    pass &= names.contains(&"errors.csv".to_string());
    pass &= names.contains(&"fits.csv".to_string());
    for name in names.iter().filter(|n| n.ends_with(".csv")) {
        let a = std::fs::read(dir1.join(name)).unwrap();
        let b = std::fs::read(dir4.join(name)).unwrap();
        pass &= a == b;
    }
    // Manifests agree byte-for-byte after dropping the wall-clock block.
    let strip = |dir: &PathBuf| -> serde_json::Value {
        let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["manifest"]
            .as_object_mut()
            .unwrap()
            .remove("timestamps");
        v
    };
    pass &= strip(&dir1) == strip(&dir4);

    conclude(
        "10",
        "byte-identical outputs across worker counts",
        t0,
        120,
        pass,
        "CSV tables identical, manifests identical modulo timestamps, workers {1, 4}",
    );
}
