//! Flat `key = value` experiment configuration.
//!
//! The format is a plain text file of dotted keys:
//!
//! ```text
//! # comment
//! grid.points = 256
//! eq.lambda   = -1.0
//! exp.eps_ladder = 1e-1, 3e-2, 1e-2
//! ```
//!
//! Parsing is fail-fast: syntax errors, duplicate keys, missing required
//! keys, values out of range, and — deliberately — *unknown* keys are all
//! hard errors, so a typo cannot silently fall back to a default.  The full
//! key list lives in the repository README; the resolved map (defaults
//! filled in) is snapshotted into every run manifest so an output directory
//! always records exactly what produced it.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_complex::Complex64;
use slogs_field_core::{Boundary, ComplexField, Grid};
use slogs_noise::{GKind, NoiseCase, NoiseSpec, SpectrumSpec};
use slogs_regularization::{EquationSpec, RegFamily, RegKind};
use slogs_solver::{Scheme, Solver, SolverConfig, TruncationNorm};
use thiserror::Error;

/// Anything that makes a configuration unusable; the CLI maps every variant
/// to exit code 1.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Unreadable(String),
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("unknown keys: {0}")]
    UnknownKeys(String),
    #[error("missing required key `{0}`")]
    MissingKey(String),
    #[error("key `{key}`: cannot parse `{value}` as {expected}")]
    BadValue {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("key `{key}`: {why}")]
    OutOfRange { key: String, why: String },
    #[error("configuration rejected: {0}")]
    Domain(String),
}

/// Which experiment a run drives; selected by the CLI subcommand, never by
/// the config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    SingleRun,
    EpsConvergence,
    TemporalHoelder,
    MomentSweep,
    MassDrift,
    InequalityCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SingleRun => "simulate",
            ExperimentKind::EpsConvergence => "converge",
            ExperimentKind::TemporalHoelder => "hoelder",
            ExperimentKind::MomentSweep => "momentsweep",
            ExperimentKind::MassDrift => "massdrift",
            ExperimentKind::InequalityCheck => "check",
        }
    }
}

/// Initial-datum catalog, all smooth on the torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitKind {
    /// `A·exp(−|x|²/(2w²))` (radial in 2-d).
    Gaussian,
    /// Gaussian envelope times the plane phase `e^{i v x₀}`.
    Packet,
    /// `A·e^{i m κ₁ x₀}` with the integer mode `m = round(v)`.
    Plane,
    /// The constant `A`.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitSpec {
    pub kind: InitKind,
    pub amplitude: f64,
    pub width: f64,
    pub velocity: f64,
}

impl InitSpec {
    /// Materializes the initial field on `grid` (box-centered coordinates).
    pub fn field(&self, grid: Grid) -> ComplexField {
        let a = self.amplitude;
        let w = self.width;
        let v = self.velocity;
        let kappa1 = std::f64::consts::TAU / grid.extent();
        match self.kind {
            InitKind::Gaussian => ComplexField::from_fn(grid, |x| {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                Complex64::new(a * (-r2 / (2.0 * w * w)).exp(), 0.0)
            }),
            InitKind::Packet => ComplexField::from_fn(grid, |x| {
                let r2: f64 = x.iter().map(|c| c * c).sum();
                Complex64::from_polar(a * (-r2 / (2.0 * w * w)).exp(), v * x[0])
            }),
            InitKind::Plane => {
                let m = v.round();
                ComplexField::from_fn(grid, |x| Complex64::from_polar(a, m * kappa1 * x[0]))
            }
            InitKind::Constant => ComplexField::from_fn(grid, |_| Complex64::new(a, 0.0)),
        }
    }
}

/// A fully resolved experiment: physics, numerics, Monte Carlo plan, and the
/// flat config snapshot that reproduces it.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub grid: Grid,
    pub lambda: f64,
    pub reg_family: RegFamily,
    /// `eq.epsilon`; `None` only for the exact (unregularized) family.
    pub base_epsilon: Option<f64>,
    pub noise: NoiseSpec,
    pub solver: SolverConfig,
    pub init: InitSpec,
    pub n_samples: usize,
    /// Strictly decreasing, entries in (0, 1).
    pub eps_ladder: Vec<f64>,
    /// Present for convergence runs; `< min(eps_ladder)`.
    pub eps_reference: Option<f64>,
    pub hoelder_lags: Vec<f64>,
    /// Even moment orders tracked by the sweep (default `{2}`).
    pub moment_orders: Vec<u32>,
    /// Observable sampling stride in steps.
    pub stride: u64,
    /// Weight exponent of the `l2_alpha` channel.
    pub alpha: f64,
    /// The resolved `key = value` map, defaults included.
    pub snapshot: BTreeMap<String, String>,
}

impl ExperimentSpec {
    pub fn from_file(kind: ExperimentKind, path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Unreadable(format!("{}: {e}", path.display())))?;
        load(kind, &text)
    }

    /// Replaces the master seed (the `--seed` CLI override), keeping the
    /// snapshot in step.
    pub fn override_seed(&mut self, seed: u64) {
        self.noise.master_seed = seed;
        self.snapshot
            .insert("noise.seed".to_string(), seed.to_string());
    }

    /// The regularization at `eps`, in this experiment's family.
    pub fn reg_at(&self, eps: f64) -> Result<RegKind, ConfigError> {
        RegKind::new(self.reg_family, eps)
            .map_err(|e| ConfigError::Domain(format!("ε = {eps}: {e}")))
    }

    /// The base equation (at `eq.epsilon`).
    pub fn base_equation(&self) -> Result<EquationSpec, ConfigError> {
        let reg = match (self.reg_family, self.base_epsilon) {
            (RegFamily::Exact, _) => RegKind::exact(),
            (_, Some(eps)) => self.reg_at(eps)?,
            (_, None) => unreachable!("assembly requires eq.epsilon for regularized families"),
        };
        EquationSpec::new(self.lambda, reg).map_err(|e| ConfigError::Domain(e.to_string()))
    }

    /// Builds a solver for the given equation with this experiment's noise
    /// and integrator configuration.
    pub fn build_solver(&self, eq: EquationSpec) -> Result<Solver, ConfigError> {
        let model = slogs_noise::QWienerModel::new(self.noise, self.grid)
            .map_err(|e| ConfigError::Domain(e.to_string()))?;
        Solver::new(eq, model, self.solver).map_err(|e| ConfigError::Domain(e.to_string()))
    }

    pub fn initial_field(&self) -> ComplexField {
        self.init.field(self.grid)
    }

    pub fn steps(&self) -> u64 {
        (self.solver.t_end / self.solver.dt).round() as u64
    }
}

// ---------------------------------------------------------------------------
// Raw parsing
// ---------------------------------------------------------------------------

struct RawMap {
    entries: BTreeMap<String, String>,
    used: BTreeSet<String>,
    resolved: BTreeMap<String, String>,
}

impl RawMap {
    fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.trim().to_string(),
                });
            };
            let key = k.trim().to_string();
            let value = v.trim().to_string();
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    line: i + 1,
                    text: raw.trim().to_string(),
                });
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(ConfigError::DuplicateKey(key));
            }
        }
        Ok(RawMap {
            entries,
            used: BTreeSet::new(),
            resolved: BTreeMap::new(),
        })
    }

    fn raw(&mut self, key: &str) -> Option<String> {
        let hit = self.entries.get(key).cloned();
        if let Some(v) = &hit {
            self.used.insert(key.to_string());
            self.resolved.insert(key.to_string(), v.clone());
        }
        hit
    }

    fn record_default(&mut self, key: &str, value: impl ToString) {
        self.resolved
            .entry(key.to_string())
            .or_insert_with(|| value.to_string());
    }

    fn parse_with<T>(
        &mut self,
        key: &str,
        expected: &'static str,
        f: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => f(&v).map(Some).ok_or_else(|| ConfigError::BadValue {
                key: key.to_string(),
                value: v,
                expected,
            }),
        }
    }

    fn f64_opt(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parse_with(key, "a real number", |v| {
            v.parse::<f64>().ok().filter(|x| x.is_finite())
        })
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let got = self.f64_opt(key)?.unwrap_or(default);
        self.record_default(key, got);
        Ok(got)
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let got = self
            .parse_with(key, "a nonnegative integer", |v| v.parse::<usize>().ok())?
            .unwrap_or(default);
        self.record_default(key, got);
        Ok(got)
    }

    fn u64_or(&mut self, key: &str, default: u64) -> Result<u64, ConfigError> {
        let got = self
            .parse_with(key, "a nonnegative integer", |v| v.parse::<u64>().ok())?
            .unwrap_or(default);
        self.record_default(key, got);
        Ok(got)
    }

    fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        let got = self
            .parse_with(key, "true or false", |v| match v {
                "true" => Some(true),
                "false" => Some(false),
                _ => None,
            })?
            .unwrap_or(default);
        self.record_default(key, got);
        Ok(got)
    }

    fn word_or(&mut self, key: &str, default: &str) -> Result<String, ConfigError> {
        let got = self.raw(key).unwrap_or_else(|| default.to_string());
        self.record_default(key, &got);
        Ok(got)
    }

    fn f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.parse_with(key, "a comma-separated list of reals", |v| {
            let parsed: Option<Vec<f64>> = v
                .split(',')
                .map(|p| p.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect();
            parsed.filter(|l| !l.is_empty())
        })
    }

    fn finish(self) -> Result<(), ConfigError> {
        let unknown: Vec<String> = self
            .entries
            .keys()
            .filter(|k| !self.used.contains(*k))
            .cloned()
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::UnknownKeys(unknown.join(", ")))
        }
    }
}

fn range_err(key: &str, why: impl Into<String>) -> ConfigError {
    ConfigError::OutOfRange {
        key: key.to_string(),
        why: why.into(),
    }
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

fn assemble(kind: ExperimentKind, map: &mut RawMap) -> Result<ExperimentSpec, ConfigError> {
    // -- grid -------------------------------------------------------------
    let dim = map.usize_or("grid.dim", 1)?;
    let extent = map.f64_or("grid.extent", std::f64::consts::TAU)?;
    let points = map.usize_or("grid.points", 256)?;
    let boundary = match map.word_or("grid.boundary", "torus")?.as_str() {
        "torus" => Boundary::PeriodicTorus,
        "dirichlet" => Boundary::HomogeneousDirichlet,
        other => {
            return Err(ConfigError::BadValue {
                key: "grid.boundary".into(),
                value: other.into(),
                expected: "torus | dirichlet",
            })
        }
    };
    let grid =
        Grid::new(dim, extent, points, boundary).map_err(|e| ConfigError::Domain(e.to_string()))?;

    // -- equation -----------------------------------------------------------
    let lambda = map.f64_or("eq.lambda", -1.0)?;
    let reg_word = map.word_or("eq.reg", "log_shift")?;
    let reg_family = match reg_word.as_str() {
        "log_shift" => RegFamily::LogShift,
        "log_rational" => RegFamily::LogRational,
        "exact" => RegFamily::Exact,
        other => {
            return Err(ConfigError::BadValue {
                key: "eq.reg".into(),
                value: other.into(),
                expected: "log_shift | log_rational | exact",
            })
        }
    };
    let base_epsilon = if reg_family == RegFamily::Exact {
        None
    } else {
        Some(map.f64_or("eq.epsilon", 1e-3)?)
    };

    // -- noise --------------------------------------------------------------
    let case = match map.word_or("noise.case", "conservative")?.as_str() {
        "additive" => NoiseCase::AdditiveComplex,
        "multiplicative" => NoiseCase::MultiplicativeComplex,
        "conservative" => NoiseCase::MultiplicativeReal,
        other => {
            return Err(ConfigError::BadValue {
                key: "noise.case".into(),
                value: other.into(),
                expected: "additive | multiplicative | conservative",
            })
        }
    };
    let decay = map.f64_or("noise.decay", 3.0)?;
    let amplitude = map.f64_or("noise.amplitude", 0.5)?;
    let k_max = map.usize_or("noise.kmax", 8)?;
    let g_word = map.word_or(
        "noise.g",
        if case == NoiseCase::AdditiveComplex {
            "one"
        } else {
            "rational"
        },
    )?;
    let g = if g_word == "one" {
        GKind::One
    } else {
        let c = map.f64_or("noise.g_param", 1.0)?;
        match g_word.as_str() {
            "inverse_shift" => GKind::InverseShift { c },
            "rational" => GKind::Rational { c },
            "rational_sq" => GKind::RationalSq { c },
            "log_rational" => GKind::LogRationalG { c },
            "super_log" => GKind::SuperLog { c },
            other => {
                return Err(ConfigError::BadValue {
                    key: "noise.g".into(),
                    value: other.into(),
                    expected:
                        "one | inverse_shift | rational | rational_sq | log_rational | super_log",
                })
            }
        }
    };
    let master_seed = map.u64_or("noise.seed", 42)?;
    let noise = NoiseSpec {
        case,
        spectrum: SpectrumSpec {
            decay_exponent: decay,
            amplitude,
            k_max,
        },
        g,
        master_seed,
    };
    noise
        .validate_for(&grid)
        .map_err(|e| ConfigError::Domain(e.to_string()))?;

    // -- solver ---------------------------------------------------------------
    let scheme = match map.word_or("solver.scheme", "split_step")?.as_str() {
        "exp_euler" => Scheme::ExpEuler,
        "split_step" => Scheme::SplitStep,
        "midpoint" => Scheme::StratonovichMidpoint,
        other => {
            return Err(ConfigError::BadValue {
                key: "solver.scheme".into(),
                value: other.into(),
                expected: "exp_euler | split_step | midpoint",
            })
        }
    };
    let dt = map.f64_or("solver.dt", 2.5e-4)?;
    let t_end = map.f64_or("solver.t_end", 1.0)?;
    let mut solver = SolverConfig::new(scheme, dt, t_end);
    solver.truncation_radius = map.f64_opt("solver.truncation_radius")?;
    if let Some(r) = solver.truncation_radius {
        map.record_default("solver.truncation_radius", r);
    }
    solver.truncation_norm = match map.word_or("solver.truncation_norm", "h2")?.as_str() {
        "h1" => TruncationNorm::H1,
        "h2" => TruncationNorm::H2,
        other => {
            return Err(ConfigError::BadValue {
                key: "solver.truncation_norm".into(),
                value: other.into(),
                expected: "h1 | h2",
            })
        }
    };
    solver.dealias = map.bool_or("solver.dealias", true)?;
    solver.blowup_threshold = map.f64_or("solver.blowup_threshold", 1e12)?;

    // -- initial datum ----------------------------------------------------------
    let init_kind = match map.word_or("init.kind", "gaussian")?.as_str() {
        "gaussian" => InitKind::Gaussian,
        "packet" => InitKind::Packet,
        "plane" => InitKind::Plane,
        "constant" => InitKind::Constant,
        other => {
            return Err(ConfigError::BadValue {
                key: "init.kind".into(),
                value: other.into(),
                expected: "gaussian | packet | plane | constant",
            })
        }
    };
    let init = InitSpec {
        kind: init_kind,
        amplitude: map.f64_or("init.amplitude", 1.0)?,
        width: map.f64_or("init.width", 1.0)?,
        velocity: map.f64_or("init.velocity", 0.0)?,
    };
    if init.width <= 0.0 {
        return Err(range_err("init.width", "width must be positive"));
    }

    // -- experiment plan -----------------------------------------------------
    let n_samples = map.usize_or("exp.samples", 64)?;
    if n_samples == 0 {
        return Err(range_err("exp.samples", "need at least one sample"));
    }
    let eps_ladder = map.f64_list("exp.eps_ladder")?.unwrap_or_default();
    if !eps_ladder.is_empty() {
        map.record_default(
            "exp.eps_ladder",
            eps_ladder
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        for pair in eps_ladder.windows(2) {
            if pair[1] >= pair[0] {
                return Err(range_err("exp.eps_ladder", "must be strictly decreasing"));
            }
        }
        if eps_ladder.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(range_err("exp.eps_ladder", "entries must lie in (0, 1)"));
        }
    }
    let eps_reference = map.f64_opt("exp.eps_reference")?;
    if let Some(r) = eps_reference {
        map.record_default("exp.eps_reference", r);
        if !(r > 0.0 && r < 1.0) {
            return Err(range_err("exp.eps_reference", "must lie in (0, 1)"));
        }
        if let Some(min) = eps_ladder.last() {
            if r >= *min {
                return Err(range_err(
                    "exp.eps_reference",
                    format!("must be smaller than the whole ladder (min {min})"),
                ));
            }
        }
    }
    let hoelder_lags = map.f64_list("exp.hoelder_lags")?.unwrap_or_default();
    if !hoelder_lags.is_empty() {
        map.record_default(
            "exp.hoelder_lags",
            hoelder_lags
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        for &lag in &hoelder_lags {
            if lag < 10.0 * dt {
                return Err(range_err(
                    "exp.hoelder_lags",
                    format!("lag {lag} is below 10·dt = {}", 10.0 * dt),
                ));
            }
            if lag >= t_end {
                return Err(range_err(
                    "exp.hoelder_lags",
                    format!("lag {lag} does not fit in the horizon {t_end}"),
                ));
            }
        }
    }
    let moment_orders: Vec<u32> = map
        .parse_with("exp.moment_orders", "comma-separated even integers", |v| {
            let parsed: Option<Vec<u32>> =
                v.split(',').map(|p| p.trim().parse::<u32>().ok()).collect();
            parsed.filter(|l| !l.is_empty())
        })?
        .unwrap_or_else(|| vec![2]);
    map.record_default(
        "exp.moment_orders",
        moment_orders
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    if moment_orders.iter().any(|&p| p == 0 || p % 2 != 0) {
        return Err(range_err(
            "exp.moment_orders",
            "orders must be positive even integers",
        ));
    }
    let stride = map.u64_or("exp.stride", 10)?;
    if stride == 0 {
        return Err(range_err("exp.stride", "stride must be at least 1"));
    }
    let alpha = map.f64_or("exp.alpha", 1.0)?;
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(range_err("exp.alpha", "α must lie in (0, 2]"));
    }

    // Per-kind requirements, checked now so a bad pairing of subcommand and
    // file fails before any work starts.
    match kind {
        ExperimentKind::EpsConvergence => {
            if eps_ladder.is_empty() {
                return Err(ConfigError::MissingKey("exp.eps_ladder".into()));
            }
            if eps_reference.is_none() {
                return Err(ConfigError::MissingKey("exp.eps_reference".into()));
            }
            if reg_family == RegFamily::Exact {
                return Err(ConfigError::Domain(
                    "convergence studies need an ε-parameterized family (eq.reg ≠ exact)".into(),
                ));
            }
        }
        ExperimentKind::MomentSweep => {
            if eps_ladder.is_empty() {
                return Err(ConfigError::MissingKey("exp.eps_ladder".into()));
            }
            if reg_family == RegFamily::Exact {
                return Err(ConfigError::Domain(
                    "moment sweeps need an ε-parameterized family (eq.reg ≠ exact)".into(),
                ));
            }
        }
        ExperimentKind::TemporalHoelder => {
            if hoelder_lags.is_empty() {
                return Err(ConfigError::MissingKey("exp.hoelder_lags".into()));
            }
        }
        _ => {}
    }

    let spec = ExperimentSpec {
        kind,
        grid,
        lambda,
        reg_family,
        base_epsilon,
        noise,
        solver,
        init,
        n_samples,
        eps_ladder,
        eps_reference,
        hoelder_lags,
        moment_orders,
        stride,
        alpha,
        snapshot: BTreeMap::new(),
    };

    // Probe-build a solver with the base equation so integrator-level
    // rejections (non-commensurate horizon, scheme/noise mismatch, …)
    // surface as config errors at parse time.
    let eq = spec.base_equation()?;
    spec.build_solver(eq)?;

    Ok(spec)
}

/// Parses and fully assembles, then freezes the resolved snapshot.
pub fn load(kind: ExperimentKind, text: &str) -> Result<ExperimentSpec, ConfigError> {
    let mut map = RawMap::parse(text)?;
    let mut spec = assemble(kind, &mut map)?;
    let resolved = map.resolved.clone();
    map.finish()?;
    spec.snapshot = resolved;
    Ok(spec)
}
