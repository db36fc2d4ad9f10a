//! Time integrators for the regularized stochastic logarithmic Schrödinger
//! equation
//!
//! ```text
//!     du = iΔu dt + iλ·f_ε(|u|²)·u dt + g̃(u)⋆dW(t),
//! ```
//!
//! driven in mild form: every scheme applies the free flight `S(t) = exp(itΔ)`
//! exactly through the spectral tables and differs only in how the
//! logarithmic drift and the noise enter.
//!
//! * [`Scheme::ExpEuler`] — exponential Euler on the Itô form.  The
//!   Stratonovich-type product is converted explicitly, so the step adds the
//!   Itô correction terms to the drift:
//!   `u_{n+1} = S(dt)[u_n + dt·Θ·(drift + correction) + Θ·diffusion(u_n, ΔW_n)]`.
//! * [`Scheme::SplitStep`] — Lie splitting.  The non-Laplacian part is a
//!   pointwise phase rotation whenever the noise coefficient is real
//!   (real multiplicative noise), so that substep is solved exactly:
//!   `u* = u_n·exp(i·Θ·(λ·f_ε(ρ)·dt + g(ρ)·ΔW_n))`, then `u_{n+1} = S(dt)u*`.
//!   It conserves the pointwise modulus — and hence the mass — to rounding.
//!   With additive noise the increment is added after the flight instead.
//!   Complex multiplicative noise is rejected: the phase substep would not be
//!   a modulus-preserving rotation, and the splitting would silently lose its
//!   exactness.
//! * [`Scheme::StratonovichMidpoint`] — an implicit midpoint rule that
//!   discretizes the Stratonovich product directly (no correction term),
//!   admissible for every noise case and the reference scheme for complex
//!   multiplicative noise.  The update solves
//!   `v = S(dt/2)u_n + ½·Θ·(dt·drift(v) + diffusion(v, ΔW_n))` by fixed-point
//!   iteration and reconstructs `u_{n+1} = 2·S(dt/2)v − S(dt)u_n`.
//!
//! Cross-validating ExpEuler (Itô semantics, explicit correction) against the
//! two Stratonovich-native schemes is itself a test of the ⋆-product
//! implementation: a wrong or missing correction term shows up as a
//! dt-independent bias between them.
//!
//! **Drift truncation.**  When a truncation radius `R` is configured, the
//! factor `Θ = θ_R(m)` multiplies the drift, the correction, and the noise
//! term (never the Laplacian), where `m` is the running maximum of the
//! configured Sobolev norm along the path — a path supremum, not an
//! instantaneous norm — and `θ_R` is one on the inner plateau, zero beyond
//! `2R`, and a smoothstep blend between.  Without a radius, `Θ ≡ 1` and the
//! trajectories are bitwise identical to the untruncated scheme.
//!
//! **Blow-up surrogate.**  After every step the H¹ norm is checked; a
//! non-finite value or an excursion above the configured threshold flips the
//! path status to [`PathStatus::BlowUp`] instead of panicking.  This is the
//! discrete stand-in for the dichotomy "the maximal existence time is
//! infinite or the H¹ norm diverges at it".
//!
//! **Dealiasing** applies to [`Scheme::ExpEuler`] only: its drift is a
//! pointwise product evaluated on the nodal grid, and the 2/3-rule mask keeps
//! the quadratic-and-higher aliases out of the retained band.  The other two
//! schemes rely on exact conservation properties of their substeps that a
//! spectral mask would destroy, so they ignore the flag.

use num_complex::Complex64;
use slogs_field_core::{ComplexField, SobolevNorms};
use slogs_noise::{NoiseCase, NoiseStream, QWienerModel};
use slogs_regularization::EquationSpec;
use thiserror::Error;

/// Errors raised while configuring or running an integrator.
#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("time step must be positive and finite (got {0})")]
    InvalidTimeStep(f64),
    #[error("horizon must be nonnegative and finite (got {0})")]
    InvalidHorizon(f64),
    #[error("horizon {t_end} is not an integer number of steps of {dt}")]
    NonCommensurate { t_end: f64, dt: f64 },
    #[error("truncation radius must be positive and finite (got {0})")]
    InvalidTruncationRadius(f64),
    #[error("truncation plateau must satisfy 0 < plateau < 2R (got plateau {plateau}, radius {radius})")]
    InvalidTruncationPlateau { plateau: f64, radius: f64 },
    #[error("midpoint tolerance must be positive (got {0})")]
    InvalidTolerance(f64),
    #[error("midpoint iteration cap must be at least 1")]
    InvalidIterationCap,
    #[error("blow-up threshold must be positive (got {0})")]
    InvalidBlowupThreshold(f64),
    #[error("split-step requires a pointwise-real noise rotation; complex multiplicative noise needs the midpoint scheme")]
    SplitStepNeedsRealRotation,
    #[error("initial state lives on a different grid than the noise model")]
    GridMismatch,
}

/// Available time integrators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExpEuler,
    SplitStep,
    StratonovichMidpoint,
}

/// Which Sobolev norm feeds the truncation factor's running maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncationNorm {
    H1,
    H2,
}

/// Life-cycle of one sample path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathStatus {
    Running,
    Finished,
    /// A non-finite value or an H¹ excursion above the threshold was detected.
    BlowUp,
    /// The midpoint fixed-point iteration did not contract within the cap.
    NoConvergence,
}

/// Integrator configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt: f64,
    /// Final time; must be an integer multiple of `dt` (zero is allowed and
    /// means "return the initial state").
    pub t_end: f64,
    /// Truncation radius `R`; `None` disables truncation (`Θ ≡ 1`).
    pub truncation_radius: Option<f64>,
    /// Inner plateau edge of `θ_R` (defaults to `R` itself when absent).
    pub truncation_plateau: Option<f64>,
    pub truncation_norm: TruncationNorm,
    /// Relative L² tolerance of the midpoint fixed-point iteration.
    pub midpoint_tol: f64,
    pub midpoint_max_iter: u32,
    /// 2/3-rule mask on the ExpEuler update (ignored by the other schemes).
    pub dealias: bool,
    /// H¹ level above which a path is declared blown up.
    pub blowup_threshold: f64,
    /// Testing hook: replace the free flight by the identity, isolating the
    /// pointwise substeps.
    pub disable_laplacian: bool,
}

impl SolverConfig {
    /// A configuration with documented defaults for everything but the
    /// scheme, step, and horizon.
    pub fn new(scheme: Scheme, dt: f64, t_end: f64) -> Self {
        SolverConfig {
            scheme,
            dt,
            t_end,
            truncation_radius: None,
            truncation_plateau: None,
            truncation_norm: TruncationNorm::H2,
            midpoint_tol: 1e-12,
            midpoint_max_iter: 50,
            dealias: true,
            blowup_threshold: 1e12,
            disable_laplacian: false,
        }
    }
}

/// The cutoff profile: one on `[0, plateau]`, zero on `[2·radius, ∞)`, and the
/// monotone C¹ smoothstep blend `1 − s²(3 − 2s)` between.
pub fn truncation_theta(m: f64, plateau: f64, radius: f64) -> f64 {
    let cutoff = 2.0 * radius;
    if m <= plateau {
        1.0
    } else if m >= cutoff {
        0.0
    } else {
        let s = (m - plateau) / (cutoff - plateau);
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

/// Complete per-path integration state.
#[derive(Debug, Clone)]
pub struct PathState {
    /// Current time `step_index·dt` (kept multiplicative to avoid drift).
    pub t: f64,
    pub u: ComplexField,
    pub step_index: u64,
    /// Which Monte Carlo path this is; with the master seed it addresses the
    /// noise stream of every step.
    pub sample_index: u64,
    pub status: PathStatus,
    /// Sobolev norms of the current state.
    pub norms: SobolevNorms,
    /// Running maximum of the truncation norm along the path history.
    pub running_norm_max: f64,
    /// Iterations the most recent midpoint solve needed (0 for other schemes).
    pub midpoint_iterations: u32,
}

/// One equation + noise + configuration bundle, ready to integrate paths.
pub struct Solver {
    eq: EquationSpec,
    noise: QWienerModel,
    cfg: SolverConfig,
    steps: u64,
}

impl Solver {
    pub fn new(
        eq: EquationSpec,
        noise: QWienerModel,
        cfg: SolverConfig,
    ) -> Result<Self, SolverError> {
        if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
            return Err(SolverError::InvalidTimeStep(cfg.dt));
        }
        if !(cfg.t_end >= 0.0 && cfg.t_end.is_finite()) {
            return Err(SolverError::InvalidHorizon(cfg.t_end));
        }
        let ratio = cfg.t_end / cfg.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(SolverError::NonCommensurate {
                t_end: cfg.t_end,
                dt: cfg.dt,
            });
        }
        if let Some(radius) = cfg.truncation_radius {
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(SolverError::InvalidTruncationRadius(radius));
            }
            let plateau = cfg.truncation_plateau.unwrap_or(radius);
            if !(plateau > 0.0 && plateau < 2.0 * radius) {
                return Err(SolverError::InvalidTruncationPlateau { plateau, radius });
            }
        }
        if !(cfg.midpoint_tol > 0.0 && cfg.midpoint_tol.is_finite()) {
            return Err(SolverError::InvalidTolerance(cfg.midpoint_tol));
        }
        if cfg.midpoint_max_iter == 0 {
            return Err(SolverError::InvalidIterationCap);
        }
        if !(cfg.blowup_threshold > 0.0) {
            return Err(SolverError::InvalidBlowupThreshold(cfg.blowup_threshold));
        }
        if cfg.scheme == Scheme::SplitStep && noise.case() == NoiseCase::MultiplicativeComplex {
            return Err(SolverError::SplitStepNeedsRealRotation);
        }
        Ok(Solver {
            eq,
            noise,
            cfg,
            steps: steps as u64,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn equation(&self) -> &EquationSpec {
        &self.eq
    }

    pub fn noise(&self) -> &QWienerModel {
        &self.noise
    }

    /// Number of steps the horizon decomposes into.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// The factor `Θ` for a given running maximum of the truncation norm.
    pub fn truncation_factor(&self, running_max: f64) -> f64 {
        match self.cfg.truncation_radius {
            None => 1.0,
            Some(radius) => {
                truncation_theta(running_max, self.cfg.truncation_plateau.unwrap_or(radius), radius)
            }
        }
    }

    /// Wraps an initial condition into a fresh path state.
    pub fn initial_state(
        &self,
        u0: &ComplexField,
        sample_index: u64,
    ) -> Result<PathState, SolverError> {
        if *u0.grid() != self.noise.grid() {
            return Err(SolverError::GridMismatch);
        }
        let norms = u0.to_spectrum().sobolev_norms();
        let running = self.tracked_norm(&norms);
        Ok(PathState {
            t: 0.0,
            u: u0.clone(),
            step_index: 0,
            sample_index,
            status: PathStatus::Running,
            norms,
            running_norm_max: running,
            midpoint_iterations: 0,
        })
    }

    fn tracked_norm(&self, norms: &SobolevNorms) -> f64 {
        match self.cfg.truncation_norm {
            TruncationNorm::H1 => norms.h1(),
            TruncationNorm::H2 => norms.h2(),
        }
    }

    /// Advances one time step in place.  No-op unless the path is `Running`.
    pub fn step(&self, state: &mut PathState) {
        if state.status != PathStatus::Running {
            return;
        }
        let dt = self.cfg.dt;
        let stream = NoiseStream::derive(
            self.noise.spec().master_seed,
            state.sample_index,
            state.step_index,
        );
        let dw = self
            .noise
            .sample_increment(dt, &stream)
            .expect("dt was validated at construction");
        let theta = self.truncation_factor(state.running_norm_max);

        let outcome = match self.cfg.scheme {
            Scheme::ExpEuler => Some(self.step_exp_euler(&state.u, &dw, theta)),
            Scheme::SplitStep => Some(self.step_splitstep(&state.u, &dw, theta)),
            Scheme::StratonovichMidpoint => {
                match self.step_midpoint(&state.u, &dw, theta) {
                    Some((u, norms, iters)) => {
                        state.midpoint_iterations = iters;
                        Some((u, norms))
                    }
                    None => None,
                }
            }
        };

        let Some((u_next, norms)) = outcome else {
            state.status = PathStatus::NoConvergence;
            return;
        };

        state.u = u_next;
        state.step_index += 1;
        state.t = state.step_index as f64 * dt;
        state.norms = norms;
        state.running_norm_max = state.running_norm_max.max(self.tracked_norm(&norms));
        let h1 = norms.h1();
        if !state.u.is_finite() || !h1.is_finite() || h1 > self.cfg.blowup_threshold {
            state.status = PathStatus::BlowUp;
        } else if state.step_index == self.steps {
            state.status = PathStatus::Finished;
        }
    }

    /// Trailing spectral stage shared by the steppers: optional mask,
    /// exact free flight, norms of the result, and the return to nodal values.
    fn flight(&self, u: &ComplexField, t: f64, dealias: bool) -> (ComplexField, SobolevNorms) {
        let mut spec = u.to_spectrum();
        if dealias {
            spec.dealias();
        }
        if !self.cfg.disable_laplacian {
            spec.semigroup(t);
        }
        let norms = spec.sobolev_norms();
        (spec.into_field(), norms)
    }

    fn step_exp_euler(
        &self,
        u: &ComplexField,
        dw: &ComplexField,
        theta: f64,
    ) -> (ComplexField, SobolevNorms) {
        let dt = self.cfg.dt;
        let mut drift = self.eq.drift_nonlinear(u);
        drift.axpy(Complex64::new(1.0, 0.0), &self.noise.ito_correction(u));
        let diffusion = self.noise.diffusion_apply(u, dw);
        let mut bracket = u.clone();
        bracket.axpy(Complex64::new(dt * theta, 0.0), &drift);
        bracket.axpy(Complex64::new(theta, 0.0), &diffusion);
        self.flight(&bracket, dt, self.cfg.dealias)
    }

    fn step_splitstep(
        &self,
        u: &ComplexField,
        dw: &ComplexField,
        theta: f64,
    ) -> (ComplexField, SobolevNorms) {
        let dt = self.cfg.dt;
        let lambda = self.eq.lambda();
        let reg = *self.eq.reg();
        let g = self.noise.g_kind();
        let real_noise = self.noise.case() == NoiseCase::MultiplicativeReal;

        // Pointwise phase rotation: exact for the drift always, and for the
        // noise exactly when the increment is real.  Vacuum nodes stay put —
        // a zero amplitude carries no phase (and the exact-limit family would
        // produce −∞·0 there).
        let mut u_star = u.clone();
        for (j, z) in u_star.values_mut().iter_mut().enumerate() {
            let rho = z.norm_sqr();
            if rho == 0.0 {
                continue;
            }
            let mut phase = lambda * reg.f(rho) * dt;
            if real_noise {
                phase += g.eval(rho) * dw.values()[j].re;
            }
            *z *= Complex64::cis(theta * phase);
        }

        if real_noise {
            self.flight(&u_star, dt, false)
        } else {
            // Additive noise: flight first, then add the increment, then
            // measure (one extra forward transform).
            let (mut u_next, _) = self.flight(&u_star, dt, false);
            u_next.axpy(Complex64::new(theta, 0.0), dw);
            let norms = u_next.to_spectrum().sobolev_norms();
            (u_next, norms)
        }
    }

    fn step_midpoint(
        &self,
        u: &ComplexField,
        dw: &ComplexField,
        theta: f64,
    ) -> Option<(ComplexField, SobolevNorms, u32)> {
        let dt = self.cfg.dt;
        let half = 0.5 * dt;
        let mut spec_un = u.to_spectrum();
        if !self.cfg.disable_laplacian {
            spec_un.semigroup(half);
        }
        let shalf_un = spec_un.clone().into_field(); // S(dt/2)·u_n
        let cell = u.grid().cell_volume();

        // Solve v = S(dt/2)u_n + ½·Θ·(dt·drift(v) + diffusion(v, ΔW)).
        let mut v = shalf_un.clone();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.cfg.midpoint_max_iter {
            let mut next = shalf_un.clone();
            next.axpy(
                Complex64::new(0.5 * dt * theta, 0.0),
                &self.eq.drift_nonlinear(&v),
            );
            next.axpy(
                Complex64::new(0.5 * theta, 0.0),
                &self.noise.diffusion_apply(&v, dw),
            );
            iterations += 1;
            let mut diff_sq = 0.0;
            let mut scale_sq = 0.0;
            for (a, b) in next.values().iter().zip(v.values()) {
                diff_sq += (a - b).norm_sqr();
                scale_sq += a.norm_sqr();
            }
            let delta = (cell * diff_sq).sqrt();
            v = next;
            if !delta.is_finite() {
                return None;
            }
            if delta <= self.cfg.midpoint_tol * (1.0 + (cell * scale_sq).sqrt()) {
                converged = true;
                break;
            }
        }
        if !converged {
            return None;
        }

        // u_{n+1} = 2·S(dt/2)·v − S(dt)·u_n, assembled spectrally.
        let mut spec_v = v.to_spectrum();
        if !self.cfg.disable_laplacian {
            spec_v.semigroup(half);
        }
        spec_v.scale(Complex64::new(2.0, 0.0));
        if !self.cfg.disable_laplacian {
            spec_un.semigroup(half); // now S(dt)·u_n
        }
        spec_v.axpy(Complex64::new(-1.0, 0.0), &spec_un);
        let norms = spec_v.sobolev_norms();
        Some((spec_v.into_field(), norms, iterations))
    }

    /// Integrates a path from `u0` to the horizon, invoking the observer on
    /// the initial state and after every step (the final invocation sees the
    /// terminal status).  Returns the terminal state; blow-up and
    /// non-convergence are reported in its status, never as an `Err`.
    pub fn evolve(
        &self,
        u0: &ComplexField,
        sample_index: u64,
        mut observer: impl FnMut(&PathState),
    ) -> Result<PathState, SolverError> {
        let mut state = self.initial_state(u0, sample_index)?;
        if self.steps == 0 {
            state.status = PathStatus::Finished;
        }
        observer(&state);
        while state.status == PathStatus::Running {
            self.step(&mut state);
            observer(&state);
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use slogs_field_core::{Boundary, Grid};
    use slogs_noise::{GKind, NoiseSpec, SpectrumSpec};
    use slogs_regularization::RegKind;

    const TAU: f64 = std::f64::consts::TAU;

    fn grid() -> Grid {
        Grid::new(1, TAU, 64, Boundary::PeriodicTorus).unwrap()
    }

    fn quiet_noise(case: NoiseCase, g: GKind) -> QWienerModel {
        let spec = NoiseSpec {
            case,
            spectrum: SpectrumSpec {
                decay_exponent: 3.0,
                amplitude: 0.0,
                k_max: 4,
            },
            g,
            master_seed: 1,
        };
        QWienerModel::new(spec, grid()).unwrap()
    }

    fn eq() -> EquationSpec {
        EquationSpec::new(-1.0, RegKind::log_shift(1e-2).unwrap()).unwrap()
    }

    #[test]
    fn config_validation() {
        let noise = || quiet_noise(NoiseCase::AdditiveComplex, GKind::One);
        let mk = |cfg: SolverConfig| Solver::new(eq(), noise(), cfg);

        assert!(matches!(
            mk(SolverConfig::new(Scheme::ExpEuler, 0.0, 1.0)),
            Err(SolverError::InvalidTimeStep(_))
        ));
        assert!(matches!(
            mk(SolverConfig::new(Scheme::ExpEuler, 0.1, -1.0)),
            Err(SolverError::InvalidHorizon(_))
        ));
        assert!(matches!(
            mk(SolverConfig::new(Scheme::ExpEuler, 0.3, 1.0)),
            Err(SolverError::NonCommensurate { .. })
        ));
        let mut cfg = SolverConfig::new(Scheme::ExpEuler, 0.1, 1.0);
        cfg.truncation_radius = Some(-2.0);
        assert!(matches!(
            mk(cfg),
            Err(SolverError::InvalidTruncationRadius(_))
        ));
        let mut cfg = SolverConfig::new(Scheme::ExpEuler, 0.1, 1.0);
        cfg.truncation_radius = Some(1.0);
        cfg.truncation_plateau = Some(2.0); // not < 2R
        assert!(matches!(
            mk(cfg),
            Err(SolverError::InvalidTruncationPlateau { .. })
        ));
        // Split-step rejects complex multiplicative noise.
        let cm = quiet_noise(NoiseCase::MultiplicativeComplex, GKind::Rational { c: 1.0 });
        assert!(matches!(
            Solver::new(eq(), cm, SolverConfig::new(Scheme::SplitStep, 0.1, 1.0)),
            Err(SolverError::SplitStepNeedsRealRotation)
        ));
        // A valid config reports its step count.
        let s = mk(SolverConfig::new(Scheme::ExpEuler, 0.1, 1.0)).unwrap();
        assert_eq!(s.steps(), 10);
    }

    #[test]
    fn truncation_profile_shape() {
        // Plateau edge, cutoff, midpoint, and monotonicity.
        assert_eq!(truncation_theta(0.0, 1.0, 1.0), 1.0);
        assert_eq!(truncation_theta(1.0, 1.0, 1.0), 1.0);
        assert_eq!(truncation_theta(2.0, 1.0, 1.0), 0.0);
        assert_eq!(truncation_theta(5.0, 1.0, 1.0), 0.0);
        assert!((truncation_theta(1.5, 1.0, 1.0) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        let mut m = 0.0;
        while m <= 2.5 {
            let v = truncation_theta(m, 1.0, 1.0);
            assert!(v <= prev + 1e-15, "θ must be nonincreasing");
            prev = v;
            m += 0.01;
        }
        // A custom plateau shifts where the decay begins.
        assert_eq!(truncation_theta(1.4, 1.5, 1.0), 1.0);
        assert!(truncation_theta(1.6, 1.5, 1.0) < 1.0);
    }

    #[test]
    fn zero_horizon_returns_initial_state() {
        let solver = Solver::new(
            eq(),
            quiet_noise(NoiseCase::AdditiveComplex, GKind::One),
            SolverConfig::new(Scheme::SplitStep, 0.1, 0.0),
        )
        .unwrap();
        let u0 = ComplexField::from_fn(grid(), |x| Complex64::new(x[0].cos(), 0.3));
        let mut calls = 0;
        let end = solver.evolve(&u0, 0, |_| calls += 1).unwrap();
        assert_eq!(end.status, PathStatus::Finished);
        assert_eq!(end.step_index, 0);
        assert_eq!(end.u.values(), u0.values());
        assert_eq!(calls, 1, "observer sees exactly the initial state");
    }

    #[test]
    fn zero_field_stays_zero() {
        for scheme in [Scheme::ExpEuler, Scheme::SplitStep, Scheme::StratonovichMidpoint] {
            let solver = Solver::new(
                eq(),
                quiet_noise(NoiseCase::MultiplicativeReal, GKind::SuperLog { c: 1.0 }),
                SolverConfig::new(scheme, 1e-2, 0.1),
            )
            .unwrap();
            let end = solver.evolve(&ComplexField::zeros(grid()), 0, |_| {}).unwrap();
            assert_eq!(end.status, PathStatus::Finished);
            assert!(end.u.values().iter().all(|z| z.norm() == 0.0), "{scheme:?}");
        }
    }

    #[test]
    fn blow_up_is_captured_not_panicked() {
        let mut cfg = SolverConfig::new(Scheme::ExpEuler, 1e-2, 1.0);
        cfg.blowup_threshold = 1e-6; // any nontrivial state trips it
        let solver = Solver::new(
            eq(),
            quiet_noise(NoiseCase::AdditiveComplex, GKind::One),
            cfg,
        )
        .unwrap();
        let u0 = ComplexField::from_fn(grid(), |x| Complex64::new(x[0].sin(), 0.0));
        let end = solver.evolve(&u0, 0, |_| {}).unwrap();
        assert_eq!(end.status, PathStatus::BlowUp);
        assert_eq!(end.step_index, 1, "tripped on the first step");
    }

    #[test]
    fn non_finite_data_flips_status() {
        let solver = Solver::new(
            eq(),
            quiet_noise(NoiseCase::AdditiveComplex, GKind::One),
            SolverConfig::new(Scheme::ExpEuler, 1e-2, 1.0),
        )
        .unwrap();
        let mut u0 = ComplexField::from_fn(grid(), |x| Complex64::new(x[0].sin(), 0.0));
        u0.values_mut()[5] = Complex64::new(f64::INFINITY, 0.0);
        let end = solver.evolve(&u0, 0, |_| {}).unwrap();
        assert_eq!(end.status, PathStatus::BlowUp);
    }

    #[test]
    fn midpoint_reports_no_convergence_when_capped() {
        let mut cfg = SolverConfig::new(Scheme::StratonovichMidpoint, 1e-2, 1.0);
        cfg.midpoint_max_iter = 1;
        cfg.midpoint_tol = 1e-16;
        let solver = Solver::new(
            eq(),
            quiet_noise(NoiseCase::MultiplicativeComplex, GKind::Rational { c: 1.0 }),
            cfg,
        )
        .unwrap();
        let u0 = ComplexField::from_fn(grid(), |x| Complex64::new(x[0].cos() + 1.5, 0.1));
        let end = solver.evolve(&u0, 0, |_| {}).unwrap();
        assert_eq!(end.status, PathStatus::NoConvergence);
        assert_eq!(end.step_index, 0, "failed step does not advance the path");
    }
}
