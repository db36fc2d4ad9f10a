//! Stochastic forcing for the regularized logarithmic Schrödinger solvers.
//!
//! The driving process is a Q-Wiener process
//!
//! ```text
//!     W(t) = Σ_k √q_k · e_k · β_k(t),
//! ```
//!
//! truncated to finitely many orthonormal modes `e_k` of the box, with spectral
//! weights `q_k = a·(1 + |κ_k|²)^(−r)` in terms of the physical wavenumber
//! `κ_m = 2πm/L` per axis.  Three flavours are supported:
//!
//! * **additive complex** — the equation is forced by `dW` itself and the
//!   diffusion coefficient is fixed to one;
//! * **multiplicative complex** — forcing `i·g(|u|²)·u·dW` with a complex
//!   `W` built on complex exponential modes;
//! * **multiplicative real** — same pointwise coupling, but `W` is built on a
//!   real cosine/sine basis so every increment is real-valued; this is the
//!   flavour for which the pointwise modulus (and hence the mass) is
//!   conserved by the continuous dynamics.
//!
//! Complex and real bases enumerate the same wavenumbers, so `Σ q_k` — and
//! with it the increment's mean-square size `E‖ΔW‖² = dt·Σ q_k` — agrees
//! between the flavours.
//!
//! Converting the Stratonovich-type product `g̃(u)⋆dW` into an Itô evolution
//! produces two pointwise drift corrections (see [`QWienerModel::ito_correction`]):
//! a damping term weighted by `c(x) = Σ_k q_k|e_k(x)|²` and a skew term
//! weighted by `b(x) = Σ_k q_k·Im(e_k(x))·e_k(x)`.  For the trigonometric
//! bases used here `c(x)` is the constant `Σq_k / L^d`, and `b(x)` vanishes
//! identically for the real basis.
//!
//! Randomness is counter-based: a 256-bit stream key is derived from
//! `(master_seed, sample_index, step_index)` and every mode block reads from
//! its own substream of that key.  Increments are therefore pure functions of
//! their coordinates — Monte Carlo results do not depend on scheduling order
//! or worker count, and two runs that differ only in the regularization
//! parameter consume bitwise-identical noise paths.

mod model;
mod rng;

pub use model::QWienerModel;
pub use rng::NoiseStream;

use thiserror::Error;

/// Errors for noise configuration and sampling.
#[derive(Debug, Error, PartialEq)]
pub enum NoiseError {
    /// Spectral decay exponent must satisfy `r > 1`.
    #[error("spectral decay exponent must exceed 1 (got {0})")]
    DecayTooWeak(f64),
    /// Amplitude must be finite and nonnegative.
    #[error("spectral amplitude must be finite and nonnegative (got {0})")]
    InvalidAmplitude(f64),
    /// The mode cutoff must leave every retained wavenumber resolvable on the grid.
    #[error("mode cutoff {k_max} is not resolvable on a grid with {points} points per axis")]
    CutoffTooLarge { k_max: usize, points: usize },
    /// The gradient-weighted tail beyond the cutoff exceeds the 1% budget.
    #[error(
        "spectrum is too heavy-tailed: {percent:.3}% of the extrapolated \
         gradient-weighted trace lies beyond the mode cutoff (budget 1%)"
    )]
    TraceTailTooHeavy { percent: f64 },
    /// Catalog parameter `c` must be positive and finite.
    #[error("diffusion-coefficient parameter c must be positive and finite (got {0})")]
    InvalidGParameter(f64),
    /// The unbounded `SuperLog` coefficient is only admitted with real noise.
    #[error("SuperLog diffusion is admitted only with real multiplicative noise")]
    SuperLogNeedsRealNoise,
    /// Additive forcing fixes the diffusion coefficient to one.
    #[error("additive noise fixes the diffusion coefficient to one; use GKind::One")]
    AdditiveTakesUnitG,
    /// Time step for an increment must be positive and finite.
    #[error("time step must be positive and finite (got {0})")]
    InvalidTimeStep(f64),
}

/// Which of the three admissible noise structures drives the equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseCase {
    /// Additive forcing by a complex-valued Wiener process (`g̃ = 1`).
    AdditiveComplex,
    /// Multiplicative forcing `i·g(|u|²)·u·dW` with complex-valued `W`.
    MultiplicativeComplex,
    /// Multiplicative forcing with real-valued `W`; conserves mass pathwise.
    MultiplicativeReal,
}

impl NoiseCase {
    /// True for the two multiplicative flavours.
    pub fn is_multiplicative(self) -> bool {
        !matches!(self, NoiseCase::AdditiveComplex)
    }

    /// True when increments are built on the real cosine/sine basis.
    pub fn is_real(self) -> bool {
        matches!(self, NoiseCase::MultiplicativeReal)
    }
}

/// Power-law mode spectrum `q_k = a·(1 + |κ_k|²)^(−r)` truncated at `|m|∞ ≤ k_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumSpec {
    /// Decay exponent `r > 1`.
    pub decay_exponent: f64,
    /// Overall amplitude `a ≥ 0`.
    pub amplitude: f64,
    /// Per-axis integer mode cutoff (`k_max = 0` keeps only the constant mode).
    pub k_max: usize,
}

/// Diffusion-coefficient catalog: bounded real functions of the density `ρ = |u|²`.
///
/// All families except [`GKind::SuperLog`] are bounded together with `ρ·g′(ρ)`,
/// which is what the multiplicative well-posedness theory requires; `SuperLog`
/// grows logarithmically and is admitted only with real noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GKind {
    /// `g(ρ) = 1`.
    One,
    /// `g(ρ) = 1/(c + ρ)`.
    InverseShift { c: f64 },
    /// `g(ρ) = ρ/(c + ρ)`.
    Rational { c: f64 },
    /// `g(ρ) = ρ/(c + ρ²)`.
    RationalSq { c: f64 },
    /// `g(ρ) = log((c + ρ)/(1 + c·ρ))` — bounded by `|log c|`.
    LogRationalG { c: f64 },
    /// `g(ρ) = log(c + ρ)` — unbounded; real-noise only.
    SuperLog { c: f64 },
}

impl GKind {
    /// The catalog parameter, if the family has one.
    pub fn parameter(&self) -> Option<f64> {
        match *self {
            GKind::One => None,
            GKind::InverseShift { c }
            | GKind::Rational { c }
            | GKind::RationalSq { c }
            | GKind::LogRationalG { c }
            | GKind::SuperLog { c } => Some(c),
        }
    }

    /// Validates the catalog parameter.
    pub fn validate(&self) -> Result<(), NoiseError> {
        match self.parameter() {
            Some(c) if !(c > 0.0 && c.is_finite()) => Err(NoiseError::InvalidGParameter(c)),
            _ => Ok(()),
        }
    }

    /// Evaluates `g(ρ)` for a density `ρ ≥ 0`.
    pub fn eval(&self, rho: f64) -> f64 {
        debug_assert!(rho >= 0.0, "density must be nonnegative, got {rho}");
        match *self {
            GKind::One => 1.0,
            GKind::InverseShift { c } => 1.0 / (c + rho),
            GKind::Rational { c } => rho / (c + rho),
            GKind::RationalSq { c } => rho / (c + rho * rho),
            GKind::LogRationalG { c } => ((c + rho) / (1.0 + c * rho)).ln(),
            GKind::SuperLog { c } => (c + rho).ln(),
        }
    }

    /// Evaluates the derivative `g′(ρ)`.
    pub fn prime(&self, rho: f64) -> f64 {
        debug_assert!(rho >= 0.0, "density must be nonnegative, got {rho}");
        match *self {
            GKind::One => 0.0,
            GKind::InverseShift { c } => {
                let d = c + rho;
                -1.0 / (d * d)
            }
            GKind::Rational { c } => {
                let d = c + rho;
                c / (d * d)
            }
            GKind::RationalSq { c } => {
                let d = c + rho * rho;
                (c - rho * rho) / (d * d)
            }
            GKind::LogRationalG { c } => {
                (1.0 - c * c) / ((c + rho) * (1.0 + c * rho))
            }
            GKind::SuperLog { c } => 1.0 / (c + rho),
        }
    }

    /// True when the family is bounded (everything except `SuperLog`).
    pub fn is_bounded(&self) -> bool {
        !matches!(self, GKind::SuperLog { .. })
    }
}

/// Numerically determined size constants for a diffusion-coefficient family.
///
/// `sup_g` and `sup_rho_gp` bound `|g|` and `|ρ·g′(ρ)|`; `lipschitz_pair`
/// bounds `(x+y)·|g(x²)−g(y²)| / |x−y|` over real amplitudes, and
/// `one_sided_pair` bounds `|φ(x)−φ(y)| / |x−y|` for the complex map
/// `φ(z) = g′(|z|²)·g(|z|²)·|z|²·z` (the quantity controlling the one-sided
/// Lipschitz estimate of the Itô correction).  Unbounded quantities are
/// reported as `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GConstants {
    pub sup_g: f64,
    pub sup_rho_gp: f64,
    pub lipschitz_pair: f64,
    pub one_sided_pair: f64,
}

/// Computes [`GConstants`] by a deterministic search.
///
/// Amplitudes are scanned on a logarithmic grid spanning `[1e−6, 1e6]` (plus
/// zero); pair suprema scan all grid pairs together with near-diagonal pairs,
/// and the result carries a 5% safety margin so that the published constant
/// also dominates off-grid evaluations.
pub fn assumption_constants(g: &GKind) -> GConstants {
    const MARGIN: f64 = 1.05;
    let amps = amplitude_grid();

    let mut sup_g: f64 = 0.0;
    let mut sup_rho_gp: f64 = 0.0;
    for &t in &amps {
        let rho = t * t;
        sup_g = sup_g.max(g.eval(rho).abs());
        sup_rho_gp = sup_rho_gp.max((rho * g.prime(rho)).abs());
    }

    // Radial profile of the one-sided map: φ(t) = g′(t²)·g(t²)·t³ for t ≥ 0.
    let phi = |t: f64| {
        let rho = t * t;
        g.prime(rho) * g.eval(rho) * rho * t
    };

    let mut lipschitz_pair: f64 = 0.0;
    let mut one_sided_pair: f64 = 0.0;
    for (i, &x) in amps.iter().enumerate() {
        // Diagonal limits: the pair quotients degenerate to derivatives.
        let rho = x * x;
        lipschitz_pair = lipschitz_pair.max((4.0 * rho * g.prime(rho)).abs());
        if x > 0.0 {
            // Rotating one point of a pair around the origin probes the
            // tangential quotient |φ(x)|/|x|.
            one_sided_pair = one_sided_pair.max(phi(x).abs() / x);
        }
        for &y in &amps[i + 1..] {
            let q = (x + y) * (g.eval(x * x) - g.eval(y * y)).abs() / (y - x);
            lipschitz_pair = lipschitz_pair.max(q);
            one_sided_pair = one_sided_pair.max((phi(x) - phi(y)).abs() / (y - x));
        }
    }

    if !g.is_bounded() {
        // log(c + ρ) escapes every bound except sup |ρ·g′(ρ)| = sup ρ/(c+ρ) = 1.
        sup_g = f64::INFINITY;
        lipschitz_pair = f64::INFINITY;
        one_sided_pair = f64::INFINITY;
    }

    GConstants {
        sup_g: finite_scaled(sup_g, MARGIN),
        sup_rho_gp: finite_scaled(sup_rho_gp, MARGIN),
        lipschitz_pair: finite_scaled(lipschitz_pair, MARGIN),
        one_sided_pair: finite_scaled(one_sided_pair, MARGIN),
    }
}

fn finite_scaled(v: f64, margin: f64) -> f64 {
    if v.is_finite() {
        v * margin
    } else {
        v
    }
}

fn amplitude_grid() -> Vec<f64> {
    // 0 plus 601 log-spaced amplitudes over twelve decades, interleaved with
    // near-diagonal companions so pair quotients see both scales and slopes.
    let mut amps = vec![0.0];
    let n = 601;
    for i in 0..n {
        let t = 10f64.powf(-6.0 + 12.0 * i as f64 / (n - 1) as f64);
        amps.push(t);
        amps.push(t * 1.0003);
    }
    amps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    amps
}

/// Complete description of the driving noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub case: NoiseCase,
    pub spectrum: SpectrumSpec,
    pub g: GKind,
    pub master_seed: u64,
}

impl NoiseSpec {
    /// Validates the grid-independent part of the parameter set.
    pub fn validate(&self) -> Result<(), NoiseError> {
        let s = &self.spectrum;
        if !(s.decay_exponent > 1.0 && s.decay_exponent.is_finite()) {
            return Err(NoiseError::DecayTooWeak(s.decay_exponent));
        }
        if !(s.amplitude >= 0.0 && s.amplitude.is_finite()) {
            return Err(NoiseError::InvalidAmplitude(s.amplitude));
        }
        self.g.validate()?;
        match (self.case, self.g) {
            (NoiseCase::AdditiveComplex, GKind::One) => {}
            (NoiseCase::AdditiveComplex, _) => return Err(NoiseError::AdditiveTakesUnitG),
            (NoiseCase::MultiplicativeComplex, GKind::SuperLog { .. }) => {
                return Err(NoiseError::SuperLogNeedsRealNoise)
            }
            _ => {}
        }
        Ok(())
    }

    /// Validates the parameters against a concrete grid: resolvability of
    /// the cutoff and the 1% budget on the gradient-weighted spectral tail.
    pub fn validate_for(&self, grid: &slogs_field_core::Grid) -> Result<(), NoiseError> {
        self.validate()?;
        let points = grid.points_per_axis();
        if self.spectrum.k_max >= points / 2 {
            return Err(NoiseError::CutoffTooLarge {
                k_max: self.spectrum.k_max,
                points,
            });
        }
        if self.spectrum.amplitude == 0.0 {
            return Ok(());
        }
        let percent = 100.0 * trace_tail_fraction(&self.spectrum, grid.extent(), grid.dim());
        if !(percent <= 1.0) {
            return Err(NoiseError::TraceTailTooHeavy { percent });
        }
        Ok(())
    }
}

/// Fraction of the extrapolated gradient-weighted trace `Σ_k q_k·(1+|κ_k|²)`
/// that lies beyond the cutoff.  The tail is summed numerically far past the
/// cutoff and closed with an integral bound, so the estimate is an upper
/// bound on the true fraction.
fn trace_tail_fraction(spectrum: &SpectrumSpec, extent: f64, dim: usize) -> f64 {
    let r = spectrum.decay_exponent;
    let k = spectrum.k_max as i64;
    let dk = std::f64::consts::TAU / extent; // wavenumber spacing 2π/L
    // Weighted summand a·(1+κ²)^(1−r); the amplitude cancels in the fraction.
    let term1 = |m: i64| -> f64 {
        let kappa2 = (m as f64 * dk).powi(2);
        (1.0 + kappa2).powf(1.0 - r)
    };
    match dim {
        1 => {
            let retained: f64 = (-k..=k).map(term1).sum();
            if r <= 1.5 {
                return 1.0; // gradient-weighted trace diverges
            }
            // Sum the near tail, then bound the remainder by the integral
            // (1/Δκ)·∫ u^(2−2r) du from the last summed wavenumber.
            let mut far = k + 50_000;
            while (far as f64) * dk < 1.0 {
                far *= 2;
            }
            let near_tail: f64 = 2.0 * ((k + 1)..=far).map(term1).sum::<f64>();
            let kappa_far = far as f64 * dk;
            let rest = 2.0 / dk * kappa_far.powf(3.0 - 2.0 * r) / (2.0 * r - 3.0);
            let tail = near_tail + rest;
            tail / (retained + tail)
        }
        2 => {
            let term2 = |mx: i64, my: i64| -> f64 {
                let kappa2 = (mx as f64 * dk).powi(2) + (my as f64 * dk).powi(2);
                (1.0 + kappa2).powf(1.0 - r)
            };
            let mut retained = 0.0;
            for mx in -k..=k {
                for my in -k..=k {
                    retained += term2(mx, my);
                }
            }
            if r <= 2.0 {
                return 1.0;
            }
            // Near tail: the square ring k < |m|∞ ≤ far; remainder: polar
            // integral outside the inscribed circle of the summed box.
            let far = k + 400;
            let mut near_tail = 0.0;
            for mx in -far..=far {
                for my in -far..=far {
                    if mx.abs().max(my.abs()) > k {
                        near_tail += term2(mx, my);
                    }
                }
            }
            let kappa_far = far as f64 * dk;
            let rest = std::f64::consts::PI / (dk * dk) * (1.0 + kappa_far * kappa_far).powf(2.0 - r)
                / (r - 2.0);
            let tail = near_tail + rest;
            tail / (retained + tail)
        }
        _ => unreachable!("grids are one- or two-dimensional"),
    }
}
