//! Scalar diagnostics tracked along trajectories.
//!
//! Every a-priori estimate the solver is audited against is a statement
//! about one of a handful of path functionals:
//!
//! * mass              `M(u)  = ‖u‖²`,
//! * kinetic energy    `K(u)  = ½‖∇u‖²`,
//! * regularized entropy `F_ε(u) = ∫ Φ_ε(|u|²) dx`,
//! * modified energy   `H_ε(u) = K(u) − (λ/2)·F_ε(u)`,
//! * Sobolev norms     `‖u‖_{ℍ¹}`, `‖u‖_{ℍ²}`,
//! * weighted norm     `‖u‖_{L²_α} = ‖(1+|x|²)^{α/2} u‖`, `α ∈ (0, 2]`.
//!
//! This crate names those channels, samples them along a path into an
//! [`ObservableSeries`](series::ObservableSeries), and provides the weighted
//! interpolation inequality
//!
//! ```text
//! ‖v‖_{L^{2−2η}}  ≤  C(d,α,η) · ‖v‖^{1−θ} · ‖v‖_{L²_α}^{θ},
//! θ = dη / (2α(1−η)),   valid for η ∈ (0,1), α > dη/(2−2η),
//! ```
//!
//! as an executable check, together with the explicit constant obtained by
//! splitting the integral at the radius `r = (‖v‖_{L²_α}/‖v‖)^{1/α}` and
//! applying Hölder on each piece (see [`interpolation_constant`]).
//!
//! Statistical post-processing of Monte Carlo batches (sample means with
//! jackknife standard errors) lives in [`stats`].

use slogs_field_core::ops::{norm_l2, norm_l2_alpha};
use slogs_field_core::ComplexField;
use thiserror::Error;

pub mod series;
pub mod stats;

pub use series::{ObservableSeries, SeriesRecorder, CHANNELS};

/// Failure modes of the diagnostic layer: parameter ranges and sample
/// counts.  Field-shape mismatches are wiring bugs and panic instead.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObsError {
    #[error("weighted-norm exponent must lie in (0, 2], got α = {alpha}")]
    InvalidAlpha { alpha: f64 },
    #[error("interpolation exponent must lie in (0, 1), got η = {eta}")]
    InvalidEta { eta: f64 },
    #[error(
        "interpolation hypothesis needs α > dη/(2−2η) = {threshold}, got α = {alpha}"
    )]
    HypothesisTooWeak { alpha: f64, threshold: f64 },
    #[error("weighted interpolation is derived for dimensions 1 and 2, got {dim}")]
    UnsupportedDimension { dim: usize },
    #[error("sampling stride must be at least 1")]
    ZeroStride,
    #[error("statistic needs at least {needs} values, got {got}")]
    TooFewSamples { needs: usize, got: usize },
}

/// Mass `M(u) = ‖u‖² = cell_volume · Σ|u_j|²`.
pub fn mass(u: &ComplexField) -> f64 {
    let s: f64 = u.values().iter().map(|z| z.norm_sqr()).sum();
    u.grid().cell_volume() * s
}

/// Kinetic energy `K(u) = ½‖∇u‖²`, gradient taken spectrally.
pub fn kinetic(u: &ComplexField) -> f64 {
    0.5 * u.to_spectrum().sobolev_norms().grad_sq
}

/// Full `ℍ²` norm `(‖u‖² + ‖∇u‖² + ‖Δu‖²)^{1/2}`.
pub fn h2_norm(u: &ComplexField) -> f64 {
    u.to_spectrum().sobolev_norms().h2()
}

/// Weighted norm `‖u‖_{L²_α}` with the polynomial weight `(1+|x|²)^{α/2}`
/// in box-centered coordinates; `α ∈ (0, 2]`.
pub fn weighted_norm(u: &ComplexField, alpha: f64) -> Result<f64, ObsError> {
    norm_l2_alpha(u, alpha).map_err(|_| ObsError::InvalidAlpha { alpha })
}

/// Both sides of the weighted interpolation inequality for one field.
///
/// `ratio ≤ interpolation_constant(d, α, η)` is the inequality itself; the
/// property suites assert it over large random-field batches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationCheck {
    /// `‖u‖_{L^{2−2η}}`.
    pub lhs: f64,
    /// `‖u‖^{1−θ} · ‖u‖_{L²_α}^{θ}` with `θ = dη/(2α(1−η))`.
    pub rhs_product: f64,
    /// `lhs / rhs_product`, defined as `0` for the zero field.
    pub ratio: f64,
}

/// Evaluates the weighted interpolation inequality on `u`.
///
/// Requires `η ∈ (0, 1)`, `α ∈ (0, 2]`, and the lemma hypothesis
/// `α > dη/(2−2η)` (which makes the tail integral in the proof finite).
/// The `L^{2−2η}` quantity is computed directly — for `η > ½` it is a
/// quasi-norm, which is fine for a ratio diagnostic.
pub fn interpolation_check(
    u: &ComplexField,
    alpha: f64,
    eta: f64,
) -> Result<InterpolationCheck, ObsError> {
    validate_interpolation_params(u.grid().dim(), alpha, eta)?;
    let d = u.grid().dim() as f64;
    let p = 2.0 - 2.0 * eta;
    let s: f64 = u.values().iter().map(|z| z.norm().powf(p)).sum();
    let lhs = (u.grid().cell_volume() * s).powf(1.0 / p);
    let theta = d * eta / (2.0 * alpha * (1.0 - eta));
    let l2 = norm_l2(u);
    let la = norm_l2_alpha(u, alpha).expect("α validated above");
    let rhs_product = l2.powf(1.0 - theta) * la.powf(theta);
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs_product };
    Ok(InterpolationCheck {
        lhs,
        rhs_product,
        ratio,
    })
}

/// The explicit interpolation constant `C(d, α, η)`.
///
/// Splitting `∫|v|^{2−2η}` at radius `r` and applying Hölder with exponents
/// `(1/(1−η), 1/η)` gives
///
/// ```text
/// inner ≤ ‖v‖^{2−2η} · (vol_d · r^d)^η
/// outer ≤ ‖v‖_{L²_α}^{2−2η} · (surf_d · r^{−β} / β)^η,   β = 2α(1−η)/η − d,
/// ```
///
/// where `vol_d` is the unit-ball volume (2, π) and `surf_d` the unit-sphere
/// measure (2, 2π) for `d = 1, 2`.  Choosing `r = (‖v‖_{L²_α}/‖v‖)^{1/α}`
/// balances the two terms onto the common factor `‖v‖^{(1−θ)(2−2η)}
/// ‖v‖_{L²_α}^{θ(2−2η)}`, so
///
/// ```text
/// C = (vol_d^η + (surf_d/β)^η)^{1/(2−2η)}.
/// ```
///
/// The hypothesis `α > dη/(2−2η)` is exactly `β > 0`.
pub fn interpolation_constant(dim: usize, alpha: f64, eta: f64) -> Result<f64, ObsError> {
    validate_interpolation_params(dim, alpha, eta)?;
    let (vol, surf) = match dim {
        1 => (2.0, 2.0),
        2 => (std::f64::consts::PI, std::f64::consts::TAU),
        _ => unreachable!("dimension validated above"),
    };
    let beta = 2.0 * alpha * (1.0 - eta) / eta - dim as f64;
    let c = (vol.powf(eta) + (surf / beta).powf(eta)).powf(1.0 / (2.0 - 2.0 * eta));
    Ok(c)
}

fn validate_interpolation_params(dim: usize, alpha: f64, eta: f64) -> Result<(), ObsError> {
    if dim == 0 || dim > 2 {
        return Err(ObsError::UnsupportedDimension { dim });
    }
    if !(eta.is_finite() && eta > 0.0 && eta < 1.0) {
        return Err(ObsError::InvalidEta { eta });
    }
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 2.0) {
        return Err(ObsError::InvalidAlpha { alpha });
    }
    let threshold = dim as f64 * eta / (2.0 - 2.0 * eta);
    if alpha <= threshold {
        return Err(ObsError::HypothesisTooWeak { alpha, threshold });
    }
    Ok(())
}
