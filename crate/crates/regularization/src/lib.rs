//! Smooth regularizations `f_ε` of the logarithm in the nonlinearity
//! `iλ u log|u|²`, their entropy antiderivatives `F_ε`, and the modified
//! energy they define.
//!
//! Two one-parameter families tame `log ρ` near vacuum (`ρ = |u|² → 0`),
//! both converging to it pointwise as `ε → 0`:
//!
//! * shift: `f_ε(ρ) = log(ρ + ε)` — bounded below by `log ε`, unbounded
//!   above;
//! * rational: `f_ε(ρ) = log((ρ + ε)/(1 + ερ))` — uniformly bounded,
//!   `|f_ε| ≤ |log ε|`, and antisymmetric under `ρ ↦ 1/ρ`.
//!
//! The exact limit `f₀(ρ) = log ρ` is admitted only for oracle comparisons.
//!
//! Each family integrates to an entropy `F_ε(ρ) = ∫₀^ρ f_ε(s) ds` with
//! `F_ε(0) = 0` exactly, and the flow conserves (in the deterministic case)
//! the modified energy
//!
//! ```text
//! H_ε(u) = ½‖∇u‖² − (λ/2)·∫ F_ε(|u|²) dx .
//! ```
//!
//! The sign convention above is the primary accessor ([`modified_energy`]);
//! the companion with `+λ/2` is exposed as [`energy_plus_form`].

use num_complex::Complex64;
use slogs_field_core::ComplexField;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegError {
    #[error("invalid regularization: {0}")]
    InvalidRegularization(String),
    #[error("invalid equation: {0}")]
    InvalidEquation(String),
}

/// Which smoothing of the logarithm to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegFamily {
    /// `f_ε(ρ) = log(ρ + ε)`.
    LogShift,
    /// `f_ε(ρ) = log((ρ + ε)/(1 + ερ))`.
    LogRational,
    /// The unregularized `log ρ` (`ε = 0`); for oracle comparisons only.
    Exact,
}

/// A regularization family together with its parameter `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegKind {
    family: RegFamily,
    epsilon: f64,
}

impl RegKind {
    /// `LogShift` and `LogRational` require `ε ∈ (0, 1)`; `Exact` requires
    /// `ε = 0`.
    pub fn new(family: RegFamily, epsilon: f64) -> Result<Self, RegError> {
        match family {
            RegFamily::Exact => {
                if epsilon != 0.0 {
                    return Err(RegError::InvalidRegularization(format!(
                        "the exact logarithm has no parameter; got ε = {epsilon}"
                    )));
                }
            }
            _ => {
                if !(epsilon.is_finite() && epsilon > 0.0 && epsilon < 1.0) {
                    return Err(RegError::InvalidRegularization(format!(
                        "ε must lie in (0, 1), got {epsilon}"
                    )));
                }
            }
        }
        Ok(RegKind { family, epsilon })
    }

    pub fn log_shift(epsilon: f64) -> Result<Self, RegError> {
        Self::new(RegFamily::LogShift, epsilon)
    }

    pub fn log_rational(epsilon: f64) -> Result<Self, RegError> {
        Self::new(RegFamily::LogRational, epsilon)
    }

    pub fn exact() -> Self {
        RegKind {
            family: RegFamily::Exact,
            epsilon: 0.0,
        }
    }

    pub fn family(&self) -> RegFamily {
        self.family
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `f_ε(ρ)` for a density `ρ = |u|² ≥ 0`.
    ///
    /// For `Exact` at `ρ = 0` this is the singular value `-∞` (the genuine
    /// limit); callers that need the vanishing product `f(ρ)·u` use
    /// the drift evaluation instead, which handles the limit.
    ///
    /// Panics on negative `ρ`: densities are squares, so a negative input is
    /// a caller bug, not data.
    pub fn f(&self, rho: f64) -> f64 {
        assert!(rho >= 0.0, "density must be nonnegative, got {rho}");
        let eps = self.epsilon;
        match self.family {
            RegFamily::LogShift => (rho + eps).ln(),
            RegFamily::LogRational => ((rho + eps) / (1.0 + eps * rho)).ln(),
            RegFamily::Exact => rho.ln(), // ln(0) = -inf, the singular sentinel
        }
    }

    /// `f_ε'(ρ)`.
    pub fn f_prime(&self, rho: f64) -> f64 {
        assert!(rho >= 0.0, "density must be nonnegative, got {rho}");
        let eps = self.epsilon;
        match self.family {
            RegFamily::LogShift => 1.0 / (rho + eps),
            RegFamily::LogRational => {
                (1.0 - eps * eps) / ((rho + eps) * (1.0 + eps * rho))
            }
            RegFamily::Exact => 1.0 / rho, // 1/0 = +inf at the vacuum
        }
    }

    /// Entropy density `F_ε(ρ) = ∫₀^ρ f_ε(s) ds`, with the exact branch
    /// `F_ε(0) = 0`.
    ///
    /// Closed forms:
    /// * shift: `(ε+ρ)log(ε+ρ) − ρ − ε log ε`;
    /// * rational: `ρ log((ρ+ε)/(1+ρε)) + ε log(ρ+ε) − (1/ε)log(ερ+1) − ε log ε`;
    /// * exact: `ρ log ρ − ρ`.
    pub fn entropy_density(&self, rho: f64) -> f64 {
        assert!(rho >= 0.0, "density must be nonnegative, got {rho}");
        if rho == 0.0 {
            return 0.0;
        }
        let eps = self.epsilon;
        match self.family {
            RegFamily::LogShift => (eps + rho) * (eps + rho).ln() - rho - eps * eps.ln(),
            RegFamily::LogRational => {
                // ln_1p keeps the (1/ε)·log(ερ+1) term accurate when ερ ≪ 1;
                // a plain log would cost ~6 digits there after the 1/ε blowup.
                rho * ((rho + eps) / (1.0 + rho * eps)).ln() + eps * (rho + eps).ln()
                    - (1.0 / eps) * (eps * rho).ln_1p()
                    - eps * eps.ln()
            }
            RegFamily::Exact => rho * rho.ln() - rho,
        }
    }

    /// `F_ε(|u|²)` integrated over the box (rectangle quadrature).
    pub fn entropy(&self, u: &ComplexField) -> f64 {
        let s: f64 = u
            .values()
            .iter()
            .map(|z| self.entropy_density(z.norm_sqr()))
            .sum();
        u.grid().cell_volume() * s
    }
}

/// The equation-level parameters: coupling `λ` and the regularization.
///
/// `λ = 0` is admitted: it switches the logarithmic drift off entirely, which
/// is what free-flight exactness checks run against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquationSpec {
    lambda: f64,
    reg: RegKind,
}

impl EquationSpec {
    pub fn new(lambda: f64, reg: RegKind) -> Result<Self, RegError> {
        if !lambda.is_finite() {
            return Err(RegError::InvalidEquation(format!(
                "λ must be finite, got {lambda}"
            )));
        }
        Ok(EquationSpec { lambda, reg })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn reg(&self) -> &RegKind {
        &self.reg
    }

    /// Pointwise logarithmic drift `iλ f_ε(|u_j|²) u_j`.
    ///
    /// For the `Exact` family the vacuum limit is used: `f₀(ρ)·√ρ → 0` as
    /// `ρ → 0`, so nodes with `|u_j|² = 0` contribute exactly zero rather
    /// than `(-∞)·0 = NaN`.
    pub fn drift_nonlinear(&self, u: &ComplexField) -> ComplexField {
        let lam = self.lambda;
        let reg = self.reg;
        let values = u
            .values()
            .iter()
            .map(|z| {
                let rho = z.norm_sqr();
                if rho == 0.0 && reg.family() == RegFamily::Exact {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::new(0.0, lam * reg.f(rho)) * z
            })
            .collect();
        ComplexField::from_values(*u.grid(), values)
            .expect("drift preserves the value-buffer length")
    }

    /// Modified energy `H_ε(u) = ½‖∇u‖² − (λ/2)·entropy(u)`.
    pub fn modified_energy(&self, u: &ComplexField) -> f64 {
        self.kinetic(u) - 0.5 * self.lambda * self.reg.entropy(u)
    }

    /// The companion sign convention `½‖∇u‖² + (λ/2)·entropy(u)`.
    pub fn energy_plus_form(&self, u: &ComplexField) -> f64 {
        self.kinetic(u) + 0.5 * self.lambda * self.reg.entropy(u)
    }

    /// Kinetic part `½‖∇u‖²` (spectral).
    pub fn kinetic(&self, u: &ComplexField) -> f64 {
        0.5 * u.to_spectrum().sobolev_norms().grad_sq
    }
}

/// Convenience: `inner`-compatible re-export so downstream crates need not
/// import field-core ops for the common pairing.
pub use slogs_field_core::ops::inner;

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use slogs_field_core::{Boundary, Grid};

    #[test]
    fn constructors_validate() {
        assert!(RegKind::log_shift(0.0).is_err());
        assert!(RegKind::log_shift(1.0).is_err());
        assert!(RegKind::log_shift(f64::NAN).is_err());
        assert!(RegKind::log_rational(0.5).is_ok());
        assert!(RegKind::new(RegFamily::Exact, 0.1).is_err());
        let reg = RegKind::log_shift(0.1).unwrap();
        assert!(EquationSpec::new(0.0, reg).is_ok(), "λ = 0 disables the drift");
        assert!(EquationSpec::new(f64::INFINITY, reg).is_err());
        assert!(EquationSpec::new(f64::NAN, reg).is_err());
        assert!(EquationSpec::new(-1.5, reg).is_ok());
    }

    #[test]
    fn f_matches_closed_forms_and_limits() {
        let eps = 0.25;
        let shift = RegKind::log_shift(eps).unwrap();
        let rational = RegKind::log_rational(eps).unwrap();
        assert_relative_eq!(shift.f(0.75), 1.0_f64.ln(), epsilon = 1e-15);
        assert_relative_eq!(rational.f(0.0), eps.ln(), epsilon = 1e-15);
        // rational family is antisymmetric under ρ ↦ 1/ρ
        for rho in [0.01, 0.3, 2.0, 50.0] {
            assert_relative_eq!(
                rational.f(rho),
                -rational.f(1.0 / rho),
                max_relative = 1e-12
            );
        }
        // exact limit at the vacuum is the -∞ sentinel
        let exact = RegKind::exact();
        assert_eq!(exact.f(0.0), f64::NEG_INFINITY);
        assert_eq!(exact.f_prime(0.0), f64::INFINITY);
        // pointwise convergence f_ε → log ρ (absolute, log ρ may vanish)
        for rho in [0.5_f64, 1.0, 7.0] {
            let fe = RegKind::log_shift(1e-9).unwrap().f(rho);
            let fr = RegKind::log_rational(1e-9).unwrap().f(rho);
            assert!((fe - rho.ln()).abs() < 1e-8);
            assert!((fr - rho.ln()).abs() < 1e-7);
        }
    }

    /// F_ε' = f_ε: central finite differences of the entropy density
    /// reproduce f_ε across twelve decades of ρ.
    #[test]
    fn entropy_density_antiderivative_of_f() {
        for eps in [0.5, 0.1, 0.01, 1e-4] {
            for kind in [
                RegKind::log_shift(eps).unwrap(),
                RegKind::log_rational(eps).unwrap(),
            ] {
                let mut rho = 1e-6;
                while rho < 1e6 {
                    // h ~ 1e-3·ρ balances truncation (h²·|f''|) against the
                    // cancellation floor of F(ρ±h) − F(ρ) at f64 precision.
                    let h = rho * 1e-3;
                    let diff = (kind.entropy_density(rho + h) - kind.entropy_density(rho - h))
                        / (2.0 * h);
                    let f = kind.f(rho);
                    let tol = 1e-6 * f.abs().max(1.0);
                    assert!(
                        (diff - f).abs() < tol,
                        "F' ≠ f for {kind:?} at ρ={rho}: {diff} vs {f}"
                    );
                    rho *= 10.0;
                }
                assert_eq!(kind.entropy_density(0.0), 0.0);
            }
        }
    }

    /// Constant field u ≡ c with |c|² = 1-ε (shift family):
    /// F_ε ≡ 1·log 1 − (1-ε) − ε log ε, so entropy = V·(-(1-ε) − ε log ε).
    #[test]
    fn entropy_constant_field_closed_form() {
        let eps = 0.125;
        let kind = RegKind::log_shift(eps).unwrap();
        let l = 5.0;
        let g = Grid::new(1, l, 64, Boundary::PeriodicTorus).unwrap();
        let amp = (1.0 - eps).sqrt();
        let u = ComplexField::from_fn(g, |_| Complex64::new(amp, 0.0));
        let expect = l * (-(1.0 - eps) - eps * eps.ln());
        assert_relative_eq!(kind.entropy(&u), expect, max_relative = 1e-13);
    }

    /// |f_ε| ≤ |log ε| for the rational family over a huge density range.
    #[test]
    fn rational_family_uniform_bound() {
        for eps in [0.5, 0.1, 0.01, 1e-4] {
            let kind = RegKind::log_rational(eps).unwrap();
            let bound = eps.ln().abs();
            let mut rho = 0.0_f64;
            let mut step = 1e-7;
            while rho < 1e8 {
                assert!(
                    kind.f(rho).abs() <= bound * (1.0 + 1e-14),
                    "|f| > |log ε| at ρ={rho}, ε={eps}"
                );
                rho += step;
                step *= 1.35;
            }
        }
    }

    /// Density-difference kernel: sup_ρ (ε_m - ε_n)·√ρ/(ρ + ε_m) is attained
    /// at ρ = ε_m with value (ε_m - ε_n)/(2√ε_m) ≤ √ε_m/2.
    #[test]
    fn epsilon_difference_kernel_bound() {
        let pairs: [(f64, f64); 3] = [(1e-1, 1e-2), (1e-2, 1e-3), (3e-3, 1e-5)];
        for (em, en) in pairs {
            let analytic = (em - en) / (2.0 * em.sqrt());
            let mut sup: f64 = 0.0;
            let mut rho: f64 = 1e-9;
            while rho < 1e6 {
                sup = sup.max((em - en) * rho.sqrt() / (rho + em));
                rho *= 1.02;
            }
            assert!(sup <= analytic * (1.0 + 1e-10));
            assert!(sup >= analytic * 0.999, "grid missed the max near ρ=ε_m");
            assert!(analytic <= em.sqrt() / 2.0 + 1e-15);
        }
    }

    /// Pair inequality (shift family, complex arguments):
    /// |Im[(f(x₁)x₁ − f(x₂)x₂)(conj(x₁) − conj(x₂))]| ≤ 4|x₁−x₂|²,
    /// where f(x) = log(|x|²+ε). The imaginary part collapses to
    /// (f₁−f₂)·Im(conj(x₁)x₂), which is what we evaluate.
    #[test]
    fn shift_pair_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for eps in [0.5, 0.1, 0.01, 1e-4] {
            let kind = RegKind::log_shift(eps).unwrap();
            for _ in 0..10_000 {
                let x1 = random_point(&mut rng);
                let x2 = random_point(&mut rng);
                let f1 = kind.f(x1.norm_sqr());
                let f2 = kind.f(x2.norm_sqr());
                let lhs = ((f1 - f2) * (x1.conj() * x2).im).abs();
                let rhs = 4.0 * (x1 - x2).norm_sqr();
                assert!(
                    lhs <= rhs * (1.0 + 1e-12) + 1e-300,
                    "shift pair bound violated at ε={eps}: {x1} {x2}"
                );
            }
        }
    }

    /// Pair inequality (rational family): same quantity, constant 4(1−ε²).
    #[test]
    fn rational_pair_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for eps in [0.5, 0.1, 0.01, 1e-4] {
            let kind = RegKind::log_rational(eps).unwrap();
            let c = 4.0 * (1.0 - eps * eps);
            for _ in 0..10_000 {
                let x1 = random_point(&mut rng);
                let x2 = random_point(&mut rng);
                let f1 = kind.f(x1.norm_sqr());
                let f2 = kind.f(x2.norm_sqr());
                let lhs = ((f1 - f2) * (x1.conj() * x2).im).abs();
                let rhs = c * (x1 - x2).norm_sqr();
                assert!(
                    lhs <= rhs * (1.0 + 1e-12) + 1e-300,
                    "rational pair bound violated at ε={eps}: {x1} {x2}"
                );
            }
        }
    }

    /// Radial-derivative bound for the rational family is an identity:
    /// d_{|x|} f_ε(|x|²) = 2|x|(1−ε²)/((ε+|x|²)(1+ε|x|²)).
    #[test]
    fn rational_radial_derivative_identity() {
        let eps = 0.03;
        let kind = RegKind::log_rational(eps).unwrap();
        let mut x = 1e-4;
        while x < 1e3 {
            let rho = x * x;
            let lhs = (kind.f_prime(rho) * 2.0 * x).abs();
            let rhs = 2.0 * (1.0 - eps * eps) * x / ((eps + rho) * (1.0 + eps * rho));
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            x *= 1.7;
        }
    }

    /// Shift-family derivative envelopes used by the higher-regularity
    /// analysis: √ρ·f'(ρ) ≤ 1/(2√ε), ρ·f'(ρ) ≤ 1, ρ^{3/2}·|f''(ρ)| ≤ 1/(2√ε).
    #[test]
    fn shift_derivative_envelopes() {
        for eps in [0.5, 0.1, 0.01, 1e-4] {
            let kind = RegKind::log_shift(eps).unwrap();
            let cap = 0.5 / eps.sqrt();
            let mut rho = 1e-10;
            while rho < 1e8 {
                let fp = kind.f_prime(rho);
                let fpp = -1.0 / ((rho + eps) * (rho + eps));
                assert!(rho.sqrt() * fp <= cap * (1.0 + 1e-12));
                assert!(rho * fp <= 1.0 + 1e-12);
                assert!(rho.powf(1.5) * fpp.abs() <= cap * (1.0 + 1e-12));
                rho *= 1.5;
            }
        }
    }

    /// The drift is a pointwise imaginary rotation: ⟨u, drift(u)⟩ = 0, so it
    /// moves no mass; and the Exact family is finite on fields with zeros.
    #[test]
    fn drift_moves_no_mass_and_handles_vacuum() {
        let g = Grid::new(1, 8.0, 64, Boundary::PeriodicTorus).unwrap();
        let reg = RegKind::log_rational(0.05).unwrap();
        let eq = EquationSpec::new(-1.0, reg).unwrap();
        let u = ComplexField::from_fn(g, |x| {
            Complex64::new((-x[0] * x[0]).exp(), 0.3 * x[0].sin())
        });
        let drift = eq.drift_nonlinear(&u);
        let pairing = inner(&u, &drift);
        assert!(pairing.abs() < 1e-14 * ops_norm_scale(&u));

        let exact = EquationSpec::new(2.0, RegKind::exact()).unwrap();
        let with_vacuum = ComplexField::from_fn(g, |x| {
            if x[0].abs() < 1.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
        let d = exact.drift_nonlinear(&with_vacuum);
        assert!(d.is_finite(), "exact drift must vanish at vacuum nodes");
    }

    fn ops_norm_scale(u: &ComplexField) -> f64 {
        let n = slogs_field_core::ops::norm_l2(u);
        n * n + 1.0
    }

    /// The two energy sign conventions differ by exactly λ·entropy.
    #[test]
    fn energy_sign_conventions() {
        let g = Grid::new(1, 6.0, 64, Boundary::PeriodicTorus).unwrap();
        let reg = RegKind::log_shift(0.2).unwrap();
        let eq = EquationSpec::new(1.5, reg).unwrap();
        let u = ComplexField::from_fn(g, |x| Complex64::new((-0.5 * x[0] * x[0]).exp(), 0.1));
        let minus = eq.modified_energy(&u);
        let plus = eq.energy_plus_form(&u);
        assert_relative_eq!(
            plus - minus,
            1.5 * reg.entropy(&u),
            max_relative = 1e-12
        );
        // kinetic term alone for a plane wave: H = ½k²‖u‖² − (λ/2)F(1)·V
        let k = 2.0 * std::f64::consts::PI * 3.0 / 6.0;
        let w = ComplexField::from_fn(g, |x| Complex64::cis(k * x[0]));
        let kinetic = eq.kinetic(&w);
        assert_relative_eq!(kinetic, 0.5 * k * k * 6.0, max_relative = 1e-12);
    }

    fn random_point(rng: &mut ChaCha8Rng) -> Complex64 {
        // Mix of scales: uniform box plus occasional large/small magnitudes.
        let scale = match rng.gen_range(0..4) {
            0 => 1e-3,
            1 => 1.0,
            2 => 10.0,
            _ => 1e3,
        };
        Complex64::new(
            scale * rng.gen_range(-1.0..1.0),
            scale * rng.gen_range(-1.0..1.0),
        )
    }
}
