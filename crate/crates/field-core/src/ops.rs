//! Quadrature pairings, norms, and spectral differential operators.
//!
//! Everything here is a free function over [`ComplexField`]; the spectral
//! ones route through [`FieldSpectrum`](crate::FieldSpectrum) so FFT plans
//! are reused across calls.

use crate::{ComplexField, FieldError};

/// Real quadrature pairing `⟨u, v⟩ = cell_volume · Σ_j Re(u_j · conj(v_j))`.
///
/// Panics if the fields live on different grids (a wiring bug, not a user
/// configuration error — configurations are validated before fields exist).
pub fn inner(u: &ComplexField, v: &ComplexField) -> f64 {
    assert_eq!(
        u.grid(),
        v.grid(),
        "inner product of fields on different grids"
    );
    let s: f64 = u
        .values()
        .iter()
        .zip(v.values().iter())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum();
    u.grid().cell_volume() * s
}

/// `‖u‖_{L²} = sqrt(cell_volume · Σ|u_j|²)`.
pub fn norm_l2(u: &ComplexField) -> f64 {
    let s: f64 = u.values().iter().map(|z| z.norm_sqr()).sum();
    (u.grid().cell_volume() * s).sqrt()
}

/// `‖u‖_{H¹} = (‖u‖² + ‖∇u‖²)^{1/2}` with the gradient taken spectrally.
pub fn norm_h1(u: &ComplexField) -> f64 {
    u.to_spectrum().sobolev_norms().h1()
}

/// `‖u‖_{L^p} = (cell_volume · Σ|u_j|^p)^{1/p}`, `p ≥ 1`.
pub fn norm_lp(u: &ComplexField, p: f64) -> Result<f64, FieldError> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(FieldError::InvalidNormParameter(format!(
            "norm_lp needs p ≥ 1, got {p}"
        )));
    }
    let s: f64 = u.values().iter().map(|z| z.norm().powf(p)).sum();
    Ok((u.grid().cell_volume() * s).powf(1.0 / p))
}

/// Weighted norm `‖u‖_{L²_α} = ‖(1+|x|²)^{α/2} u‖_{L²}` with `x` the
/// node coordinates centered on the box, `α ∈ (0, 2]`.
pub fn norm_l2_alpha(u: &ComplexField, alpha: f64) -> Result<f64, FieldError> {
    if !(alpha.is_finite() && alpha > 0.0 && alpha <= 2.0) {
        return Err(FieldError::InvalidNormParameter(format!(
            "norm_l2_alpha needs α in (0, 2], got {alpha}"
        )));
    }
    let r2 = u.grid().node_radius_sq();
    let s: f64 = u
        .values()
        .iter()
        .zip(r2.iter())
        .map(|(z, r)| (1.0 + r).powf(alpha) * z.norm_sqr())
        .sum();
    Ok((u.grid().cell_volume() * s).sqrt())
}

/// Spectral Laplacian `Δu`.
pub fn laplacian(u: &ComplexField) -> ComplexField {
    let mut s = u.to_spectrum();
    s.laplacian_multiplier();
    s.into_field()
}

/// Spectral gradient, one field per axis.
///
/// For Dirichlet grids the components are returned on the same interior
/// nodes; a derivative need not vanish at the walls and is not constrained
/// there.
pub fn gradient(u: &ComplexField) -> Vec<ComplexField> {
    (0..u.grid().dim())
        .map(|axis| {
            let mut s = u.to_spectrum();
            s.gradient_multiplier(axis);
            s.into_field()
        })
        .collect()
}

/// Exact free flight `S(t)u = exp(itΔ)u` (unitary for every real `t`).
pub fn semigroup_apply(u: &ComplexField, t: f64) -> ComplexField {
    let mut s = u.to_spectrum();
    s.semigroup(t);
    s.into_field()
}

/// Project onto the 2/3-rule band: zero all modes with any axis index above
/// two thirds of the maximum resolved mode.
pub fn dealias(u: &ComplexField) -> ComplexField {
    let mut s = u.to_spectrum();
    s.dealias();
    s.into_field()
}
