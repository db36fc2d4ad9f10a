//! Weighted least-squares power-law fitting on log-log axes.
//!
//! Every rate reported by the experiment drivers — convergence order in the
//! regularization parameter, temporal Hölder exponent, moment growth — is
//! the slope of `log y` against `log x`.  Points carry standard errors on
//! `y`; these become log-scale weights by the delta method
//! (`σ_log ≈ y_err / y`).  If any point arrives with a zero error bar the
//! fit falls back to uniform weights, so deterministic data is fitted
//! plainly instead of dividing by zero.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("power-law fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("abscissae must be strictly monotone")]
    NonMonotone,
    #[error("log-log fit needs positive data, got (x, y) = ({x}, {y})")]
    NonPositive { x: f64, y: f64 },
    #[error("standard errors must be finite and nonnegative, got {0}")]
    BadError(f64),
}

/// A fitted power law `y ≈ e^{intercept} · x^{slope}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Weighted coefficient of determination on the log residuals; `1` for
    /// an exact fit (including the degenerate all-equal-`y` case).
    pub r_squared: f64,
    /// Standard error of the slope from the weighted normal equations,
    /// scaled by the residual variance (`n − 2` degrees of freedom).
    pub slope_stderr: f64,
}

/// Fits `log y = intercept + slope · log x` by weighted least squares over
/// `(x, y, y_err)` triples.
///
/// Requirements: at least three points, strictly monotone positive `x`,
/// positive `y`, finite nonnegative `y_err`.
pub fn fit_loglog_slope(points: &[(f64, f64, f64)]) -> Result<FitResult, FitError> {
    let n = points.len();
    if n < 3 {
        return Err(FitError::TooFewPoints(n));
    }
    for w in points.windows(2) {
        let increasing = points[1].0 > points[0].0;
        let ok = if increasing {
            w[1].0 > w[0].0
        } else {
            w[1].0 < w[0].0
        };
        if !ok {
            return Err(FitError::NonMonotone);
        }
    }
    for &(x, y, e) in points {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(FitError::NonPositive { x, y });
        }
        if !(e >= 0.0 && e.is_finite()) {
            return Err(FitError::BadError(e));
        }
    }

    let uniform = points.iter().any(|&(_, _, e)| e == 0.0);
    let pts: Vec<(f64, f64, f64)> = points
        .iter()
        .map(|&(x, y, e)| {
            let w = if uniform { 1.0 } else { (y / e) * (y / e) };
            (x.ln(), y.ln(), w)
        })
        .collect();

    let sw: f64 = pts.iter().map(|p| p.2).sum();
    let xbar = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / sw;
    let ybar = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / sw;
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - xbar).powi(2)).sum();
    let sxy: f64 = pts
        .iter()
        .map(|p| p.2 * (p.0 - xbar) * (p.1 - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;

    let rss: f64 = pts
        .iter()
        .map(|p| p.2 * (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let tss: f64 = pts.iter().map(|p| p.2 * (p.1 - ybar).powi(2)).sum();
    let r_squared = if tss <= f64::EPSILON * sw {
        1.0
    } else {
        1.0 - rss / tss
    };
    let resid_var = rss / (n as f64 - 2.0);
    let slope_stderr = (resid_var / sxx).sqrt();

    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        slope_stderr,
    })
}
