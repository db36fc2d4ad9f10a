//! Monte Carlo post-processing: sample means and jackknife standard errors.
//!
//! Acceptance tolerances for statistical quantities are stated in
//! standard-error multiples, and the estimators downstream are not all
//! linear (log-log slopes, suprema of means), so the leave-one-out
//! jackknife is used uniformly:
//!
//! ```text
//! se² = (n−1)/n · Σᵢ (θ̂₍ᵢ₎ − mean θ̂₍·₎)²
//! ```
//!
//! where `θ̂₍ᵢ₎` is the statistic recomputed without sample `i`.  For the
//! plain mean this reproduces the classical `s/√n` exactly.

use crate::ObsError;

/// Sample mean together with its jackknife standard error.
///
/// Needs at least two values; a single path has no spread estimate.
pub fn jackknife_mean_se(xs: &[f64]) -> Result<(f64, f64), ObsError> {
    jackknife(xs, |v| v.iter().sum::<f64>() / v.len() as f64)
}

/// Leave-one-out jackknife for an arbitrary statistic.
///
/// Returns `(stat(xs), se)`.  The statistic is recomputed `n` times on
/// `n−1`-length views, so keep it cheap relative to the path simulations
/// that produced the samples.
pub fn jackknife(
    xs: &[f64],
    stat: impl Fn(&[f64]) -> f64,
) -> Result<(f64, f64), ObsError> {
    let n = xs.len();
    if n < 2 {
        return Err(ObsError::TooFewSamples { needs: 2, got: n });
    }
    let full = stat(xs);
    let mut loo = Vec::with_capacity(n);
    let mut scratch = Vec::with_capacity(n - 1);
    for i in 0..n {
        scratch.clear();
        scratch.extend_from_slice(&xs[..i]);
        scratch.extend_from_slice(&xs[i + 1..]);
        loo.push(stat(&scratch));
    }
    let mean_loo = loo.iter().sum::<f64>() / n as f64;
    let var = loo.iter().map(|v| (v - mean_loo).powi(2)).sum::<f64>() * (n - 1) as f64
        / n as f64;
    Ok((full, var.sqrt()))
}
