//! Property suites for the diagnostic layer: unitarity of the free flight
//! as seen by the mass channel, and the weighted interpolation inequality
//! exercised over large batches of random envelope fields with its derived
//! constant.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use slogs_field_core::ops::semigroup_apply;
use slogs_field_core::{Boundary, ComplexField, Grid};
use slogs_observables::{interpolation_check, interpolation_constant, mass};

/// A random superposition of one to three modulated Gaussian bumps, all
/// well inside the box so the polynomial weight behaves like its whole-line
/// counterpart.
fn envelope_field(grid: Grid, rng: &mut ChaCha12Rng) -> ComplexField {
    let bumps: usize = rng.gen_range(1..=3);
    let params: Vec<(f64, f64, f64, f64, f64)> = (0..bumps)
        .map(|_| {
            (
                rng.gen_range(0.1..2.0),   // amplitude
                rng.gen_range(-5.0..5.0),  // center
                rng.gen_range(0.2..2.0),   // width
                rng.gen_range(-4.0..4.0),  // modulation frequency
                rng.gen_range(0.0..std::f64::consts::TAU), // phase
            )
        })
        .collect();
    ComplexField::from_fn(grid, |x| {
        let mut z = Complex64::new(0.0, 0.0);
        for &(a, x0, w, k, phi) in &params {
            let env = (-((x[0] - x0) / w).powi(2)).exp();
            z += Complex64::from_polar(a * env, k * x[0] + phi);
        }
        z
    })
}

#[test]
fn mass_is_invariant_under_free_flight() {
    let grid = Grid::new(1, 40.0, 256, Boundary::PeriodicTorus).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for _ in 0..8 {
        let u = envelope_field(grid, &mut rng);
        let m0 = mass(&u);
        for t in [1e-3, 0.1, 1.0, 17.3] {
            let moved = semigroup_apply(&u, t);
            let drift = (mass(&moved) - m0).abs() / m0;
            assert!(drift <= 1e-10, "mass drifted {drift:.2e} at t = {t}");
        }
    }
}

#[test]
fn weighted_interpolation_holds_on_random_envelope_batches() {
    let grid = Grid::new(1, 40.0, 256, Boundary::PeriodicTorus).unwrap();
    let mut rng = ChaCha12Rng::seed_from_u64(31_337);
    for (alpha, eta) in [(1.0, 0.25), (0.5, 0.2)] {
        let c = interpolation_constant(1, alpha, eta).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let u = envelope_field(grid, &mut rng);
            let chk = interpolation_check(&u, alpha, eta).unwrap();
            worst = worst.max(chk.ratio);
        }
        assert!(
            worst <= c,
            "ratio {worst:.6} exceeded the derived constant {c:.6} at (α,η)=({alpha},{eta})"
        );
        // The bound must also be doing work: the batch should get within an
        // order of magnitude of it, otherwise the check is vacuous.
        assert!(
            worst >= 0.2 * c,
            "suspiciously slack bound: worst ratio {worst:.6} vs constant {c:.6}"
        );
    }
}
