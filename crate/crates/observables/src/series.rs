//! Time series of named scalar channels along one path, and the recorder
//! that fills one from solver callbacks.

use crate::ObsError;
use slogs_regularization::EquationSpec;
use slogs_solver::{PathState, PathStatus};

/// The standard channel set, in column order: mass `M`, kinetic energy `K`,
/// regularized entropy `F_ε`, modified energy `H_ε = K − (λ/2)F_ε`, the
/// `ℍ¹`/`ℍ²` norms, and the weighted norm `‖·‖_{L²_α}`.
pub const CHANNELS: [&str; 7] = [
    "mass", "kinetic", "entropy", "energy", "h1", "h2", "l2_alpha",
];

/// A matrix of diagnostics: one row per sampled time, one column per named
/// channel.  Times are strictly increasing and every stored row is finite —
/// the recorder never emits rows from blown-up or stalled states.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    names: Vec<String>,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl ObservableSeries {
    pub fn new(names: Vec<String>) -> Self {
        assert!(!names.is_empty(), "a series needs at least one channel");
        ObservableSeries {
            names,
            times: Vec::new(),
            rows: Vec::new(),
        }
    }

    /// Appends one sample.  Shape or ordering violations are wiring bugs in
    /// the caller (the recorder), so they panic rather than return.
    pub fn push(&mut self, t: f64, row: Vec<f64>) {
        assert_eq!(row.len(), self.names.len(), "row width ≠ channel count");
        assert!(
            row.iter().all(|v| v.is_finite()),
            "non-finite observable row at t = {t}"
        );
        if let Some(last) = self.times.last() {
            assert!(t > *last, "series times must increase: {t} after {last}");
        }
        self.times.push(t);
        self.rows.push(row);
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// One channel as a column vector, `None` for an unknown name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Supremum of one channel over the sampled times (a lower bound on the
    /// path supremum, since sampling is stride-limited).
    pub fn column_max(&self, name: &str) -> Option<f64> {
        let col = self.column(name)?;
        col.into_iter().reduce(f64::max)
    }

    /// CSV rendering: header `time,<channels>`, one row per sample, `.` as
    /// the decimal separator, 17 significant digits (round-trip exact).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for (t, row) in self.times.iter().zip(&self.rows) {
            out.push_str(&format!("{t:.17e}"));
            for v in row {
                out.push_str(&format!(",{v:.17e}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Samples the standard channels from solver states at a fixed stride.
///
/// Feed [`SeriesRecorder::record`] to `Solver::evolve` as the observer.  The
/// initial state (step 0) and the terminal step are always sampled; interior
/// steps are sampled when the step index is a multiple of the stride.
/// States that stopped being useful — blow-up (non-finite data) or a stalled
/// midpoint iteration (time did not advance) — are skipped, so a recorded
/// series is always finite with strictly increasing times, and a path that
/// died early is visible as a series that ends before `t_end`.
///
/// All channels are read off `PathState::norms` and pointwise sums; no
/// extra Fourier transforms are performed.
#[derive(Debug, Clone)]
pub struct SeriesRecorder {
    eq: EquationSpec,
    alpha: f64,
    stride: u64,
    total_steps: u64,
    series: ObservableSeries,
}

impl SeriesRecorder {
    /// `alpha` is the exponent of the `l2_alpha` channel; `stride` counts
    /// steps between interior samples; `total_steps` marks the terminal
    /// index that is always sampled.
    pub fn new(
        eq: EquationSpec,
        alpha: f64,
        stride: u64,
        total_steps: u64,
    ) -> Result<Self, ObsError> {
        if stride == 0 {
            return Err(ObsError::ZeroStride);
        }
        if !(alpha.is_finite() && alpha > 0.0 && alpha <= 2.0) {
            return Err(ObsError::InvalidAlpha { alpha });
        }
        let names = CHANNELS.iter().map(|s| s.to_string()).collect();
        Ok(SeriesRecorder {
            eq,
            alpha,
            stride,
            total_steps,
            series: ObservableSeries::new(names),
        })
    }

    /// The default sampling policy: `α = 1`, every 10th step.
    pub fn standard(eq: EquationSpec, total_steps: u64) -> Self {
        Self::new(eq, 1.0, 10, total_steps).expect("default parameters are valid")
    }

    /// Observer body: decide whether this state is due, then append a row.
    pub fn record(&mut self, state: &PathState) {
        let due = state.step_index == 0
            || state.step_index == self.total_steps
            || state.step_index % self.stride == 0;
        if !due {
            return;
        }
        match state.status {
            PathStatus::Running | PathStatus::Finished => {}
            // Blow-up states carry non-finite data; a failed midpoint solve
            // leaves time unadvanced.  Neither yields a valid row.
            PathStatus::BlowUp | PathStatus::NoConvergence => return,
        }
        let n = &state.norms;
        let entropy = self.eq.reg().entropy(&state.u);
        let kinetic = 0.5 * n.grad_sq;
        let row = vec![
            n.l2_sq,
            kinetic,
            entropy,
            kinetic - 0.5 * self.eq.lambda() * entropy,
            n.h1(),
            n.h2(),
            slogs_field_core::ops::norm_l2_alpha(&state.u, self.alpha)
                .expect("α validated at construction"),
        ];
        self.series.push(state.t, row);
    }

    pub fn series(&self) -> &ObservableSeries {
        &self.series
    }

    pub fn into_series(self) -> ObservableSeries {
        self.series
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use num_complex::Complex64;
    use slogs_field_core::{Boundary, ComplexField, Grid};
    use slogs_noise::{GKind, NoiseCase, NoiseSpec, QWienerModel, SpectrumSpec};
    use slogs_regularization::RegKind;
    use slogs_solver::{Scheme, Solver, SolverConfig};

    const TAU: f64 = std::f64::consts::TAU;

    #[test]
    fn series_accessors_and_csv_shape() {
        let mut s = ObservableSeries::new(vec!["a".into(), "b".into()]);
        s.push(0.0, vec![1.0, 2.0]);
        s.push(0.5, vec![3.0, 4.0]);
        assert_eq!(s.len(), 2);
        assert_eq!(s.column("b"), Some(vec![2.0, 4.0]));
        assert_eq!(s.column("missing"), None);
        assert_eq!(s.column_max("a"), Some(3.0));

        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("time,a,b"));
        assert_eq!(lines.count(), 2);
        assert!(csv.starts_with("time,a,b\n0."));
    }

    #[test]
    #[should_panic(expected = "must increase")]
    fn series_rejects_non_increasing_times() {
        let mut s = ObservableSeries::new(vec!["a".into()]);
        s.push(1.0, vec![0.0]);
        s.push(1.0, vec![0.0]);
    }

    #[test]
    #[should_panic(expected = "non-finite")]
    fn series_rejects_nan_rows() {
        let mut s = ObservableSeries::new(vec!["a".into()]);
        s.push(0.0, vec![f64::NAN]);
    }

    #[test]
    fn recorder_validates_parameters() {
        let eq = EquationSpec::new(-1.0, RegKind::log_shift(1e-2).unwrap()).unwrap();
        assert_eq!(
            SeriesRecorder::new(eq, 1.0, 0, 10).unwrap_err(),
            ObsError::ZeroStride
        );
        assert!(matches!(
            SeriesRecorder::new(eq, 3.0, 10, 10),
            Err(ObsError::InvalidAlpha { .. })
        ));
    }

    #[test]
    fn recorder_samples_stride_endpoints_and_constant_mass() {
        let grid = Grid::new(1, TAU, 64, Boundary::PeriodicTorus).unwrap();
        let eq = EquationSpec::new(0.0, RegKind::log_shift(1e-2).unwrap()).unwrap();
        let noise = QWienerModel::new(
            NoiseSpec {
                case: NoiseCase::MultiplicativeReal,
                spectrum: SpectrumSpec {
                    decay_exponent: 3.0,
                    amplitude: 0.0,
                    k_max: 4,
                },
                g: GKind::Rational { c: 1.0 },
                master_seed: 7,
            },
            grid,
        )
        .unwrap();
        let dt = 1e-3;
        let solver = Solver::new(eq, noise, SolverConfig::new(Scheme::SplitStep, dt, 10.0 * dt))
            .unwrap();
        let u0 = ComplexField::from_fn(grid, |x| {
            Complex64::new(x[0].sin() + 0.3, 0.1 * x[0].cos())
        });

        let mut rec = SeriesRecorder::new(eq, 1.0, 3, solver.steps()).unwrap();
        solver.evolve(&u0, 0, |s| rec.record(s)).unwrap();
        let series = rec.into_series();

        // Steps 0, 3, 6, 9 by stride plus the terminal step 10.
        let expect: Vec<f64> = [0u64, 3, 6, 9, 10].iter().map(|k| *k as f64 * dt).collect();
        assert_eq!(series.times().len(), expect.len());
        for (got, want) in series.times().iter().zip(&expect) {
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }

        // λ = 0 and zero-amplitude noise: pure free flight, so the mass
        // channel is flat to round-off.
        let masses = series.column("mass").unwrap();
        for m in &masses {
            assert_relative_eq!(*m, masses[0], max_relative = 1e-12);
        }
        // Energy column is consistent with its definition at λ = 0: H = K.
        let k = series.column("kinetic").unwrap();
        let h = series.column("energy").unwrap();
        for (a, b) in k.iter().zip(&h) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }
}
