//! Q-Wiener synthesis on a grid.
//!
//! The model precomputes, per axis, the values of every retained basis
//! element at the grid nodes.  Complex noise uses the exponential modes
//! `e_m(x) = exp(i·κ_m·x)/√L` for `m = −K..K`; real noise uses the
//! orthonormal trigonometric family `1/√L`, `√(2/L)·cos(κ_m·x)`,
//! `√(2/L)·sin(κ_m·x)`.  Both families have `2K+1` elements per axis and
//! enumerate the same wavenumber multiset, so their spectral weights sum to
//! the same total.  In two dimensions the basis is the tensor product and
//! synthesis proceeds in two separable stages, so the cost per increment is
//! `O(M²·n + M·n²)` for `M` elements and `n` points per axis rather than
//! `O(M²·n²)`.
//!
//! The Itô-correction weights are precomputed the same way:
//!
//! * `c(x) = Σ_k q_k·|e_k(x)|²` — constant `Σq/L^d` for these bases;
//! * `b(x) = Σ_k q_k·Im(e_k(x))·e_k(x)` — computed through the identity
//!   `Im(z)·z = (z² − |z|²)/(2i)`, which keeps the two-dimensional sum
//!   separable; it vanishes identically for the real basis.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use slogs_field_core::{ComplexField, Grid};

use crate::{GKind, NoiseCase, NoiseError, NoiseSpec, NoiseStream};

/// Basis-element values along one axis.
struct AxisTable {
    /// `rows[i][j]` = value of element `i` at axis node `j`.
    rows: Vec<Vec<Complex64>>,
    /// Squared wavenumber of each element.
    kappa_sq: Vec<f64>,
}

impl AxisTable {
    /// Complex exponential modes `m = −K..K` in ascending order.
    fn complex_modes(k_max: usize, extent: f64, coords: &[f64]) -> Self {
        let k = k_max as i64;
        let norm = 1.0 / extent.sqrt();
        let mut rows = Vec::with_capacity(2 * k_max + 1);
        let mut kappa_sq = Vec::with_capacity(2 * k_max + 1);
        for m in -k..=k {
            let kappa = std::f64::consts::TAU * m as f64 / extent;
            rows.push(
                coords
                    .iter()
                    .map(|&x| Complex64::from_polar(norm, kappa * x))
                    .collect(),
            );
            kappa_sq.push(kappa * kappa);
        }
        AxisTable { rows, kappa_sq }
    }

    /// Real trigonometric family: constant, then `cos_m, sin_m` for `m = 1..K`.
    fn real_modes(k_max: usize, extent: f64, coords: &[f64]) -> Self {
        let mut rows = Vec::with_capacity(2 * k_max + 1);
        let mut kappa_sq = Vec::with_capacity(2 * k_max + 1);
        let flat = 1.0 / extent.sqrt();
        rows.push(coords.iter().map(|_| Complex64::new(flat, 0.0)).collect());
        kappa_sq.push(0.0);
        let amp = (2.0 / extent).sqrt();
        for m in 1..=k_max {
            let kappa = std::f64::consts::TAU * m as f64 / extent;
            rows.push(
                coords
                    .iter()
                    .map(|&x| Complex64::new(amp * (kappa * x).cos(), 0.0))
                    .collect(),
            );
            kappa_sq.push(kappa * kappa);
            rows.push(
                coords
                    .iter()
                    .map(|&x| Complex64::new(amp * (kappa * x).sin(), 0.0))
                    .collect(),
            );
            kappa_sq.push(kappa * kappa);
        }
        AxisTable { rows, kappa_sq }
    }

    fn len(&self) -> usize {
        self.rows.len()
    }
}

/// Sampler and pointwise operator bundle for one noise specification on one grid.
pub struct QWienerModel {
    spec: NoiseSpec,
    grid: Grid,
    axis: AxisTable,
    /// Spectral weights: per element (1d) or per element pair, axis-0 major (2d).
    q: Vec<f64>,
    sum_q: f64,
    /// `Σ_k q_k|e_k(x)|²` per node; empty for additive noise.
    c_table: Vec<f64>,
    /// `Σ_k q_k·Im(e_k(x))·e_k(x)` per node; empty unless complex multiplicative.
    b_table: Vec<Complex64>,
}

impl QWienerModel {
    /// Validates the noise parameters against the grid and precomputes all tables.
    pub fn new(spec: NoiseSpec, grid: Grid) -> Result<Self, NoiseError> {
        spec.validate_for(&grid)?;
        let coords = grid.axis_coords();
        let axis = if spec.case.is_real() {
            AxisTable::real_modes(spec.spectrum.k_max, grid.extent(), &coords)
        } else {
            AxisTable::complex_modes(spec.spectrum.k_max, grid.extent(), &coords)
        };
        let m = axis.len();
        let a = spec.spectrum.amplitude;
        let r = spec.spectrum.decay_exponent;
        let weight = |kappa2: f64| a * (1.0 + kappa2).powf(-r);
        let q: Vec<f64> = match grid.dim() {
            1 => axis.kappa_sq.iter().map(|&k2| weight(k2)).collect(),
            2 => {
                let mut q = Vec::with_capacity(m * m);
                for &ka in &axis.kappa_sq {
                    for &kb in &axis.kappa_sq {
                        q.push(weight(ka + kb));
                    }
                }
                q
            }
            _ => unreachable!("grids are one- or two-dimensional"),
        };
        let sum_q = q.iter().sum();
        let mut model = QWienerModel {
            spec,
            grid,
            axis,
            q,
            sum_q,
            c_table: Vec::new(),
            b_table: Vec::new(),
        };
        if spec.case.is_multiplicative() {
            model.c_table = model.weighted_node_sum(|z| z.norm_sqr().into()).iter().map(|z| z.re).collect();
            if !spec.case.is_real() {
                // Im(e)·e = (e² − |e|²)/(2i); the |e|² part is the c-table.
                let squares = model.weighted_node_sum(|z| z * z);
                model.b_table = squares
                    .iter()
                    .zip(&model.c_table)
                    .map(|(s, &c)| (s - c) * Complex64::new(0.0, -0.5))
                    .collect();
            }
        }
        Ok(model)
    }

    /// Evaluates `Σ_k q_k·f(e_k(x))` at every node for a multiplicative map
    /// `f` with `f(z_a·z_b) = f(z_a)·f(z_b)`, using the separable structure.
    fn weighted_node_sum(&self, f: impl Fn(Complex64) -> Complex64) -> Vec<Complex64> {
        let m = self.axis.len();
        match self.grid.dim() {
            1 => {
                let n = self.grid.nodes_per_axis();
                let mut out = vec![Complex64::new(0.0, 0.0); n];
                for (i, row) in self.axis.rows.iter().enumerate() {
                    let qi = self.q[i];
                    for (o, &z) in out.iter_mut().zip(row) {
                        *o += qi * f(z);
                    }
                }
                out
            }
            2 => {
                let n = self.grid.nodes_per_axis();
                // inner[a][j1] = Σ_b q_ab·f(row_b[j1])
                let mut out = vec![Complex64::new(0.0, 0.0); n * n];
                for (ia, row_a) in self.axis.rows.iter().enumerate() {
                    let mut inner = vec![Complex64::new(0.0, 0.0); n];
                    for (ib, row_b) in self.axis.rows.iter().enumerate() {
                        let qab = self.q[ia * m + ib];
                        for (acc, &z) in inner.iter_mut().zip(row_b) {
                            *acc += qab * f(z);
                        }
                    }
                    for (j0, &za) in row_a.iter().enumerate() {
                        let fa = f(za);
                        for (j1, &s) in inner.iter().enumerate() {
                            out[j0 * n + j1] += fa * s;
                        }
                    }
                }
                out
            }
            _ => unreachable!(),
        }
    }

    pub fn spec(&self) -> &NoiseSpec {
        &self.spec
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn case(&self) -> NoiseCase {
        self.spec.case
    }

    pub fn g_kind(&self) -> GKind {
        self.spec.g
    }

    /// Total spectral weight `Σ_k q_k`, so that `E‖ΔW‖²_{L²} = dt·Σ_k q_k`.
    pub fn sum_q(&self) -> f64 {
        self.sum_q
    }

    /// Draws the Wiener increment for one time step.
    ///
    /// `ΔW = Σ_k √(q_k·dt)·ξ_k·e_k` with independent standard coefficients:
    /// complex-normal `ξ` (unit second absolute moment) for the complex
    /// flavours, real standard normal for real noise.  Mode block `k` draws
    /// from substream `k` of `stream`, in a fixed enumeration order, so the
    /// result is a pure function of `(stream, dt)`.
    pub fn sample_increment(
        &self,
        dt: f64,
        stream: &NoiseStream,
    ) -> Result<ComplexField, NoiseError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(NoiseError::InvalidTimeStep(dt));
        }
        let real = self.spec.case.is_real();
        let coeff = |block: u64, q: f64| -> Complex64 {
            let mut rng = stream.block_rng(block);
            let scale = (q * dt).sqrt();
            if real {
                let n: f64 = rng.sample(StandardNormal);
                Complex64::new(scale * n, 0.0)
            } else {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * (scale * std::f64::consts::FRAC_1_SQRT_2)
            }
        };
        let m = self.axis.len();
        let values = match self.grid.dim() {
            1 => {
                let n = self.grid.nodes_per_axis();
                let mut w = vec![Complex64::new(0.0, 0.0); n];
                for (i, row) in self.axis.rows.iter().enumerate() {
                    let c = coeff(i as u64, self.q[i]);
                    for (acc, &z) in w.iter_mut().zip(row) {
                        *acc += c * z;
                    }
                }
                w
            }
            2 => {
                let n = self.grid.nodes_per_axis();
                let mut w = vec![Complex64::new(0.0, 0.0); n * n];
                for (ia, row_a) in self.axis.rows.iter().enumerate() {
                    // stage[j1] = Σ_b coeff_ab·row_b[j1]
                    let mut stage = vec![Complex64::new(0.0, 0.0); n];
                    for (ib, row_b) in self.axis.rows.iter().enumerate() {
                        let idx = ia * m + ib;
                        let c = coeff(idx as u64, self.q[idx]);
                        for (acc, &z) in stage.iter_mut().zip(row_b) {
                            *acc += c * z;
                        }
                    }
                    for (j0, &za) in row_a.iter().enumerate() {
                        for (j1, &s) in stage.iter().enumerate() {
                            w[j0 * n + j1] += za * s;
                        }
                    }
                }
                w
            }
            _ => unreachable!(),
        };
        Ok(ComplexField::from_values(self.grid, values).expect("table sizes match the grid"))
    }

    /// Drift correction translating the Stratonovich-type product into Itô form.
    ///
    /// For multiplicative noise this is the pointwise field
    ///
    /// ```text
    ///   −½·c(x)·g(ρ)²·u  −  i·g(ρ)·g′(ρ)·ρ·u·b(x),      ρ = |u|²,
    /// ```
    ///
    /// with the precomputed weights `c(x) = Σ q_k|e_k(x)|²` and
    /// `b(x) = Σ q_k·Im(e_k(x))·e_k(x)`.  The second term is identically zero
    /// for real noise (real basis) and the whole correction is zero for
    /// additive noise, where the product needs no conversion.
    pub fn ito_correction(&self, u: &ComplexField) -> ComplexField {
        assert!(*u.grid() == self.grid, "field grid does not match the noise model");
        let mut out = ComplexField::zeros(self.grid);
        if !self.spec.case.is_multiplicative() {
            return out;
        }
        let g = self.spec.g;
        let vals = out.values_mut();
        for (j, (&uj, o)) in u.values().iter().zip(vals.iter_mut()).enumerate() {
            let rho = uj.norm_sqr();
            let gv = g.eval(rho);
            let mut corr = uj * (-0.5 * self.c_table[j] * gv * gv);
            if !self.b_table.is_empty() {
                let skew = Complex64::new(0.0, -1.0) * (gv * g.prime(rho) * rho);
                corr += skew * uj * self.b_table[j];
            }
            *o = corr;
        }
        out
    }

    /// Applies the diffusion coefficient to an increment: `dW` for additive
    /// noise, `i·g(|u|²)·u·dW` pointwise for multiplicative noise.
    pub fn diffusion_apply(&self, u: &ComplexField, dw: &ComplexField) -> ComplexField {
        assert!(*u.grid() == self.grid, "field grid does not match the noise model");
        assert!(*dw.grid() == self.grid, "increment grid does not match the noise model");
        if !self.spec.case.is_multiplicative() {
            return dw.clone();
        }
        let g = self.spec.g;
        let mut out = ComplexField::zeros(self.grid);
        let vals = out.values_mut();
        for ((&uj, &wj), o) in u.values().iter().zip(dw.values()).zip(vals.iter_mut()) {
            let amp = g.eval(uj.norm_sqr());
            *o = Complex64::new(0.0, amp) * uj * wj;
        }
        out
    }
}
