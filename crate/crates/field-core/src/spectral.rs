//! Spectral backend: cached FFT plans, wavenumber tables, and the
//! [`FieldSpectrum`] type every spectral operation flows through.
//!
//! Torus fields transform with a plain length-`N` DFT per axis. Dirichlet
//! fields are oddly extended to a `2L`-periodic torus of `2N` points per
//! axis; odd symmetry is preserved by every even multiplier (`-κ²`,
//! `exp(-iκ²t)`, the dealias mask), so restricting back to the interior
//! nodes realizes exact sine-basis calculus. Norms of the extension are
//! `2^d` times the norms on the box.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use crate::{Boundary, ComplexField, Grid};

/// Per-axis transform tables for one `(boundary, N, L)` combination.
struct AxisTables {
    /// Transform length per axis: `N` (torus) or `2N` (odd extension).
    tlen: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Physical wavenumber per transform index: `2π·m(j)/period` with the
    /// signed mode map `m(j) = j` for `j < tlen/2`, else `j - tlen`.
    kappa: Vec<f64>,
    /// 2/3-rule keep mask per transform index.
    keep: Vec<bool>,
}

type TableKey = (u8, usize, u64);

static TABLES: Lazy<Mutex<HashMap<TableKey, Arc<AxisTables>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn boundary_tag(b: Boundary) -> u8 {
    match b {
        Boundary::PeriodicTorus => 0,
        Boundary::HomogeneousDirichlet => 1,
    }
}

fn axis_tables(grid: &Grid) -> Arc<AxisTables> {
    let key: TableKey = (
        boundary_tag(grid.boundary()),
        grid.points_per_axis(),
        grid.extent().to_bits(),
    );
    let mut map = TABLES.lock().expect("spectral table registry poisoned");
    if let Some(t) = map.get(&key) {
        return Arc::clone(t);
    }
    let n = grid.points_per_axis();
    let (tlen, period, mode_keep_max) = match grid.boundary() {
        // max |m| = N/2, keep |m| ≤ (2/3)·(N/2) = N/3
        Boundary::PeriodicTorus => (n, grid.extent(), n / 3),
        // sine modes m = 1..N-1 on the doubled torus; keep m ≤ (2/3)·(N-1)
        Boundary::HomogeneousDirichlet => (2 * n, 2.0 * grid.extent(), 2 * (n - 1) / 3),
    };
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(tlen);
    let inv = planner.plan_fft_inverse(tlen);
    let base = 2.0 * std::f64::consts::PI / period;
    let mut kappa = Vec::with_capacity(tlen);
    let mut keep = Vec::with_capacity(tlen);
    for j in 0..tlen {
        let m = if j < tlen / 2 {
            j as i64
        } else {
            j as i64 - tlen as i64
        };
        kappa.push(base * m as f64);
        keep.push(m.unsigned_abs() as usize <= mode_keep_max);
    }
    let tables = Arc::new(AxisTables {
        tlen,
        fwd,
        inv,
        kappa,
        keep,
    });
    map.insert(key, Arc::clone(&tables));
    tables
}

/// Run an already-planned FFT along every axis of a row-major square array.
fn transform_axes(data: &mut [Complex64], tlen: usize, dim: usize, fft: &Arc<dyn Fft<f64>>) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    match dim {
        1 => fft.process_with_scratch(data, &mut scratch),
        _ => {
            for row in data.chunks_exact_mut(tlen) {
                fft.process_with_scratch(row, &mut scratch);
            }
            transpose_square(data, tlen);
            for row in data.chunks_exact_mut(tlen) {
                fft.process_with_scratch(row, &mut scratch);
            }
            transpose_square(data, tlen);
        }
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Odd-extension index map for one axis: transform index → (sign, source
/// node index). `None` marks the pinned zeros at the walls.
fn odd_extension_map(n: usize) -> Vec<Option<(f64, usize)>> {
    let tlen = 2 * n;
    let mut map = Vec::with_capacity(tlen);
    for a in 0..tlen {
        map.push(match a {
            0 => None,
            a if a < n => Some((1.0, a - 1)),
            a if a == n => None,
            a => Some((-1.0, 2 * n - a - 1)),
        });
    }
    map
}

/// `L²`, gradient, and Laplacian seminorms read off a spectrum by Parseval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevNorms {
    /// `‖u‖²` (squared L² norm).
    pub l2_sq: f64,
    /// `‖∇u‖²` summed over axes.
    pub grad_sq: f64,
    /// `‖Δu‖²`.
    pub lap_sq: f64,
}

impl SobolevNorms {
    pub fn l2(&self) -> f64 {
        self.l2_sq.sqrt()
    }

    /// `(‖u‖² + ‖∇u‖²)^{1/2}`.
    pub fn h1(&self) -> f64 {
        (self.l2_sq + self.grad_sq).sqrt()
    }

    /// `(‖u‖² + ‖∇u‖² + ‖Δu‖²)^{1/2}`.
    pub fn h2(&self) -> f64 {
        (self.l2_sq + self.grad_sq + self.lap_sq).sqrt()
    }
}

/// A field on the spectral side: unnormalized forward DFT coefficients of
/// the (possibly odd-extended) nodal values.
///
/// Cheap diagonal operations — free flight, Laplacian/gradient multipliers,
/// dealiasing, Parseval norms — happen here; [`FieldSpectrum::into_field`]
/// transforms back (normalizing and restricting to interior nodes for
/// Dirichlet grids).
#[derive(Clone)]
pub struct FieldSpectrum {
    grid: Grid,
    tables: Arc<AxisTables>,
    data: Vec<Complex64>,
}

impl FieldSpectrum {
    pub(crate) fn forward(u: &ComplexField) -> FieldSpectrum {
        let grid = *u.grid();
        let tables = axis_tables(&grid);
        let tlen = tables.tlen;
        let dim = grid.dim();
        let mut data = match grid.boundary() {
            Boundary::PeriodicTorus => u.values().to_vec(),
            Boundary::HomogeneousDirichlet => {
                let na = grid.nodes_per_axis();
                let map = odd_extension_map(grid.points_per_axis());
                let mut ext = vec![Complex64::new(0.0, 0.0); tlen.pow(dim as u32)];
                match dim {
                    1 => {
                        for (a, e) in map.iter().enumerate() {
                            if let Some((s, j)) = e {
                                ext[a] = u.values()[*j] * *s;
                            }
                        }
                    }
                    _ => {
                        for (a0, e0) in map.iter().enumerate() {
                            let Some((s0, j0)) = e0 else { continue };
                            for (a1, e1) in map.iter().enumerate() {
                                if let Some((s1, j1)) = e1 {
                                    ext[a0 * tlen + a1] = u.values()[j0 * na + j1] * (s0 * s1);
                                }
                            }
                        }
                    }
                }
                ext
            }
        };
        transform_axes(&mut data, tlen, dim, &tables.fwd);
        FieldSpectrum { grid, tables, data }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Multiply every mode by `exp(-i|κ|²t)`: the exact free flight
    /// `u ↦ exp(itΔ)u` over time `t` (any sign).
    pub fn semigroup(&mut self, t: f64) {
        self.apply_mode_fn(|k2| Complex64::cis(-k2 * t));
    }

    /// Multiply every mode by `-|κ|²` (the Laplacian symbol).
    pub fn laplacian_multiplier(&mut self) {
        self.apply_mode_fn(|k2| Complex64::new(-k2, 0.0));
    }

    /// Scale every mode by a constant.
    pub fn scale(&mut self, c: Complex64) {
        for z in &mut self.data {
            *z *= c;
        }
    }

    /// `self += c·rhs`, mode by mode.  Panics if the grids differ.
    pub fn axpy(&mut self, c: Complex64, rhs: &Self) {
        assert!(self.grid == rhs.grid, "spectra live on different grids");
        for (z, r) in self.data.iter_mut().zip(&rhs.data) {
            *z += c * r;
        }
    }

    /// Multiply every mode by `iκ_axis` (the partial-derivative symbol).
    pub fn gradient_multiplier(&mut self, axis: usize) {
        assert!(axis < self.grid.dim(), "gradient axis out of range");
        let tlen = self.tables.tlen;
        let kappa = &self.tables.kappa;
        match self.grid.dim() {
            1 => {
                for (j, z) in self.data.iter_mut().enumerate() {
                    *z *= Complex64::new(0.0, kappa[j]);
                }
            }
            _ => {
                for a0 in 0..tlen {
                    for a1 in 0..tlen {
                        let k = if axis == 0 { kappa[a0] } else { kappa[a1] };
                        self.data[a0 * tlen + a1] *= Complex64::new(0.0, k);
                    }
                }
            }
        }
    }

    /// Zero every mode outside the 2/3-rule mask (per axis).
    pub fn dealias(&mut self) {
        let tlen = self.tables.tlen;
        let keep = &self.tables.keep;
        match self.grid.dim() {
            1 => {
                for (j, z) in self.data.iter_mut().enumerate() {
                    if !keep[j] {
                        *z = Complex64::new(0.0, 0.0);
                    }
                }
            }
            _ => {
                for a0 in 0..tlen {
                    for a1 in 0..tlen {
                        if !keep[a0] || !keep[a1] {
                            self.data[a0 * tlen + a1] = Complex64::new(0.0, 0.0);
                        }
                    }
                }
            }
        }
    }

    /// Parseval norms of the field this spectrum represents (box norms, not
    /// extension norms).
    pub fn sobolev_norms(&self) -> SobolevNorms {
        let tlen = self.tables.tlen;
        let kappa = &self.tables.kappa;
        let dim = self.grid.dim();
        let mut s0 = 0.0;
        let mut s1 = 0.0;
        let mut s2 = 0.0;
        match dim {
            1 => {
                for (j, z) in self.data.iter().enumerate() {
                    let k2 = kappa[j] * kappa[j];
                    let a = z.norm_sqr();
                    s0 += a;
                    s1 += k2 * a;
                    s2 += k2 * k2 * a;
                }
            }
            _ => {
                for a0 in 0..tlen {
                    let kx2 = kappa[a0] * kappa[a0];
                    for a1 in 0..tlen {
                        let k2 = kx2 + kappa[a1] * kappa[a1];
                        let a = self.data[a0 * tlen + a1].norm_sqr();
                        s0 += a;
                        s1 += k2 * a;
                        s2 += k2 * k2 * a;
                    }
                }
            }
        }
        let mut scale = self.grid.cell_volume() / (tlen.pow(dim as u32) as f64);
        if self.grid.boundary() == Boundary::HomogeneousDirichlet {
            // The odd extension carries 2^d copies of the box energy.
            scale /= (1 << dim) as f64;
        }
        SobolevNorms {
            l2_sq: s0 * scale,
            grad_sq: s1 * scale,
            lap_sq: s2 * scale,
        }
    }

    /// Inverse transform back to nodal values.
    pub fn into_field(mut self) -> ComplexField {
        let tlen = self.tables.tlen;
        let dim = self.grid.dim();
        transform_axes(&mut self.data, tlen, dim, &self.tables.inv);
        let norm = 1.0 / (tlen.pow(dim as u32) as f64);
        match self.grid.boundary() {
            Boundary::PeriodicTorus => {
                for z in self.data.iter_mut() {
                    *z *= norm;
                }
                ComplexField::from_values(self.grid, self.data)
                    .expect("torus spectrum length matches its grid")
            }
            Boundary::HomogeneousDirichlet => {
                let na = self.grid.nodes_per_axis();
                let mut values = Vec::with_capacity(self.grid.node_count());
                match dim {
                    1 => {
                        for a in 1..=na {
                            values.push(self.data[a] * norm);
                        }
                    }
                    _ => {
                        for a0 in 1..=na {
                            for a1 in 1..=na {
                                values.push(self.data[a0 * tlen + a1] * norm);
                            }
                        }
                    }
                }
                ComplexField::from_values(self.grid, values)
                    .expect("restricted extension length matches its grid")
            }
        }
    }

    fn apply_mode_fn(&mut self, f: impl Fn(f64) -> Complex64) {
        let tlen = self.tables.tlen;
        let kappa = &self.tables.kappa;
        match self.grid.dim() {
            1 => {
                for (j, z) in self.data.iter_mut().enumerate() {
                    *z *= f(kappa[j] * kappa[j]);
                }
            }
            _ => {
                for a0 in 0..tlen {
                    let kx2 = kappa[a0] * kappa[a0];
                    for a1 in 0..tlen {
                        self.data[a0 * tlen + a1] *= f(kx2 + kappa[a1] * kappa[a1]);
                    }
                }
            }
        }
    }
}
