//! Discrete complex scalar fields on rectangular boxes, with pseudospectral
//! calculus for Schrödinger-type evolution.
//!
//! A [`Grid`] fixes the box `[-L/2, L/2)^d`, `d ∈ {1, 2}`, sampled at `N`
//! equispaced nodes per axis on the periodic torus, or at the `N - 1`
//! interior nodes per axis between homogeneous Dirichlet walls.
//! [`ComplexField`] carries the nodal values. All calculus —
//! [`ops::laplacian`], [`ops::gradient`], the free-flight group
//! [`ops::semigroup_apply`] realizing `u ↦ exp(itΔ)u`, and 2/3-rule
//! [`ops::dealias`] — is spectral:
//!
//! * torus: plain DFT with wavenumbers `κ_m = 2πm/L`, `m ∈ [-N/2, N/2)`;
//! * Dirichlet: odd extension to a `2L`-periodic torus (exact discrete sine
//!   transform semantics), so the eigenmodes are `sin(mπ(x + L/2)/L)` with
//!   eigenvalues `-(mπ/L)²` and boundary zeros survive every even spectral
//!   multiplier bit-exactly in structure.
//!
//! Quadrature is the rectangle rule on cells of exact volume `(L/N)^d`; the
//! real pairing is `⟨u, v⟩ = cell_volume · Σ_j Re(u_j · conj(v_j))`.

use num_complex::Complex64;
use thiserror::Error;

pub mod ops;
mod spectral;

pub use spectral::{FieldSpectrum, SobolevNorms};

/// Errors from grid construction, field construction, and parameterized norms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("value buffer has length {got} but the grid has {want} nodes")]
    LengthMismatch { got: usize, want: usize },
    #[error("invalid norm parameter: {0}")]
    InvalidNormParameter(String),
}

/// Boundary behavior of the box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    /// Opposite faces identified; fields are `L`-periodic per axis.
    PeriodicTorus,
    /// The field vanishes on the walls `x_axis = ±L/2`; only interior nodes
    /// are stored.
    HomogeneousDirichlet,
}

/// Uniform tensor grid on `[-L/2, L/2)^d`.
///
/// `points_per_axis` is the resolution `N` (a power of two, ≥ 8). The torus
/// stores `N` nodes per axis at `x_j = -L/2 + j·(L/N)`; the Dirichlet box
/// stores the `N - 1` interior nodes (`j = 1..N-1`), with the walls pinned
/// to zero implicitly. Cell volume is exactly `(L/N)^d` in both cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    extent: f64,
    n: usize,
    boundary: Boundary,
}

impl Grid {
    /// Validating constructor.
    pub fn new(dim: usize, extent: f64, n: usize, boundary: Boundary) -> Result<Self, FieldError> {
        if dim != 1 && dim != 2 {
            return Err(FieldError::InvalidGrid(format!(
                "dim must be 1 or 2, got {dim}"
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(FieldError::InvalidGrid(format!(
                "extent_per_axis must be positive and finite, got {extent}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(FieldError::InvalidGrid(format!(
                "points_per_axis must be a power of two ≥ 8, got {n}"
            )));
        }
        Ok(Grid {
            dim,
            extent,
            n,
            boundary,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Box edge length `L` (same on every axis).
    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Resolution `N` per axis.
    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Grid spacing `h = L/N`.
    pub fn spacing(&self) -> f64 {
        self.extent / self.n as f64
    }

    /// Quadrature cell volume, exactly `(L/N)^d`.
    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        match self.dim {
            1 => h,
            _ => h * h,
        }
    }

    /// Stored nodes per axis: `N` on the torus, `N - 1` between Dirichlet walls.
    pub fn nodes_per_axis(&self) -> usize {
        match self.boundary {
            Boundary::PeriodicTorus => self.n,
            Boundary::HomogeneousDirichlet => self.n - 1,
        }
    }

    /// Total node count `nodes_per_axis::pow(dim)`.
    pub fn node_count(&self) -> usize {
        self.nodes_per_axis().pow(self.dim as u32)
    }

    /// Node coordinates along one axis (identical for every axis).
    pub fn axis_coords(&self) -> Vec<f64> {
        let h = self.spacing();
        let start = -0.5 * self.extent;
        match self.boundary {
            Boundary::PeriodicTorus => (0..self.n).map(|j| start + j as f64 * h).collect(),
            Boundary::HomogeneousDirichlet => {
                (1..self.n).map(|j| start + j as f64 * h).collect()
            }
        }
    }

    /// Squared distance from the box center, `|x_j|²`, for every node in
    /// storage order (axis 0 slowest).
    pub fn node_radius_sq(&self) -> Vec<f64> {
        let ax = self.axis_coords();
        match self.dim {
            1 => ax.iter().map(|x| x * x).collect(),
            _ => {
                let na = ax.len();
                let mut out = Vec::with_capacity(na * na);
                for x in &ax {
                    for y in &ax {
                        out.push(x * x + y * y);
                    }
                }
                out
            }
        }
    }
}

/// Complex scalar field sampled on a [`Grid`].
///
/// Storage is row-major with axis 0 slowest: in 2-d, node `(j0, j1)` lives at
/// `values[j0 * nodes_per_axis + j1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    /// The zero field.
    pub fn zeros(grid: Grid) -> Self {
        ComplexField {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.node_count()],
        }
    }

    /// Wrap an existing value buffer; its length must match the node count.
    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self, FieldError> {
        if values.len() != grid.node_count() {
            return Err(FieldError::LengthMismatch {
                got: values.len(),
                want: grid.node_count(),
            });
        }
        Ok(ComplexField { grid, values })
    }

    /// Sample a closure of the node coordinates (slice of length `dim`).
    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> Complex64) -> Self {
        let ax = grid.axis_coords();
        let mut values = Vec::with_capacity(grid.node_count());
        match grid.dim() {
            1 => {
                for x in &ax {
                    values.push(f(&[*x]));
                }
            }
            _ => {
                for x in &ax {
                    for y in &ax {
                        values.push(f(&[*x, *y]));
                    }
                }
            }
        }
        ComplexField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// True iff every real and imaginary part is finite.
    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// In-place `self ← self + c·rhs`.
    ///
    /// Panics if the grids differ: fields from different grids can only meet
    /// through a wiring bug, never through user configuration (configs are
    /// validated before any field exists).
    pub fn axpy(&mut self, c: Complex64, rhs: &Self) {
        assert_eq!(
            self.grid, rhs.grid,
            "axpy combined fields living on different grids"
        );
        for (a, b) in self.values.iter_mut().zip(rhs.values.iter()) {
            *a += c * b;
        }
    }

    /// In-place scalar multiplication.
    pub fn scale(&mut self, c: Complex64) {
        for a in self.values.iter_mut() {
            *a *= c;
        }
    }

    /// Forward transform to the spectral side (see [`FieldSpectrum`]).
    pub fn to_spectrum(&self) -> FieldSpectrum {
        FieldSpectrum::forward(self)
    }
}
