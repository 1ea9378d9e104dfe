//! Discrete periodic fields on the square torus `[0, 2π)²`.
//!
//! A field is sampled on an `n × n` uniform lattice with spacing `h = 2π/n`,
//! stored row-major: the sample at `(x₁, x₂) = (h·i₁, h·i₂)` lives at index
//! `i₂·n + i₁`. Spectral data uses the natural FFT ordering in each axis,
//! with integer wavenumbers `{0, 1, …, n/2, −n/2+1, …, −1}`.

use num_complex::Complex64;
use thiserror::Error;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("grid size must be even and at least 8, got {0}")]
    BadGridSize(usize),
    #[error("expected {expected} samples for an n={n} grid, got {got}")]
    LengthMismatch { n: usize, expected: usize, got: usize },
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("fields live on different grids ({0} vs {1})")]
    GridMismatch(usize, usize),
}

/// The period cell `[0, 2π)²` sampled on `n` points per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self, FieldError> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(FieldError::BadGridSize(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `h = 2π/n`.
    #[inline]
    pub fn h(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed integer wavenumber for FFT-ordered index `i`,
    /// in `{−n/2+1, …, n/2}`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        debug_assert!(i < self.n);
        if i <= self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Physical coordinate of lattice index `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.h() * i as f64
    }

    #[inline]
    pub fn idx(&self, i1: usize, i2: usize) -> usize {
        i2 * self.n + i1
    }
}

/// Real samples of a scalar function on a [`TorusGrid`], row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                n: grid.n(),
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    /// Field skipping the finiteness check; internal stages that provably
    /// preserve finiteness use this to avoid the scan.
    pub(crate) fn new_unchecked(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Sample `f(x₁, x₂)` on the lattice.
    pub fn from_fn<F: FnMut(f64, f64) -> f64>(grid: TorusGrid, mut f: F) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i2 in 0..n {
            let x2 = grid.coord(i2);
            for i1 in 0..n {
                values.push(f(grid.coord(i1), x2));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[self.grid.idx(i1, i2)]
    }

    /// `‖f‖∞` over the lattice.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L²` norm `(h² Σ f²)^{1/2}`, consistent with the continuum
    /// norm on `[0,2π)²`.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.values.iter().map(|v| v * v).sum();
        self.grid.h() * sum.sqrt()
    }

    /// Discrete inner product `h² Σ f·g`.
    pub fn inner(&self, other: &Self) -> Result<f64, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch(self.grid.n(), other.grid.n()));
        }
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum();
        Ok(self.grid.h() * self.grid.h() * sum)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }
}

/// Complex Fourier coefficients of a field, FFT-ordered in both axes.
///
/// Coefficients are amplitudes of `e^{i k·x}`: the represented function is
/// `f(x) = Σ_k c(k) e^{i k·x}`. With this convention the discrete Parseval
/// identity reads `h² Σ_x |f(x)|² = (2π)² Σ_k |c(k)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self, FieldError> {
        if coeffs.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                n: grid.n(),
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        if let Some(index) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(FieldError::NonFinite { index });
        }
        Ok(Self { grid, coeffs })
    }

    pub(crate) fn new_unchecked(grid: TorusGrid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at signed wavenumber `(k₁, k₂)`.
    pub fn coeff_at(&self, k1: i64, k2: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let i1 = k1.rem_euclid(n) as usize;
        let i2 = k2.rem_euclid(n) as usize;
        self.coeffs[self.grid.idx(i1, i2)]
    }

    pub fn coeff_at_mut(&mut self, k1: i64, k2: i64) -> &mut Complex64 {
        let n = self.grid.n() as i64;
        let i1 = k1.rem_euclid(n) as usize;
        let i2 = k2.rem_euclid(n) as usize;
        let idx = self.grid.idx(i1, i2);
        &mut self.coeffs[idx]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest deviation from Hermitian symmetry `c(−k) = conj(c(k))`,
    /// relative to the largest coefficient modulus. Zero for spectra of
    /// real fields, up to rounding.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i2 in 0..n {
            let j2 = (n - i2) % n;
            for i1 in 0..n {
                let j1 = (n - i1) % n;
                let a = self.coeffs[self.grid.idx(i1, i2)];
                let b = self.coeffs[self.grid.idx(j1, j2)];
                worst = worst.max((a - b.conj()).norm());
            }
        }
        worst / scale
    }
}

/// Two-component velocity field in physical space.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    pub u1: ScalarField,
    pub u2: ScalarField,
}

impl VelocityField {
    pub fn grid(&self) -> TorusGrid {
        self.u1.grid()
    }

    /// Pointwise Euclidean sup norm `max_x |u(x)|`.
    pub fn sup_norm(&self) -> f64 {
        self.u1
            .values()
            .iter()
            .zip(self.u2.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}
