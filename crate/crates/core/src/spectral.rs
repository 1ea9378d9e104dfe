//! Fourier transforms and Fourier-multiplier operators on torus fields.
//!
//! Conventions (these fix every golden value in the test suite):
//!
//! * Coefficients are amplitudes of `e^{i k·x}`; `to_spectral` divides the
//!   unnormalized forward DFT by `n²`, `from_spectral` is the unnormalized
//!   inverse DFT. Parseval then carries the `(2π)²` measure factor of the
//!   period cell.
//! * Riesz transforms act as `c(k) ↦ (−i k_j/|k|)·c(k)` with the `k = 0`
//!   coefficient annihilated: they are defined on mean-zero functions, and
//!   a constant offset of θ affects neither the velocity nor ∇θ.
//! * Odd multipliers must not touch lattice modes without a conjugate
//!   partner: the gradient zeroes the Nyquist mode of the differentiated
//!   axis, and the Riesz transforms zero the whole Nyquist cross (see
//!   [`riesz`]). Dealiased dynamics never populate those modes.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};

use crate::grid::{FieldError, ScalarField, SpectralField, TorusGrid, VelocityField};

struct GridPlans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `1/|k|` in lattice order, zero at the origin and on the Nyquist
    /// cross (shared by every Riesz application on this grid).
    riesz_inv_norm: Vec<f64>,
}

static PLAN_CACHE: Lazy<Mutex<HashMap<usize, Arc<GridPlans>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

fn plans_for(n: usize) -> Arc<GridPlans> {
    let mut cache = PLAN_CACHE.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let grid = TorusGrid::new(n).expect("plan cache only sees valid grids");
            let nyquist = (n / 2) as i64;
            let mut riesz_inv_norm = vec![0.0; n * n];
            for i2 in 0..n {
                let k2 = grid.wavenumber(i2);
                for i1 in 0..n {
                    let k1 = grid.wavenumber(i1);
                    if (k1 != 0 || k2 != 0) && k1 != nyquist && k2 != nyquist {
                        riesz_inv_norm[grid.idx(i1, i2)] =
                            1.0 / ((k1 * k1 + k2 * k2) as f64).sqrt();
                    }
                }
            }
            Arc::new(GridPlans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
                riesz_inv_norm,
            })
        })
        .clone()
}

fn fft_rows(plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], n: usize) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
    data.chunks_mut(n)
        .for_each(|row| plan.process_with_scratch(row, &mut scratch));
}

/// Blocked transpose; tiles keep both source and destination rows in cache.
fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    debug_assert_eq!(src.len(), n * n);
    debug_assert_eq!(dst.len(), n * n);
    const TILE: usize = 16;
    let mut i0 = 0;
    while i0 < n {
        let i1 = (i0 + TILE).min(n);
        let mut j0 = 0;
        while j0 < n {
            let j1 = (j0 + TILE).min(n);
            for i in i0..i1 {
                for j in j0..j1 {
                    // Indices are in range by construction; the bounds are
                    // asserted above. Mirrors the usual transpose kernel.
                    unsafe {
                        *dst.get_unchecked_mut(j * n + i) = *src.get_unchecked(i * n + j);
                    }
                }
            }
            j0 = j1;
        }
        i0 = i1;
    }
}

fn fft2(plan: &Arc<dyn Fft<f64>>, data: &mut [Complex64], n: usize) {
    let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];
    fft_rows(plan, data, n);
    transpose(data, &mut scratch, n);
    fft_rows(plan, &mut scratch, n);
    transpose(&scratch, data, n);
}

/// Forward transform; coefficients are `e^{ik·x}` amplitudes.
pub fn to_spectral(f: &ScalarField) -> Result<SpectralField, FieldError> {
    if !f.is_finite() {
        let index = f.values().iter().position(|v| !v.is_finite()).unwrap();
        return Err(FieldError::NonFinite { index });
    }
    let grid = f.grid();
    let n = grid.n();
    let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let plans = plans_for(n);
    fft2(&plans.forward, &mut data, n);
    let scale = 1.0 / (n * n) as f64;
    for c in &mut data {
        *c *= scale;
    }
    Ok(SpectralField::new_unchecked(grid, data))
}

/// Inverse transform. The imaginary part is discarded; for spectra of real
/// fields it is at rounding level (see [`SpectralField::hermitian_defect`]).
pub fn from_spectral(field: &SpectralField) -> Result<ScalarField, FieldError> {
    if !field.is_finite() {
        let index = field
            .coeffs()
            .iter()
            .position(|c| !c.re.is_finite() || !c.im.is_finite())
            .unwrap();
        return Err(FieldError::NonFinite { index });
    }
    let grid = field.grid();
    let n = grid.n();
    let mut data = field.coeffs().to_vec();
    let plans = plans_for(n);
    fft2(&plans.inverse, &mut data, n);
    let values: Vec<f64> = data.iter().map(|c| c.re).collect();
    Ok(ScalarField::new_unchecked(grid, values))
}

/// Applies `c(k) ↦ m(k₁,k₂)·c(k)` over the full lattice.
fn apply_multiplier<M: Fn(i64, i64) -> Complex64>(
    field: &SpectralField,
    m: M,
) -> SpectralField {
    let grid = field.grid();
    let n = grid.n();
    let mut out = field.coeffs().to_vec();
    for i2 in 0..n {
        let k2 = grid.wavenumber(i2);
        for i1 in 0..n {
            let k1 = grid.wavenumber(i1);
            out[grid.idx(i1, i2)] *= m(k1, k2);
        }
    }
    SpectralField::new_unchecked(grid, out)
}

/// Axis of a vector component or directional operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

impl Axis {
    #[inline]
    fn pick(self, k1: i64, k2: i64) -> i64 {
        match self {
            Axis::X1 => k1,
            Axis::X2 => k2,
        }
    }
}

/// Riesz transform `R_j`: multiplier `−i k_j/|k|`, mean annihilated.
///
/// The whole Nyquist cross (`k₁ = n/2` or `k₂ = n/2`) is zeroed as well:
/// those lone modes have no conjugate partner, and keeping them in either
/// velocity component breaks the exact spectral divergence-free identity
/// once imaginary parts are discarded.
pub fn riesz(axis: Axis, field: &SpectralField) -> SpectralField {
    let grid = field.grid();
    let n = grid.n();
    let plans = plans_for(n);
    let mut out = field.coeffs().to_vec();
    for i2 in 0..n {
        let k2 = grid.wavenumber(i2);
        for i1 in 0..n {
            let k1 = grid.wavenumber(i1);
            let idx = grid.idx(i1, i2);
            let kj = axis.pick(k1, k2) as f64;
            // (a+bi)(−i m) = bm − i am, with m = k_j/|k|.
            let m = kj * plans.riesz_inv_norm[idx];
            let c = out[idx];
            out[idx] = Complex64::new(c.im * m, -c.re * m);
        }
    }
    SpectralField::new_unchecked(grid, out)
}

/// Velocity and gradient spectra in one pass over the lattice: returns
/// `(û₁, û₂, ∂₁θ, ∂₂θ)` for `u = (−R₂θ, R₁θ)`. Shared hot path for the
/// advection term.
fn velocity_gradient_spectral(
    field: &SpectralField,
) -> (SpectralField, SpectralField, SpectralField, SpectralField) {
    let grid = field.grid();
    let n = grid.n();
    let nyquist = (n / 2) as i64;
    let plans = plans_for(n);
    let len = grid.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut u1 = vec![zero; len];
    let mut u2 = vec![zero; len];
    let mut gx = vec![zero; len];
    let mut gy = vec![zero; len];
    let coeffs = field.coeffs();
    for i2 in 0..n {
        let k2 = grid.wavenumber(i2);
        for i1 in 0..n {
            let k1 = grid.wavenumber(i1);
            let idx = grid.idx(i1, i2);
            let c = coeffs[idx];
            let inv = plans.riesz_inv_norm[idx];
            // u1 = −R₂θ: multiplier +i k₂/|k|;  u2 = R₁θ: −i k₁/|k|.
            let m2 = k2 as f64 * inv;
            let m1 = k1 as f64 * inv;
            u1[idx] = Complex64::new(-c.im * m2, c.re * m2);
            u2[idx] = Complex64::new(c.im * m1, -c.re * m1);
            // ∂_j: multiplier i k_j, Nyquist of the differentiated axis zeroed.
            let d1 = if k1 == nyquist { 0.0 } else { k1 as f64 };
            let d2 = if k2 == nyquist { 0.0 } else { k2 as f64 };
            gx[idx] = Complex64::new(-c.im * d1, c.re * d1);
            gy[idx] = Complex64::new(-c.im * d2, c.re * d2);
        }
    }
    (
        SpectralField::new_unchecked(grid, u1),
        SpectralField::new_unchecked(grid, u2),
        SpectralField::new_unchecked(grid, gx),
        SpectralField::new_unchecked(grid, gy),
    )
}

/// Physical advection inputs for one state: velocity components, gradient
/// components, and `max_x |u(x)|` (the CFL speed), computed together.
pub(crate) struct AdvectionFields {
    pub u1: ScalarField,
    pub u2: ScalarField,
    pub gx: ScalarField,
    pub gy: ScalarField,
    pub u_sup: f64,
}

pub(crate) fn advection_fields(field: &SpectralField) -> Result<AdvectionFields, FieldError> {
    let (u1s, u2s, gxs, gys) = velocity_gradient_spectral(field);
    // Independent inverse transforms; parallelism over whole fields is
    // deterministic regardless of thread count.
    let ((u1, u2), (gx, gy)) = rayon::join(
        || rayon::join(|| from_spectral(&u1s), || from_spectral(&u2s)),
        || rayon::join(|| from_spectral(&gxs), || from_spectral(&gys)),
    );
    let (u1, u2, gx, gy) = (u1?, u2?, gx?, gy?);
    let u_sup = u1
        .values()
        .iter()
        .zip(u2.values())
        .fold(0.0f64, |m, (a, b)| m.max((a * a + b * b).sqrt()));
    Ok(AdvectionFields {
        u1,
        u2,
        gx,
        gy,
        u_sup,
    })
}

#[derive(Debug, thiserror::Error)]
#[error("fractional Laplacian exponent must be non-negative, got {0}")]
pub struct NegativeExponent(pub f64);

/// Fractional Laplacian `(−Δ)^α`: multiplier `|k|^{2α}`, zero on the mean.
pub fn frac_laplacian(alpha: f64, field: &SpectralField) -> Result<SpectralField, NegativeExponent> {
    if alpha < 0.0 {
        return Err(NegativeExponent(alpha));
    }
    Ok(apply_multiplier(field, |k1, k2| {
        if k1 == 0 && k2 == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            let k2norm = (k1 * k1 + k2 * k2) as f64;
            Complex64::new(k2norm.powf(alpha), 0.0)
        }
    }))
}

/// Symbol of the dissipation generator, `λ(k) = |k|^{2α}`, in lattice order.
pub fn dissipation_symbol(grid: TorusGrid, alpha: f64) -> Vec<f64> {
    let n = grid.n();
    let mut sym = vec![0.0; grid.len()];
    for i2 in 0..n {
        let k2 = grid.wavenumber(i2);
        for i1 in 0..n {
            let k1 = grid.wavenumber(i1);
            let k2norm = (k1 * k1 + k2 * k2) as f64;
            sym[grid.idx(i1, i2)] = if k2norm == 0.0 { 0.0 } else { k2norm.powf(alpha) };
        }
    }
    sym
}

/// Spectral gradient; component `j` multiplies by `i k_j` with the Nyquist
/// mode of the differentiated axis zeroed.
pub fn gradient_spectral(field: &SpectralField) -> (SpectralField, SpectralField) {
    let nyquist = (field.grid().n() / 2) as i64;
    let derive = |axis: Axis| {
        apply_multiplier(field, |k1, k2| {
            let kj = axis.pick(k1, k2);
            if kj == nyquist {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, kj as f64)
            }
        })
    };
    (derive(Axis::X1), derive(Axis::X2))
}

/// Gradient in physical space.
pub fn gradient(field: &SpectralField) -> Result<(ScalarField, ScalarField), FieldError> {
    let (gx, gy) = gradient_spectral(field);
    Ok((from_spectral(&gx)?, from_spectral(&gy)?))
}

/// Velocity `u = (−R₂θ, R₁θ)` in physical space.
pub fn velocity_from_theta(field: &SpectralField) -> Result<VelocityField, FieldError> {
    let mut r2 = riesz(Axis::X2, field);
    for c in r2.coeffs_mut() {
        *c = -*c;
    }
    let r1 = riesz(Axis::X1, field);
    Ok(VelocityField {
        u1: from_spectral(&r2)?,
        u2: from_spectral(&r1)?,
    })
}

/// Spectral divergence residual of a velocity field, `max_k |k·û(k)|`
/// relative to `max_k |û(k)|`.
pub fn divergence_defect(u: &VelocityField) -> Result<f64, FieldError> {
    let u1 = to_spectral(&u.u1)?;
    let u2 = to_spectral(&u.u2)?;
    let grid = u1.grid();
    let n = grid.n();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for i2 in 0..n {
        let k2 = grid.wavenumber(i2) as f64;
        for i1 in 0..n {
            let k1 = grid.wavenumber(i1) as f64;
            let a = u1.coeffs()[grid.idx(i1, i2)];
            let b = u2.coeffs()[grid.idx(i1, i2)];
            worst = worst.max((a * k1 + b * k2).norm());
            scale = scale.max(a.norm()).max(b.norm());
        }
    }
    Ok(if scale == 0.0 { 0.0 } else { worst / scale })
}

/// Two-thirds-rule dealiasing: zeroes every coefficient with
/// `max(|k₁|,|k₂|) > n/3`.
pub fn dealias(field: &SpectralField) -> SpectralField {
    let cutoff = field.grid().n() as f64 / 3.0;
    apply_multiplier(field, |k1, k2| {
        if (k1.abs() as f64) > cutoff || (k2.abs() as f64) > cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    })
}
