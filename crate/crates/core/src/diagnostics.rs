//! Field measurements connecting simulation output to the objects of the
//! maximum principle: sup norms, empirical moduli of continuity, the minimal
//! admissible scaling constant of the modulus family, and an empirical
//! calibration of the velocity-modulus constant `A`.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{FieldError, ScalarField};
use crate::modulus::ModulusOfContinuity;
use crate::quad::QuadTolerance;
use crate::spectral::{gradient, to_spectral, velocity_from_theta};
use crate::verify::{big_omega, VerifyError};

/// Per-step (or per-snapshot) scalar diagnostics of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub sup_theta: f64,
    pub sup_grad: f64,
    pub l2: f64,
    /// Minimal admissible scaling constant, filled only where measured.
    pub min_c: Option<f64>,
}

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("cutoff {cutoff} exceeds the half-diagonal {max} of the period cell")]
    BadCutoff { cutoff: f64, max: f64 },
    #[error("no lattice separations below the cutoff; grid too coarse or cutoff too small")]
    EmptySeparations,
    #[error("field too rough for the modulus family at this grid (predicate fails at C = {at})")]
    TooRough { at: f64 },
    #[error("corpus is empty or contains only degenerate (constant) fields")]
    DegenerateCorpus,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// Empirical modulus of continuity: per-separation maxima of `|f(x+d) − f(x)|`
/// over lattice offsets `d`, binned by physical separation.
#[derive(Debug, Clone)]
pub struct EmpiricalModulus {
    /// Bin representative separations (lower bin edges), increasing.
    pub distances: Vec<f64>,
    /// Max pairwise difference over every offset landing in the bin.
    pub max_diff: Vec<f64>,
    /// Whether offsets were subsampled (grids above 128 per side); maxima
    /// are then lower bounds, which keeps every comparison conservative.
    pub subsampled: bool,
}

impl EmpiricalModulus {
    pub fn max_value(&self) -> f64 {
        self.max_diff.iter().fold(0.0, |m, v| m.max(*v))
    }

    /// Running maximum of the binned values: weakly increasing, and what an
    /// increasing modulus actually has to dominate. Concavity is never
    /// asserted for empirical data.
    pub fn running_max(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.max_diff.len());
        let mut acc = 0.0f64;
        for &v in &self.max_diff {
            acc = acc.max(v);
            out.push(acc);
        }
        out
    }

    /// Merges per-bin maxima of several measurements (e.g. the two velocity
    /// components).
    pub fn merge_max(mut self, other: &EmpiricalModulus) -> EmpiricalModulus {
        assert_eq!(self.distances.len(), other.distances.len());
        for (a, b) in self.max_diff.iter_mut().zip(&other.max_diff) {
            *a = a.max(*b);
        }
        self
    }
}

/// Max over the lattice of `|f(x + d) − f(x)|` with periodic wrap.
pub fn pairwise_max_for_offset(f: &ScalarField, d1: usize, d2: usize) -> f64 {
    let n = f.grid().n();
    let v = f.values();
    let mut worst: f64 = 0.0;
    for i2 in 0..n {
        let j2 = (i2 + d2) % n;
        let row = i2 * n;
        let row_shifted = j2 * n;
        for i1 in 0..n {
            let j1 = (i1 + d1) % n;
            let diff = (v[row_shifted + j1] - v[row + i1]).abs();
            worst = worst.max(diff);
        }
    }
    worst
}

const SUBSAMPLE_ABOVE: usize = 128;

/// Measures the empirical modulus up to physical separation `cutoff`.
///
/// Offsets run over the half-plane `d₂ > 0 ∪ (d₂ = 0, d₁ > 0)` (the maximum
/// is symmetric under `d ↦ −d`). Bins have width `h/2` and are represented
/// by their lower edge, so comparisons against an increasing modulus err
/// conservative.
pub fn empirical_modulus(
    f: &ScalarField,
    cutoff: f64,
) -> Result<EmpiricalModulus, DiagnosticsError> {
    let grid = f.grid();
    let n = grid.n();
    let h = grid.h();
    let half_diagonal = std::f64::consts::PI * 2.0f64.sqrt();
    if cutoff > half_diagonal * (1.0 + 1e-12) {
        return Err(DiagnosticsError::BadCutoff {
            cutoff,
            max: half_diagonal,
        });
    }

    let subsampled = n > SUBSAMPLE_ABOVE;
    let stride = if subsampled { 2 } else { 1 };
    let max_offset = (cutoff / h).floor() as i64;

    // Offsets in the half-plane, as (d1 mod n, d2) with d1 possibly negative.
    let mut offsets: Vec<(usize, usize, f64)> = Vec::new();
    let d1_range = |d2: i64| -> Vec<i64> {
        let mut v = Vec::new();
        let lo = if d2 == 0 { 1 } else { -max_offset };
        let mut d1 = lo;
        while d1 <= max_offset {
            v.push(d1);
            d1 += stride as i64;
        }
        v
    };
    let mut d2 = 0i64;
    while d2 <= max_offset {
        for d1 in d1_range(d2) {
            let sep = h * ((d1 * d1 + d2 * d2) as f64).sqrt();
            if sep <= cutoff && sep > 0.0 && d1.unsigned_abs() as usize <= n / 2 {
                offsets.push((d1.rem_euclid(n as i64) as usize, d2 as usize, sep));
            }
        }
        d2 += stride as i64;
    }
    if offsets.is_empty() {
        return Err(DiagnosticsError::EmptySeparations);
    }

    let bin_width = h / 2.0;
    let n_bins = (cutoff / bin_width).floor() as usize + 1;
    let per_offset: Vec<(usize, f64)> = offsets
        .par_iter()
        .map(|&(d1, d2, sep)| {
            let bin = (sep / bin_width).floor() as usize;
            (bin, pairwise_max_for_offset(f, d1, d2))
        })
        .collect();

    let mut bins = vec![f64::NEG_INFINITY; n_bins];
    for (bin, diff) in per_offset {
        bins[bin] = bins[bin].max(diff);
    }

    let mut distances = Vec::new();
    let mut max_diff = Vec::new();
    for (i, &val) in bins.iter().enumerate() {
        if val > f64::NEG_INFINITY {
            distances.push(i as f64 * bin_width);
            max_diff.push(val);
        }
    }
    Ok(EmpiricalModulus {
        distances,
        max_diff,
        subsampled,
    })
}

/// Result of the minimal-scaling-constant search.
#[derive(Debug, Clone, Copy)]
pub struct MinAdmissibleC {
    pub c: f64,
    /// Set when the field was constant: the search lower bound is returned.
    pub degenerate: bool,
}

pub const MIN_C_SEARCH_LO: f64 = 1e-6;
pub const MIN_C_SEARCH_HI: f64 = 1e12;

fn family_predicate<M: ModulusOfContinuity + ?Sized>(
    em: &EmpiricalModulus,
    sup: f64,
    cutoff: f64,
    w: &M,
    c: f64,
) -> bool {
    // Separations beyond the cutoff are dominated by 2‖f‖∞, which must be
    // covered by ω(C·cutoff) since ω is increasing.
    if 2.0 * sup > w.omega(c * cutoff) {
        return false;
    }
    em.distances
        .iter()
        .zip(&em.max_diff)
        .all(|(&xi, &diff)| xi == 0.0 || diff <= w.omega(c * xi))
}

/// Smallest `C` (within 1e−3 relative) such that the measured modulus of `f`
/// sits below `ω(C·ξ)`, bisecting over `[1e−6, 1e12]`.
pub fn min_admissible_c<M: ModulusOfContinuity + ?Sized>(
    f: &ScalarField,
    w: &M,
    cutoff: f64,
) -> Result<MinAdmissibleC, DiagnosticsError> {
    let em = empirical_modulus(f, cutoff)?;
    min_admissible_c_from_modulus(&em, f.sup_norm(), cutoff, w)
}

/// Same search, reusing an already-measured empirical modulus.
pub fn min_admissible_c_from_modulus<M: ModulusOfContinuity + ?Sized>(
    em: &EmpiricalModulus,
    sup: f64,
    cutoff: f64,
    w: &M,
) -> Result<MinAdmissibleC, DiagnosticsError> {
    if em.max_value() == 0.0 {
        // Constant field: every pairwise difference vanishes, so every C is
        // admissible; report the search lower bound, flagged.
        return Ok(MinAdmissibleC {
            c: MIN_C_SEARCH_LO,
            degenerate: true,
        });
    }
    let passes = |c: f64| family_predicate(em, sup, cutoff, w, c);
    if !passes(MIN_C_SEARCH_HI) {
        return Err(DiagnosticsError::TooRough {
            at: MIN_C_SEARCH_HI,
        });
    }
    if passes(MIN_C_SEARCH_LO) {
        return Ok(MinAdmissibleC {
            c: MIN_C_SEARCH_LO,
            degenerate: em.max_value() == 0.0,
        });
    }
    let mut lo = MIN_C_SEARCH_LO;
    let mut hi = MIN_C_SEARCH_HI;
    while hi / lo > 1.0 + 1e-3 {
        let mid = (lo * hi).sqrt();
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(MinAdmissibleC {
        c: hi,
        degenerate: false,
    })
}

/// Empirical calibration of the velocity-modulus constant.
#[derive(Debug, Clone)]
pub struct CalibrationReport {
    /// Supremum over the corpus of `max_diff_u(ξ) / Ω₁(C·ξ)`.
    pub a_empirical: f64,
    /// Per-field suprema, corpus order.
    pub per_field: Vec<f64>,
}

/// Measures, for each corpus field, the empirical modulus of its velocity
/// against the velocity modulus `Ω` (with unit constant) of the scaled
/// family member `ω(C·)` the field admits, and returns the worst ratio.
pub fn calibrate_a<M: ModulusOfContinuity + ?Sized>(
    corpus: &[ScalarField],
    w: &M,
    cutoff: f64,
    tol: QuadTolerance,
) -> Result<CalibrationReport, DiagnosticsError> {
    if corpus.is_empty() {
        return Err(DiagnosticsError::DegenerateCorpus);
    }
    let mut per_field = Vec::with_capacity(corpus.len());
    for f in corpus {
        let min_c = min_admissible_c(f, w, cutoff)?;
        if min_c.degenerate {
            return Err(DiagnosticsError::DegenerateCorpus);
        }
        let c = min_c.c;
        let u = velocity_from_theta(&to_spectral(f)?)?;
        let em_u = empirical_modulus(&u.u1, cutoff)?.merge_max(&empirical_modulus(&u.u2, cutoff)?);
        let mut worst: f64 = 0.0;
        for (&xi, &diff) in em_u.distances.iter().zip(&em_u.max_diff) {
            if xi == 0.0 || diff == 0.0 {
                continue;
            }
            let omega_u = big_omega(c * xi, w, 1.0, tol)?;
            worst = worst.max(diff / omega_u.value);
        }
        per_field.push(worst);
    }
    let a_empirical = per_field.iter().fold(0.0f64, |m, v| m.max(*v));
    if a_empirical == 0.0 {
        return Err(DiagnosticsError::DegenerateCorpus);
    }
    Ok(CalibrationReport {
        a_empirical,
        per_field,
    })
}

/// Discretization slack granted to the gradient bound.
pub const GRADIENT_BOUND_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy)]
pub struct GradientBoundReport {
    pub sup_grad: f64,
    /// `C·ω′(0)·(1 + tol)`.
    pub bound: f64,
    pub pass: bool,
}

/// Checks `‖∇f‖∞ ≤ C·ω′(0)·(1 + tol)`: a function admitting the scaled
/// modulus `ω(C·)` has its gradient controlled by the slope at zero,
/// `ω_C′(0) = C·ω′(0)`.
pub fn gradient_bound_check<M: ModulusOfContinuity + ?Sized>(
    f: &ScalarField,
    w: &M,
    c: f64,
) -> Result<GradientBoundReport, DiagnosticsError> {
    let (gx, gy) = gradient(&to_spectral(f)?)?;
    let sup_grad = gx
        .values()
        .iter()
        .zip(gy.values())
        .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
    let bound = c * w.omega_prime_right(0.0) * (1.0 + GRADIENT_BOUND_TOL);
    Ok(GradientBoundReport {
        sup_grad,
        bound,
        pass: sup_grad <= bound,
    })
}
