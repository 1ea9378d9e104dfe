//! Moduli of continuity: the explicit dissipation-dominant family used by
//! the verifier, plus simple test moduli.
//!
//! A modulus of continuity is an increasing continuous concave function
//! `ω: [0,∞) → [0,∞)` with `ω(0) = 0`; a function `f` "has modulus ω" when
//! `|f(x) − f(y)| ≤ ω(|x − y|)` for all `x, y`.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModulusError {
    #[error("parameters must satisfy 0 < gamma < delta/2, got delta={delta}, gamma={gamma}")]
    BadParams { delta: f64, gamma: f64 },
    #[error("delta must lie in (0, 0.01] (concavity window), got {0}")]
    DeltaOutOfWindow(f64),
    #[error("second derivative only defined on (0, delta), got xi={0}")]
    SecondDerivativeDomain(f64),
    #[error("modulus is not concave near xi={xi}: right slope rises from {prev} to {next}")]
    NotConcave { xi: f64, prev: f64, next: f64 },
    #[error("modulus is not increasing near xi={0}")]
    NotIncreasing(f64),
}

/// One-sided derivative selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Evaluable modulus of continuity.
///
/// Methods take `xi ≥ 0` (`xi > 0` for the left derivative); violations are
/// programmer errors and panic.
pub trait ModulusOfContinuity {
    fn omega(&self, xi: f64) -> f64;

    /// Right derivative; defined for `xi ≥ 0`.
    fn omega_prime_right(&self, xi: f64) -> f64;

    /// Left derivative; defined for `xi > 0`.
    fn omega_prime_left(&self, xi: f64) -> f64;

    fn omega_prime(&self, xi: f64, side: Side) -> f64 {
        match side {
            Side::Left => self.omega_prime_left(xi),
            Side::Right => self.omega_prime_right(xi),
        }
    }

    /// Points where the modulus is not twice differentiable, ascending.
    fn breakpoints(&self) -> Vec<f64>;

    /// Second derivative where it exists.
    fn second_derivative(&self, _xi: f64) -> Option<f64> {
        None
    }

    /// Exact `∫_a^b ω(η)/η dη` when `[a, b]` lies inside a single
    /// analytically known piece. Quadrature is used where this is `None`.
    fn head_piece_exact(&self, _a: f64, _b: f64) -> Option<f64> {
        None
    }
}

/// Parameters of the explicit modulus: breakpoint `delta` and tail strength
/// `gamma`.
///
/// Admissibility (`0 < gamma < delta/2`, `delta ≤ 0.01`) guarantees
/// concavity at the breakpoint — the right slope `γ/(4δ) < 1/8` stays below
/// the left slope `1 − (3/2)√δ` — and `ω(δ) > δ/2`, which the large-scale
/// bound chain relies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleLogParams {
    delta: f64,
    gamma: f64,
}

impl DoubleLogParams {
    pub const DELTA_WINDOW: f64 = 0.01;

    pub fn new(delta: f64, gamma: f64) -> Result<Self, ModulusError> {
        if !(delta > 0.0 && gamma > 0.0 && gamma < delta / 2.0) {
            return Err(ModulusError::BadParams { delta, gamma });
        }
        if delta > Self::DELTA_WINDOW {
            return Err(ModulusError::DeltaOutOfWindow(delta));
        }
        Ok(Self { delta, gamma })
    }

    /// Skips the admissibility window; used for negative controls. The shape
    /// is still a valid concave modulus only when the slope condition
    /// `γ/(4δ) ≤ 1 − (3/2)√δ` happens to hold.
    pub fn new_unchecked(delta: f64, gamma: f64) -> Self {
        Self { delta, gamma }
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// The explicit modulus: `ω(ξ) = ξ − ξ^{3/2}` on `[0, δ]`, continued for
/// `ξ > δ` by integrating `ω′(ξ) = γ / (ξ (4 + ln(ξ/δ)))`, which gives the
/// closed form `ω(δ) + γ·ln(1 + ln(ξ/δ)/4)`.
///
/// It is unbounded (double-logarithmic growth), has `ω′(0) = 1` and
/// `ω″(0⁺) = −∞`.
#[derive(Debug, Clone, Copy)]
pub struct DoubleLogModulus {
    params: DoubleLogParams,
}

impl DoubleLogModulus {
    pub fn new(params: DoubleLogParams) -> Self {
        Self { params }
    }

    #[inline]
    pub fn params(&self) -> DoubleLogParams {
        self.params
    }

    #[inline]
    pub fn delta(&self) -> f64 {
        self.params.delta
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.params.gamma
    }

    /// Second derivative on `(0, δ)`: `−(3/4)·ξ^{−1/2}`. Requests outside
    /// that interval are rejected; the bound chains never need them.
    pub fn omega_second(&self, xi: f64) -> Result<f64, ModulusError> {
        if xi <= 0.0 || xi >= self.params.delta {
            return Err(ModulusError::SecondDerivativeDomain(xi));
        }
        Ok(-0.75 / xi.sqrt())
    }

    /// Antiderivative of `ln(1 + s/4)`, used by the exact head integral.
    fn log_piece_antiderivative(s: f64) -> f64 {
        let u = 1.0 + s / 4.0;
        4.0 * (u * u.ln() - u)
    }
}

impl ModulusOfContinuity for DoubleLogModulus {
    fn omega(&self, xi: f64) -> f64 {
        assert!(xi >= 0.0, "omega requires xi >= 0, got {xi}");
        let d = self.params.delta;
        if xi <= d {
            xi - xi * xi.sqrt()
        } else {
            let omega_delta = d - d * d.sqrt();
            omega_delta + self.params.gamma * (1.0 + (xi / d).ln() / 4.0).ln()
        }
    }

    fn omega_prime_right(&self, xi: f64) -> f64 {
        assert!(xi >= 0.0, "right derivative requires xi >= 0, got {xi}");
        let d = self.params.delta;
        if xi < d {
            1.0 - 1.5 * xi.sqrt()
        } else {
            self.params.gamma / (xi * (4.0 + (xi / d).ln()))
        }
    }

    fn omega_prime_left(&self, xi: f64) -> f64 {
        assert!(xi > 0.0, "left derivative requires xi > 0, got {xi}");
        let d = self.params.delta;
        if xi <= d {
            1.0 - 1.5 * xi.sqrt()
        } else {
            self.params.gamma / (xi * (4.0 + (xi / d).ln()))
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.params.delta]
    }

    fn second_derivative(&self, xi: f64) -> Option<f64> {
        let d = self.params.delta;
        if xi <= 0.0 || xi == d {
            None
        } else if xi < d {
            Some(-0.75 / xi.sqrt())
        } else {
            let l = (xi / d).ln();
            Some(-self.params.gamma * (5.0 + l) / (xi * xi * (4.0 + l) * (4.0 + l)))
        }
    }

    fn head_piece_exact(&self, a: f64, b: f64) -> Option<f64> {
        debug_assert!(0.0 <= a && a <= b);
        let d = self.params.delta;
        if b <= d {
            // ∫ (1 − √η) dη
            Some((b - a) - (2.0 / 3.0) * (b * b.sqrt() - a * a.sqrt()))
        } else if a >= d {
            // Substitute s = ln(η/δ).
            let omega_delta = d - d * d.sqrt();
            let (sa, sb) = ((a / d).ln(), (b / d).ln());
            Some(
                omega_delta * (sb - sa)
                    + self.params.gamma
                        * (Self::log_piece_antiderivative(sb) - Self::log_piece_antiderivative(sa)),
            )
        } else {
            None
        }
    }
}

/// `ω(η) = min(η, cap)`: a bounded ramp, handy because every integral in the
/// verifier has a hand-computable value against it.
#[derive(Debug, Clone, Copy)]
pub struct RampModulus {
    pub cap: f64,
}

impl ModulusOfContinuity for RampModulus {
    fn omega(&self, xi: f64) -> f64 {
        assert!(xi >= 0.0);
        xi.min(self.cap)
    }

    fn omega_prime_right(&self, xi: f64) -> f64 {
        assert!(xi >= 0.0);
        if xi < self.cap {
            1.0
        } else {
            0.0
        }
    }

    fn omega_prime_left(&self, xi: f64) -> f64 {
        assert!(xi > 0.0);
        if xi <= self.cap {
            1.0
        } else {
            0.0
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.cap]
    }

    fn second_derivative(&self, xi: f64) -> Option<f64> {
        if xi > 0.0 && xi != self.cap {
            Some(0.0)
        } else {
            None
        }
    }

    fn head_piece_exact(&self, a: f64, b: f64) -> Option<f64> {
        if b <= self.cap {
            Some(b - a)
        } else if a >= self.cap {
            Some(self.cap * (b / a).ln())
        } else {
            None
        }
    }
}

/// `ω(η) = slope·η`. Locally linear everywhere: annihilates second
/// differences, and its velocity-modulus tail diverges.
#[derive(Debug, Clone, Copy)]
pub struct LinearModulus {
    pub slope: f64,
}

impl ModulusOfContinuity for LinearModulus {
    fn omega(&self, xi: f64) -> f64 {
        assert!(xi >= 0.0);
        self.slope * xi
    }

    fn omega_prime_right(&self, _xi: f64) -> f64 {
        self.slope
    }

    fn omega_prime_left(&self, _xi: f64) -> f64 {
        self.slope
    }

    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn second_derivative(&self, xi: f64) -> Option<f64> {
        if xi > 0.0 {
            Some(0.0)
        } else {
            None
        }
    }

    fn head_piece_exact(&self, a: f64, b: f64) -> Option<f64> {
        Some(self.slope * (b - a))
    }
}

/// Concave piecewise-linear modulus given by knot abscissae and the slope of
/// each segment (slopes must be positive-then-nonincreasing; the final slope
/// applies beyond the last knot).
#[derive(Debug, Clone)]
pub struct PiecewiseLinearModulus {
    knots: Vec<f64>,
    slopes: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseLinearModulus {
    /// `knots` strictly increasing and positive; `slopes.len() == knots.len() + 1`,
    /// non-increasing, first slope positive, all non-negative.
    pub fn new(knots: Vec<f64>, slopes: Vec<f64>) -> Result<Self, ModulusError> {
        if slopes.len() != knots.len() + 1
            || slopes.is_empty()
            || slopes[0] <= 0.0
            || slopes.iter().any(|s| *s < 0.0)
            || slopes.windows(2).any(|w| w[1] > w[0])
            || knots.windows(2).any(|w| w[1] <= w[0])
            || knots.first().is_some_and(|k| *k <= 0.0)
        {
            return Err(ModulusError::BadParams {
                delta: f64::NAN,
                gamma: f64::NAN,
            });
        }
        let mut values = Vec::with_capacity(knots.len());
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (i, &k) in knots.iter().enumerate() {
            acc += slopes[i] * (k - prev);
            values.push(acc);
            prev = k;
        }
        Ok(Self {
            knots,
            slopes,
            values,
        })
    }

    fn segment(&self, xi: f64) -> usize {
        self.knots.partition_point(|k| *k < xi)
    }
}

impl ModulusOfContinuity for PiecewiseLinearModulus {
    fn omega(&self, xi: f64) -> f64 {
        assert!(xi >= 0.0);
        let seg = self.segment(xi);
        if seg == 0 {
            self.slopes[0] * xi
        } else {
            self.values[seg - 1] + self.slopes[seg] * (xi - self.knots[seg - 1])
        }
    }

    fn omega_prime_right(&self, xi: f64) -> f64 {
        assert!(xi >= 0.0);
        self.slopes[self.knots.partition_point(|k| *k <= xi)]
    }

    fn omega_prime_left(&self, xi: f64) -> f64 {
        assert!(xi > 0.0);
        self.slopes[self.segment(xi)]
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.knots.clone()
    }

    fn second_derivative(&self, xi: f64) -> Option<f64> {
        if xi > 0.0 && self.knots.iter().all(|k| *k != xi) {
            Some(0.0)
        } else {
            None
        }
    }
}

/// Samples the modulus on a log grid around `scale` (and across its
/// breakpoints) and rejects non-increasing values or rising right slopes.
/// A sampled check, not a proof; the verifier's sign guarantees rest on it.
pub fn check_concave_increasing<M: ModulusOfContinuity + ?Sized>(
    w: &M,
    scale: f64,
) -> Result<(), ModulusError> {
    assert!(scale > 0.0);
    let mut xs: Vec<f64> = Vec::with_capacity(96);
    let lo = scale * 1e-8;
    let hi = scale * 1e8;
    let step = (hi / lo).powf(1.0 / 63.0);
    let mut x = lo;
    for _ in 0..64 {
        xs.push(x);
        x *= step;
    }
    for b in w.breakpoints() {
        if b > 0.0 {
            xs.push(b * (1.0 - 1e-9));
            xs.push(b);
            xs.push(b * (1.0 + 1e-9));
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let mut prev_val = 0.0;
    let mut prev_slope = f64::INFINITY;
    for &xi in &xs {
        let val = w.omega(xi);
        // Non-decreasing (flat stretches like a capped ramp are fine).
        if val < prev_val * (1.0 - 1e-14) {
            return Err(ModulusError::NotIncreasing(xi));
        }
        if val < 0.0 {
            return Err(ModulusError::NotIncreasing(xi));
        }
        let slope = w.omega_prime_right(xi);
        if slope > prev_slope * (1.0 + 1e-12) + 1e-300 {
            return Err(ModulusError::NotConcave {
                xi,
                prev: prev_slope,
                next: slope,
            });
        }
        prev_val = val;
        prev_slope = slope;
    }
    Ok(())
}
