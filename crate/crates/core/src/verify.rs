//! Numerical verification of the non-local maximum principle.
//!
//! Everything here evaluates, with controlled-accuracy quadrature, the
//! functionals that decide whether a modulus of continuity is preserved by
//! the critical dissipative evolution:
//!
//! * `big_omega` — the modulus inherited by the velocity,
//!   `Ω(ξ) = A (∫₀^ξ ω(η)/η dη + ξ ∫_ξ^∞ ω(η)/η² dη)`;
//! * `dissipation_functional` — the two-sided second-difference integrals
//!   bounding the dissipation contribution at a breakthrough pair;
//! * `flow_functional` and `breakthrough_margin` — the flow-term bound
//!   `Ω(ξ)·ω′(ξ)` and the signed sum whose negativity for all `ξ > 0`
//!   rules out the breakthrough scenario;
//! * `check_case_small` / `check_case_large` — the intermediate bound
//!   chains for `ξ ≤ δ` and `ξ ≥ δ`, each link evaluated and compared;
//! * `search_params` — feasibility search over `(δ, γ)` for a given
//!   velocity-modulus constant `A`.
//!
//! Improper tails are truncated at a cutoff with an analytic remainder
//! enclosure whose midpoint is added to the value and half-width to the
//! error estimate, so every reported `quad_error` is an honest absolute
//! error bound estimate, never a certified interval.

use rayon::prelude::*;
use thiserror::Error;

use crate::modulus::{
    check_concave_increasing, DoubleLogModulus, DoubleLogParams, ModulusError,
    ModulusOfContinuity,
};
use crate::quad::{integrate_with_breakpoints, panel_points, QuadResult, QuadTolerance};

pub const INV_PI: f64 = std::f64::consts::FRAC_1_PI;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Modulus(#[from] ModulusError),
    #[error("tail integral of omega(eta)/eta^2 diverges: {0}")]
    DivergentTail(String),
    #[error("{what} requires {requirement}, got xi={xi}")]
    OutOfRange {
        what: &'static str,
        requirement: &'static str,
        xi: f64,
    },
    #[error("infeasible parameters: {0} violated")]
    Infeasible(FeasibilityBoundary),
}

/// Sufficient conditions on `(A, δ, γ)` distilled from the two bound
/// chains; violating any of them makes the master inequality unprovable by
/// those chains (and, for the first three, actually false somewhere).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeasibilityBoundary {
    /// `A γ < 1/π` — large-scale balance of flow against dissipation.
    AGammaBelowInvPi,
    /// `γ < δ/2` — tail-strength cap used throughout the large-scale chain.
    GammaBelowHalfDelta,
    /// `4πA√δ < 1` — small-scale balance at `ξ = δ`.
    FourPiASqrtDelta,
    /// `δ ≤ 0.01` — concavity window of the modulus family.
    DeltaWindow,
    /// `A, δ, γ > 0`.
    Positivity,
}

impl std::fmt::Display for FeasibilityBoundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FeasibilityBoundary::AGammaBelowInvPi => "Aγ < 1/π",
            FeasibilityBoundary::GammaBelowHalfDelta => "γ < δ/2",
            FeasibilityBoundary::FourPiASqrtDelta => "4πA√δ < 1",
            FeasibilityBoundary::DeltaWindow => "δ ≤ 0.01",
            FeasibilityBoundary::Positivity => "A, δ, γ > 0",
        };
        f.write_str(s)
    }
}

/// First violated feasibility boundary, if any.
pub fn feasibility_violation(a_const: f64, delta: f64, gamma: f64) -> Option<FeasibilityBoundary> {
    if !(a_const > 0.0 && delta > 0.0 && gamma > 0.0) {
        return Some(FeasibilityBoundary::Positivity);
    }
    if a_const * gamma >= INV_PI {
        return Some(FeasibilityBoundary::AGammaBelowInvPi);
    }
    if gamma >= delta / 2.0 {
        return Some(FeasibilityBoundary::GammaBelowHalfDelta);
    }
    if 4.0 * std::f64::consts::PI * a_const * delta.sqrt() >= 1.0 {
        return Some(FeasibilityBoundary::FourPiASqrtDelta);
    }
    if delta > DoubleLogParams::DELTA_WINDOW {
        return Some(FeasibilityBoundary::DeltaWindow);
    }
    None
}

/// Largest admissible `δ` for a given `A` (from `4πA√δ < 1`), intersected
/// with the concavity window.
pub fn delta_feasibility_boundary(a_const: f64) -> f64 {
    let from_chain = 1.0 / (16.0 * std::f64::consts::PI.powi(2) * a_const * a_const);
    from_chain.min(DoubleLogParams::DELTA_WINDOW)
}

fn max_breakpoint<M: ModulusOfContinuity + ?Sized>(w: &M) -> f64 {
    w.breakpoints().into_iter().fold(0.0, f64::max)
}

/// `∫₀^x ω(η)/η dη`, exact on analytically known pieces, quadrature
/// elsewhere. The integrand extends continuously to `η = 0` by `ω′(0⁺)`.
pub fn head_integral<M: ModulusOfContinuity + ?Sized>(
    x: f64,
    w: &M,
    tol: QuadTolerance,
) -> QuadResult {
    assert!(x > 0.0);
    let mut cuts = vec![0.0];
    for b in w.breakpoints() {
        if b > 0.0 && b < x {
            cuts.push(b);
        }
    }
    cuts.push(x);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut acc = QuadResult::ZERO;
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if let Some(exact) = w.head_piece_exact(a, b) {
            acc = acc.combine(QuadResult {
                value: exact,
                error: 0.0,
                evals: 0,
                converged: true,
            });
        } else {
            let pts = panel_points(a, b, &[]);
            let piece = integrate_with_breakpoints(|eta| w.omega(eta) / eta, &pts, tol);
            acc = acc.combine(piece);
        }
    }
    acc
}

/// Checks that `ω(η)/η²` has a convergent tail: `ω(η)/η` must decay and the
/// sampled `η·ω′₊(η)` must be non-increasing far out (that monotonicity is
/// what makes the cutoff remainder enclosure below valid).
fn tail_convergence_precheck<M: ModulusOfContinuity + ?Sized>(
    x: f64,
    w: &M,
) -> Result<(), VerifyError> {
    let base = x.max(max_breakpoint(w)).max(1e-300);
    let r0 = w.omega(base) / base;
    let far = base * 1e16;
    let r_far = w.omega(far) / far;
    if !(r_far <= 1e-3 * r0) {
        return Err(VerifyError::DivergentTail(format!(
            "omega(eta)/eta does not decay: {r0:e} at {base:e} vs {r_far:e} at {far:e}"
        )));
    }
    let mut prev = f64::INFINITY;
    for mult in [1e8, 1e10, 1e12, 1e16] {
        let eta = base * mult;
        let s = eta * w.omega_prime_right(eta);
        if s > prev * (1.0 + 1e-9) {
            return Err(VerifyError::DivergentTail(format!(
                "eta*omega'(eta) increases near eta={eta:e} ({prev:e} -> {s:e})"
            )));
        }
        prev = s;
    }
    Ok(())
}

/// `∫_x^∞ ω(η)/η² dη` via cutoff `H` plus the remainder enclosure
/// `ω(H)/H ≤ R ≤ ω(H)/H + ω′₊(H)` (integration by parts plus the sampled
/// monotonicity of `η·ω′`). The enclosure midpoint goes into the value, the
/// half-width into the error; `H` grows until that half-width is negligible
/// against the integral's own scale.
pub fn tail_integral<M: ModulusOfContinuity + ?Sized>(
    x: f64,
    w: &M,
    tol: QuadTolerance,
) -> Result<QuadResult, VerifyError> {
    assert!(x > 0.0);
    tail_convergence_precheck(x, w)?;

    let base = x.max(max_breakpoint(w));
    let scale = w.omega(x) / x;
    let target = 0.5 * tol.atol + 1e-2 * tol.rtol * scale;
    let mut h = base * 1e8;
    let h_cap = base * 1e16;
    while 0.5 * w.omega_prime_right(h) > target && h < h_cap {
        h *= 10.0;
    }

    let interior: Vec<f64> = w.breakpoints();
    let pts = panel_points(x, h, &interior);
    let quad = integrate_with_breakpoints(|eta| w.omega(eta) / (eta * eta), &pts, tol);

    let remainder_low = w.omega(h) / h;
    let half_width = 0.5 * w.omega_prime_right(h);
    Ok(QuadResult {
        value: quad.value + remainder_low + half_width,
        error: quad.error + half_width,
        evals: quad.evals,
        converged: quad.converged,
    })
}

/// `∫_a^b ω(η)/η² dη` on a finite interval.
pub fn omega_over_eta2<M: ModulusOfContinuity + ?Sized>(
    a: f64,
    b: f64,
    w: &M,
    tol: QuadTolerance,
) -> QuadResult {
    assert!(0.0 < a && a <= b);
    if a == b {
        return QuadResult::ZERO;
    }
    let interior: Vec<f64> = w.breakpoints();
    let pts = panel_points(a, b, &interior);
    integrate_with_breakpoints(|eta| w.omega(eta) / (eta * eta), &pts, tol)
}

/// The modulus of continuity inherited by the velocity:
/// `Ω(ξ) = A (head + ξ·tail)`.
pub fn big_omega<M: ModulusOfContinuity + ?Sized>(
    xi: f64,
    w: &M,
    a_const: f64,
    tol: QuadTolerance,
) -> Result<QuadResult, VerifyError> {
    assert!(xi > 0.0, "big_omega requires xi > 0");
    let head = head_integral(xi, w, tol);
    let tail = tail_integral(xi, w, tol)?;
    Ok(QuadResult {
        value: a_const * (head.value + xi * tail.value),
        error: a_const * (head.error + xi * tail.error),
        evals: head.evals + tail.evals,
        converged: head.converged && tail.converged,
    })
}

/// Exact derivative of the velocity modulus, `Ω′(ξ) = A ∫_ξ^∞ ω/η² dη`
/// (the head and boundary terms cancel). Used as the reference when testing
/// `big_omega`'s numerical derivative.
pub fn big_omega_prime_reference<M: ModulusOfContinuity + ?Sized>(
    xi: f64,
    w: &M,
    a_const: f64,
    tol: QuadTolerance,
) -> Result<QuadResult, VerifyError> {
    let tail = tail_integral(xi, w, tol)?;
    Ok(QuadResult {
        value: a_const * tail.value,
        error: a_const * tail.error,
        evals: tail.evals,
        converged: tail.converged,
    })
}

/// The two dissipation integrals, each already carrying its `1/π` factor.
#[derive(Debug, Clone, Copy)]
pub struct DissipationParts {
    /// `(1/π) ∫₀^{ξ/2} [ω(ξ+2η) + ω(ξ−2η) − 2ω(ξ)]/η² dη`
    pub near: QuadResult,
    /// `(1/π) ∫_{ξ/2}^∞ [ω(2η+ξ) − ω(2η−ξ) − 2ω(ξ)]/η² dη`
    pub far: QuadResult,
}

impl DissipationParts {
    pub fn total(&self) -> QuadResult {
        self.near.combine(self.far)
    }
}

/// Relative width of the band near `η = 0` where the first integrand is
/// replaced by its continuous extension.
const NEAR_GUARD_FRACTION: f64 = 1e-6;

fn second_difference_limit<M: ModulusOfContinuity + ?Sized>(xi: f64, w: &M, guard: f64) -> f64 {
    match w.second_derivative(xi) {
        Some(s) => 4.0 * s,
        None => {
            // Symmetric second difference at the guard edge. At a kink this
            // clips a (log-divergent, strictly negative) contribution, which
            // only makes the reported dissipation less negative: safe for
            // every inequality verified here.
            (w.omega(xi + 2.0 * guard) + w.omega(xi - 2.0 * guard) - 2.0 * w.omega(xi))
                / (guard * guard)
        }
    }
}

/// Both dissipation integrals at separation `xi`.
///
/// The integrands are second differences of a concave ω, hence non-positive;
/// the modulus is rejected if a sampled concavity check fails. The first
/// integrand is continued to `η = 0` by `4ω″(ξ)` (or a symmetric-difference
/// estimate when no second derivative exists); the second integral is
/// truncated with its `−2ω(ξ)/η²` part integrated exactly and the remaining
/// positive part enclosed by `[0, 2ξ·ω′₊(2η_max − ξ)/η_max]`.
pub fn dissipation_parts<M: ModulusOfContinuity + ?Sized>(
    xi: f64,
    w: &M,
    tol: QuadTolerance,
) -> Result<DissipationParts, VerifyError> {
    assert!(xi > 0.0, "dissipation requires xi > 0");
    check_concave_increasing(w, xi.max(max_breakpoint(w)).max(1e-300))?;

    let breakpoints = w.breakpoints();

    // Near integral over (0, ξ/2).
    let guard = NEAR_GUARD_FRACTION * xi;
    let limit = second_difference_limit(xi, w, guard);
    let near_integrand = |eta: f64| {
        if eta < guard {
            limit
        } else {
            (w.omega(xi + 2.0 * eta) + w.omega(xi - 2.0 * eta) - 2.0 * w.omega(xi)) / (eta * eta)
        }
    };
    let mut interior = vec![guard];
    for &b in &breakpoints {
        // ξ + 2η crosses b, or ξ − 2η crosses b.
        if b > xi && b < 2.0 * xi {
            interior.push((b - xi) / 2.0);
        }
        if b > 0.0 && b < xi {
            interior.push((xi - b) / 2.0);
        }
    }
    let near_pts = panel_points(0.0, xi / 2.0, &interior);
    let near_quad = integrate_with_breakpoints(near_integrand, &near_pts, tol);
    // Honesty for the guard band: account for the integrand variation that
    // the constant extension hides.
    let guard_var = (near_integrand(guard * 1.0000001) - limit).abs() * guard;
    let near = QuadResult {
        value: INV_PI * near_quad.value,
        error: INV_PI * (near_quad.error + guard_var),
        evals: near_quad.evals,
        converged: near_quad.converged,
    };

    // Far integral over (ξ/2, ∞).
    let omega_xi = w.omega(xi);
    let base = xi.max(max_breakpoint(w));
    let mut eta_max = base * 1e8;
    let eta_cap = base * 1e16;
    let target = 0.5 * tol.atol + 1e-2 * tol.rtol * (omega_xi / xi);
    while xi * w.omega_prime_right(2.0 * eta_max - xi) / eta_max > target && eta_max < eta_cap {
        eta_max *= 10.0;
    }

    let far_integrand = |eta: f64| {
        (w.omega(2.0 * eta + xi) - w.omega(2.0 * eta - xi) - 2.0 * omega_xi) / (eta * eta)
    };
    let mut far_interior = Vec::new();
    for &b in &breakpoints {
        let c1 = (b - xi) / 2.0; // 2η + ξ = b
        if c1 > xi / 2.0 && c1 < eta_max {
            far_interior.push(c1);
        }
        let c2 = (b + xi) / 2.0; // 2η − ξ = b
        if c2 > xi / 2.0 && c2 < eta_max {
            far_interior.push(c2);
        }
    }
    let far_pts = panel_points(xi / 2.0, eta_max, &far_interior);
    let far_quad = integrate_with_breakpoints(far_integrand, &far_pts, tol);

    // Tail beyond η_max: the −2ω(ξ)/η² piece integrates exactly; the
    // remaining positive piece is enclosed via concavity.
    let exact_negative = -2.0 * omega_xi / eta_max;
    let pos_cap = 2.0 * xi * w.omega_prime_right(2.0 * eta_max - xi) / eta_max;
    let tail_mid = exact_negative + 0.5 * pos_cap;
    let far = QuadResult {
        value: INV_PI * (far_quad.value + tail_mid),
        error: INV_PI * (far_quad.error + 0.5 * pos_cap),
        evals: far_quad.evals,
        converged: far_quad.converged,
    };

    Ok(DissipationParts { near, far })
}

/// Sum of both dissipation integrals (the dissipation-term upper bound).
pub fn dissipation_functional<M: ModulusOfContinuity + ?Sized>(
    xi: f64,
    w: &M,
    tol: QuadTolerance,
) -> Result<QuadResult, VerifyError> {
    Ok(dissipation_parts(xi, w, tol)?.total())
}

/// Flow-term upper bound `Ω(ξ)·ω′(ξ)`.
///
/// At the kink `ξ = δ` the left derivative is used — the larger one-sided
/// value, so the positive term is overestimated and the verification stays
/// conservative.
pub fn flow_functional(
    xi: f64,
    w: &DoubleLogModulus,
    a_const: f64,
    tol: QuadTolerance,
) -> Result<QuadResult, VerifyError> {
    assert!(xi > 0.0);
    let omega = big_omega(xi, w, a_const, tol)?;
    let slope = w.omega_prime_left(xi);
    Ok(QuadResult {
        value: omega.value * slope,
        error: omega.error * slope,
        evals: omega.evals,
        converged: omega.converged,
    })
}

/// Per-ξ decomposition of the master inequality.
#[derive(Debug, Clone, Copy)]
pub struct MarginReport {
    pub xi: f64,
    pub flow: f64,
    pub dissipation: f64,
    /// `flow + dissipation`, exactly as computed.
    pub margin: f64,
    /// Summed component error estimates.
    pub quad_error: f64,
}

impl MarginReport {
    /// Negative with room to spare over the quadrature error.
    pub fn certified_negative(&self) -> bool {
        self.margin < 0.0 && self.margin.abs() > 2.0 * self.quad_error
    }
}

pub fn breakthrough_margin(
    xi: f64,
    w: &DoubleLogModulus,
    a_const: f64,
    tol: QuadTolerance,
) -> Result<MarginReport, VerifyError> {
    let flow = flow_functional(xi, w, a_const, tol)?;
    let diss = dissipation_functional(xi, w, tol)?;
    Ok(MarginReport {
        xi,
        flow: flow.value,
        dissipation: diss.value,
        margin: flow.value + diss.value,
        quad_error: flow.error + diss.error,
    })
}

/// Geometric grid from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && points >= 1);
    if points == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    let mut out = Vec::with_capacity(points);
    let mut x = lo;
    for _ in 0..points - 1 {
        out.push(x);
        x *= ratio;
    }
    out.push(hi);
    out
}

#[derive(Debug, Clone)]
pub struct ScanSummary {
    pub reports: Vec<MarginReport>,
    pub max_margin: f64,
    pub argmax_xi: f64,
    pub total_quad_error: f64,
    /// Every grid point negative with margin above twice its error estimate.
    pub all_certified_negative: bool,
}

/// Evaluates the margin over a ξ grid (in parallel; reports keep grid order,
/// so the output is deterministic for any thread count).
pub fn scan_margins(
    xi_grid: &[f64],
    w: &DoubleLogModulus,
    a_const: f64,
    tol: QuadTolerance,
) -> Result<ScanSummary, VerifyError> {
    let reports: Result<Vec<MarginReport>, VerifyError> = xi_grid
        .par_iter()
        .map(|&xi| breakthrough_margin(xi, w, a_const, tol))
        .collect();
    let reports = reports?;
    let mut max_margin = f64::NEG_INFINITY;
    let mut argmax_xi = f64::NAN;
    let mut total_quad_error = 0.0;
    let mut all_certified = true;
    for r in &reports {
        if r.margin > max_margin {
            max_margin = r.margin;
            argmax_xi = r.xi;
        }
        total_quad_error += r.quad_error;
        all_certified &= r.certified_negative();
    }
    Ok(ScanSummary {
        reports,
        max_margin,
        argmax_xi,
        total_quad_error,
        all_certified_negative: all_certified,
    })
}

/// One verified inequality of a bound chain.
#[derive(Debug, Clone)]
pub struct ChainLink {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// Error allowance granted to the comparison (quadrature estimates).
    pub allowance: f64,
    pub pass: bool,
}

impl ChainLink {
    fn compare(name: &'static str, lhs: f64, rhs: f64, allowance: f64) -> Self {
        Self {
            name,
            lhs,
            rhs,
            allowance,
            pass: lhs <= rhs + allowance,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ChainReport {
    pub xi: f64,
    pub links: Vec<ChainLink>,
    pub pass: bool,
}

impl ChainReport {
    fn from_links(xi: f64, links: Vec<ChainLink>) -> Self {
        let pass = links.iter().all(|l| l.pass);
        Self { xi, links, pass }
    }

    pub fn link(&self, name: &str) -> Option<&ChainLink> {
        self.links.iter().find(|l| l.name == name)
    }
}

/// Small-scale chain, `0 < ξ ≤ δ`: every intermediate bound used to show
/// the margin is negative below the breakpoint.
pub fn check_case_small(
    xi: f64,
    w: &DoubleLogModulus,
    a_const: f64,
    tol: QuadTolerance,
) -> Result<ChainReport, VerifyError> {
    let delta = w.delta();
    let gamma = w.gamma();
    if !(xi > 0.0 && xi <= delta) {
        return Err(VerifyError::OutOfRange {
            what: "check_case_small",
            requirement: "0 < xi <= delta",
            xi,
        });
    }

    let mut links = Vec::with_capacity(5);

    // (i) ∫₀^ξ ω/η ≤ ξ  (since ω(η) ≤ η).
    let head = head_integral(xi, w, tol);
    links.push(ChainLink::compare("head <= xi", head.value, xi, head.error));

    // (ii) ∫_ξ^δ ω/η² ≤ ln(δ/ξ).
    let mid = omega_over_eta2(xi, delta, w, tol);
    links.push(ChainLink::compare(
        "mid tail <= ln(delta/xi)",
        mid.value,
        (delta / xi).ln(),
        mid.error,
    ));

    // (iii) ∫_δ^∞ ω/η² ≤ 1 + γ/(4δ) < 2.
    let outer = tail_integral(delta, w, tol)?;
    let bound3 = 1.0 + gamma / (4.0 * delta);
    let mut link3 = ChainLink::compare(
        "outer tail <= 1 + gamma/(4 delta) < 2",
        outer.value,
        bound3,
        outer.error,
    );
    link3.pass &= bound3 < 2.0;
    links.push(link3);

    // (iv) near dissipation ≤ (1/π) ξ ω″(ξ) = −(3/(4π)) ξ^{1/2}.
    let parts = dissipation_parts(xi, w, tol)?;
    let taylor_bound = -(3.0 / (4.0 * std::f64::consts::PI)) * xi.sqrt();
    links.push(ChainLink::compare(
        "near dissipation <= (1/pi) xi omega''(xi)",
        parts.near.value,
        taylor_bound,
        parts.near.error,
    ));

    // (v) combined closed-form expression negative:
    // Aξ(3 + ln(δ/ξ)) − (3/(4π))√ξ < 0.
    let combined = a_const * xi * (3.0 + (delta / xi).ln()) + taylor_bound;
    links.push(ChainLink::compare("combined bound < 0", combined, 0.0, 0.0));

    Ok(ChainReport::from_links(xi, links))
}

/// Large-scale chain, `ξ ≥ δ`.
pub fn check_case_large(
    xi: f64,
    w: &DoubleLogModulus,
    a_const: f64,
    tol: QuadTolerance,
) -> Result<ChainReport, VerifyError> {
    let delta = w.delta();
    let gamma = w.gamma();
    if xi < delta {
        return Err(VerifyError::OutOfRange {
            what: "check_case_large",
            requirement: "xi >= delta",
            xi,
        });
    }

    let omega_xi = w.omega(xi);
    let mut links = Vec::with_capacity(6);

    // (i) ∫₀^ξ ω/η ≤ ω(ξ)(2 + ln(ξ/δ)); needs ω(δ) > δ/2.
    let head = head_integral(xi, w, tol);
    let mut link1 = ChainLink::compare(
        "head <= omega(xi) (2 + ln(xi/delta))",
        head.value,
        omega_xi * (2.0 + (xi / delta).ln()),
        head.error,
    );
    link1.pass &= w.omega(delta) > delta / 2.0;
    links.push(link1);

    // (ii) ∫_ξ^∞ ω/η² ≤ 2 ω(ξ)/ξ.
    let tail = tail_integral(xi, w, tol)?;
    links.push(ChainLink::compare(
        "tail <= 2 omega(xi)/xi",
        tail.value,
        2.0 * omega_xi / xi,
        tail.error,
    ));

    // (iii) Ω(ξ)·ω′(ξ) ≤ A γ ω(ξ)/ξ, with the tail-branch (right) slope.
    let omega_u = big_omega(xi, w, a_const, tol)?;
    let flow_right = omega_u.value * w.omega_prime_right(xi);
    links.push(ChainLink::compare(
        "flow <= A gamma omega(xi)/xi",
        flow_right,
        a_const * gamma * omega_xi / xi,
        omega_u.error * w.omega_prime_right(xi),
    ));

    // (iv) ω(2ξ) ≤ ω(ξ) + γ/4 ≤ (3/2) ω(ξ).
    let omega_2xi = w.omega(2.0 * xi);
    let mut link4 = ChainLink::compare(
        "omega(2 xi) <= (3/2) omega(xi)",
        omega_2xi,
        1.5 * omega_xi,
        0.0,
    );
    link4.pass &= omega_2xi <= omega_xi + gamma / 4.0 && omega_xi + gamma / 4.0 <= 1.5 * omega_xi;
    links.push(link4);

    // (v) far dissipation ≤ −(1/π) ω(ξ)/ξ.
    let parts = dissipation_parts(xi, w, tol)?;
    links.push(ChainLink::compare(
        "far dissipation <= -(1/pi) omega(xi)/xi",
        parts.far.value,
        -INV_PI * omega_xi / xi,
        parts.far.error,
    ));

    // (vi) total negative when Aγ < 1/π.
    let flow_left = flow_functional(xi, w, a_const, tol)?;
    let total = flow_left.value + parts.total().value;
    let mut link6 = ChainLink::compare("total < 0 given A gamma < 1/pi", total, 0.0, 0.0);
    link6.pass &= a_const * gamma < INV_PI;
    links.push(link6);

    Ok(ChainReport::from_links(xi, links))
}

/// A certified parameter pair plus the scan evidence behind it.
#[derive(Debug, Clone)]
pub struct CertifiedParams {
    pub params: DoubleLogParams,
    pub max_margin: f64,
    pub argmax_xi: f64,
    pub total_quad_error: f64,
}

#[derive(Debug, Clone)]
pub struct ParamSearch {
    /// Certified pairs, largest `δ` first. Empty when the search box holds
    /// nothing feasible — reported, not thrown.
    pub certified: Vec<CertifiedParams>,
    /// `(δ, γ)` candidates that failed certification.
    pub rejected: Vec<(f64, f64)>,
    /// The `δ` feasibility boundary for this `A`.
    pub delta_boundary: f64,
}

/// Searches for admissible `(δ, γ)` with certified-negative scanned margin.
///
/// Candidates descend a geometric ladder from half the `δ` feasibility
/// boundary; each is pre-filtered against the boundary set and then
/// certified by a margin scan plus both bound chains at 64 sampled ξ.
pub fn search_params(a_const: f64, tol: QuadTolerance) -> ParamSearch {
    assert!(a_const > 0.0, "search_params requires A > 0");
    let boundary = delta_feasibility_boundary(a_const);
    let mut certified = Vec::new();
    let mut rejected = Vec::new();

    for step in 0..4 {
        let delta = 0.5 * boundary / 10f64.powi(step);
        let gamma = (delta / 10.0).min(0.5 * INV_PI / a_const);
        if feasibility_violation(a_const, delta, gamma).is_some() {
            rejected.push((delta, gamma));
            continue;
        }
        let params = match DoubleLogParams::new(delta, gamma) {
            Ok(p) => p,
            Err(_) => {
                rejected.push((delta, gamma));
                continue;
            }
        };
        let w = DoubleLogModulus::new(params);
        let grid = log_grid(delta * 1e-8, delta * 1e8, 161);
        let scan = match scan_margins(&grid, &w, a_const, tol) {
            Ok(s) => s,
            Err(_) => {
                rejected.push((delta, gamma));
                continue;
            }
        };
        let chains_pass = chains_hold(&w, a_const, tol);
        if scan.all_certified_negative && chains_pass {
            certified.push(CertifiedParams {
                params,
                max_margin: scan.max_margin,
                argmax_xi: scan.argmax_xi,
                total_quad_error: scan.total_quad_error,
            });
        } else {
            rejected.push((delta, gamma));
        }
    }

    ParamSearch {
        certified,
        rejected,
        delta_boundary: boundary,
    }
}

/// Both chains at 64 log-spaced ξ each.
pub fn chains_hold(w: &DoubleLogModulus, a_const: f64, tol: QuadTolerance) -> bool {
    let delta = w.delta();
    let small = log_grid(delta * 1e-8, delta, 64);
    let large = log_grid(delta, delta * 1e8, 64);
    let small_ok = small
        .par_iter()
        .all(|&xi| matches!(check_case_small(xi, w, a_const, tol), Ok(r) if r.pass));
    let large_ok = large
        .par_iter()
        .all(|&xi| matches!(check_case_large(xi, w, a_const, tol), Ok(r) if r.pass));
    small_ok && large_ok
}
