//! Time integration of `θ_t = ±u·∇θ − (−Δ)^α θ` with `u = (−R₂θ, R₁θ)`.
//!
//! The linear dissipation is diagonal in Fourier space, so each step applies
//! classical four-stage Runge–Kutta to the integrating-factor variable
//! `G(t) = exp(t|k|^{2α})·θ̂(t)`: the stiff part is integrated exactly and
//! the step size is constrained only by advection (CFL).
//!
//! The default advection sign is `Plus` (`θ_t = +u·∇θ − Λ^{2α}θ`); `Minus`
//! gives the transport convention `θ_t + u·∇θ + Λ^{2α}θ = 0`. Every
//! conservation property holds for both.

use num_complex::Complex64;
use thiserror::Error;

use crate::diagnostics::DiagnosticsRecord;
use crate::grid::{FieldError, ScalarField, SpectralField};
use crate::spectral::{
    advection_fields, dealias, dissipation_symbol, from_spectral, gradient, to_spectral,
};

/// Sign of the `u·∇θ` term on the right-hand side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AdvectionSign {
    #[default]
    Plus,
    Minus,
}

impl AdvectionSign {
    fn factor(self) -> f64 {
        match self {
            AdvectionSign::Plus => 1.0,
            AdvectionSign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Dissipation exponent; `0.5` is critical.
    pub alpha: f64,
    pub t_end: f64,
    /// Courant factor in `dt = cfl·h / max(‖u‖∞, ε)`.
    pub cfl: f64,
    pub dt_max: f64,
    pub dealias_enabled: bool,
    pub advection_sign: AdvectionSign,
    /// Steps between persisted snapshots.
    pub snapshot_every: usize,
    /// Test hook: disable the nonlinear term to integrate pure dissipation.
    pub nonlinear_enabled: bool,
}

impl SolverConfig {
    pub fn new(alpha: f64, t_end: f64) -> Self {
        Self {
            alpha,
            t_end,
            cfl: 0.4,
            dt_max: 0.05,
            dealias_enabled: true,
            advection_sign: AdvectionSign::Plus,
            snapshot_every: 100,
            nonlinear_enabled: true,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.alpha >= 0.0) {
            return Err(SolverError::BadConfig("alpha must be >= 0".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(SolverError::BadConfig("t_end must be > 0".into()));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SolverError::BadConfig("cfl must lie in (0, 1]".into()));
        }
        if !(self.dt_max > 0.0) {
            return Err(SolverError::BadConfig("dt_max must be > 0".into()));
        }
        if self.snapshot_every == 0 {
            return Err(SolverError::BadConfig("snapshot_every must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("non-finite state produced during a step")]
    NonFiniteState,
}

/// Velocity floor in the CFL denominator.
const CFL_FLOOR: f64 = 1e-12;
/// Blow-up threshold relative to the initial sup norm.
const BLOWUP_FACTOR: f64 = 1e6;

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    /// Aborted: non-finite values or sup-norm runaway. Fields are the last
    /// finite diagnostics before the abort.
    BlowUp { t: f64, step: usize, sup_theta: f64 },
}

/// Snapshots, snapshot times, and per-step diagnostics of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<ScalarField>,
    pub diagnostics: Vec<DiagnosticsRecord>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trajectory: Trajectory,
    pub outcome: Outcome,
}

/// The advection term `±(u·∇θ)` transformed back to Fourier space
/// (dealiased when enabled), together with the CFL speed `‖u‖∞`.
fn advection_term(
    field: &SpectralField,
    sign: AdvectionSign,
    dealias_enabled: bool,
) -> Result<(SpectralField, f64), SolverError> {
    let adv = advection_fields(field)?;
    let grid = field.grid();
    let mut product = Vec::with_capacity(grid.len());
    let s = sign.factor();
    for i in 0..grid.len() {
        product
            .push(s * (adv.u1.values()[i] * adv.gx.values()[i] + adv.u2.values()[i] * adv.gy.values()[i]));
    }
    if product.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFiniteState);
    }
    let spec = to_spectral(&ScalarField::new_unchecked(grid, product))?;
    Ok((
        if dealias_enabled { dealias(&spec) } else { spec },
        adv.u_sup,
    ))
}

/// The advection term `±(u·∇θ)` transformed back to Fourier space,
/// dealiased when enabled.
pub fn nonlinear_term(
    field: &SpectralField,
    sign: AdvectionSign,
    dealias_enabled: bool,
) -> Result<SpectralField, SolverError> {
    Ok(advection_term(field, sign, dealias_enabled)?.0)
}

fn axpy(state: &SpectralField, coeff: f64, rhs: &SpectralField) -> SpectralField {
    let mut out = state.clone();
    for (c, r) in out.coeffs_mut().iter_mut().zip(rhs.coeffs()) {
        *c += coeff * r;
    }
    out
}

fn mul_factor(field: &SpectralField, factor: &[f64]) -> SpectralField {
    let mut out = field.clone();
    for (c, &e) in out.coeffs_mut().iter_mut().zip(factor) {
        *c *= e;
    }
    out
}

/// Half- and full-step integrating factors for a fixed `dt`; reused while
/// the CFL condition keeps `dt` unchanged.
struct IntegratingFactors {
    dt: f64,
    e_half: Vec<f64>,
    e_full: Vec<f64>,
}

impl IntegratingFactors {
    fn new(symbol: &[f64], dt: f64) -> Self {
        Self {
            dt,
            e_half: symbol.iter().map(|&l| (-l * dt / 2.0).exp()).collect(),
            e_full: symbol.iter().map(|&l| (-l * dt).exp()).collect(),
        }
    }
}

/// One integrating-factor RK4 step of size `dt`.
pub fn step(
    field: &SpectralField,
    dt: f64,
    cfg: &SolverConfig,
) -> Result<SpectralField, SolverError> {
    assert!(dt > 0.0, "step requires dt > 0");
    let symbol = dissipation_symbol(field.grid(), cfg.alpha);
    let factors = IntegratingFactors::new(&symbol, dt);
    if !cfg.nonlinear_enabled {
        return Ok(mul_factor(field, &factors.e_full));
    }
    let stage1 = nonlinear_term(field, cfg.advection_sign, cfg.dealias_enabled)?;
    rk4_given_stage1(field, cfg, &stage1, &factors)
}

fn rk4_given_stage1(
    field: &SpectralField,
    cfg: &SolverConfig,
    a: &SpectralField,
    factors: &IntegratingFactors,
) -> Result<SpectralField, SolverError> {
    let dt = factors.dt;
    let e_half = &factors.e_half;
    let e_full = &factors.e_full;
    let nl = |f: &SpectralField| nonlinear_term(f, cfg.advection_sign, cfg.dealias_enabled);

    let u_b = mul_factor(&axpy(field, dt / 2.0, a), e_half);
    let b = nl(&u_b)?;
    let u_c = axpy(&mul_factor(field, e_half), dt / 2.0, &b);
    let c = nl(&u_c)?;
    let u_d = axpy(&mul_factor(field, e_full), dt, &mul_factor(&c, e_half));
    let d = nl(&u_d)?;

    let mut next = mul_factor(field, e_full);
    let sixth = dt / 6.0;
    let ea = mul_factor(a, e_full);
    let eb = mul_factor(&b, e_half);
    let ec = mul_factor(&c, e_half);
    for (((out, ka), (kb, kc)), kd) in next
        .coeffs_mut()
        .iter_mut()
        .zip(ea.coeffs())
        .zip(eb.coeffs().iter().zip(ec.coeffs()))
        .zip(d.coeffs())
    {
        *out += sixth * (ka + 2.0 * (kb + kc) + kd);
    }
    if !next.is_finite() {
        return Err(SolverError::NonFiniteState);
    }
    Ok(next)
}

/// Measures diagnostics for the current state.
fn measure(spec: &SpectralField, t: f64) -> Result<(ScalarField, DiagnosticsRecord), SolverError> {
    let phys = from_spectral(spec)?;
    let (gx, gy) = gradient(spec)?;
    let sup_grad = gx
        .values()
        .iter()
        .zip(gy.values())
        .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
    let rec = DiagnosticsRecord {
        t,
        sup_theta: phys.sup_norm(),
        sup_grad,
        l2: phys.l2_norm(),
        min_c: None,
    };
    Ok((phys, rec))
}

/// Integrates from `theta0` to `t_end` with CFL-limited steps, recording
/// diagnostics every step and snapshots on the configured schedule (plus the
/// initial and final states).
pub fn run(theta0: &ScalarField, cfg: &SolverConfig) -> Result<RunResult, SolverError> {
    cfg.validate()?;
    let mut spec = to_spectral(theta0)?;
    if cfg.dealias_enabled {
        spec = dealias(&spec);
    }
    let symbol = dissipation_symbol(theta0.grid(), cfg.alpha);
    let h = theta0.grid().h();

    let (phys0, rec0) = measure(&spec, 0.0)?;
    let sup0 = rec0.sup_theta;
    let mut trajectory = Trajectory {
        times: vec![0.0],
        snapshots: vec![phys0],
        diagnostics: vec![rec0],
    };

    let mut t = 0.0;
    let mut step_idx = 0usize;
    let mut factors: Option<IntegratingFactors> = None;
    while t < cfg.t_end {
        // Stage 1 of the step doubles as the CFL speed estimate.
        let stage1 = if cfg.nonlinear_enabled {
            match advection_term(&spec, cfg.advection_sign, cfg.dealias_enabled) {
                Ok(pair) => Some(pair),
                Err(SolverError::NonFiniteState) => {
                    let last = *trajectory.diagnostics.last().unwrap();
                    return Ok(RunResult {
                        trajectory,
                        outcome: Outcome::BlowUp {
                            t,
                            step: step_idx,
                            sup_theta: last.sup_theta,
                        },
                    });
                }
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        let u_sup = stage1.as_ref().map_or(0.0, |(_, s)| *s);
        let dt_nominal = cfg.dt_max.min(cfg.cfl * h / u_sup.max(CFL_FLOOR));
        // Absorb FP accumulation dust into the final step instead of taking
        // a ~1e-13-long trailing step.
        let remaining = cfg.t_end - t;
        let is_final = remaining <= dt_nominal * (1.0 + 1e-9);
        let dt = if is_final { remaining } else { dt_nominal };
        debug_assert!(dt > 0.0);
        if factors.as_ref().is_none_or(|f| f.dt != dt) {
            factors = Some(IntegratingFactors::new(&symbol, dt));
        }
        let facs = factors.as_ref().unwrap();

        let stepped = match &stage1 {
            Some((a, _)) => rk4_given_stage1(&spec, cfg, a, facs),
            None => Ok(mul_factor(&spec, &facs.e_full)),
        };
        let next = match stepped {
            Ok(s) => s,
            Err(SolverError::NonFiniteState) => {
                let last = *trajectory.diagnostics.last().unwrap();
                return Ok(RunResult {
                    trajectory,
                    outcome: Outcome::BlowUp {
                        t,
                        step: step_idx,
                        sup_theta: last.sup_theta,
                    },
                });
            }
            Err(e) => return Err(e),
        };
        spec = next;
        t = if is_final { cfg.t_end } else { t + dt };
        step_idx += 1;

        let (phys, rec) = match measure(&spec, t) {
            Ok(pair) => pair,
            Err(_) => {
                let last = *trajectory.diagnostics.last().unwrap();
                return Ok(RunResult {
                    trajectory,
                    outcome: Outcome::BlowUp {
                        t,
                        step: step_idx,
                        sup_theta: last.sup_theta,
                    },
                });
            }
        };
        if !rec.sup_theta.is_finite() || rec.sup_theta > BLOWUP_FACTOR * sup0 {
            trajectory.diagnostics.push(rec);
            return Ok(RunResult {
                trajectory,
                outcome: Outcome::BlowUp {
                    t,
                    step: step_idx,
                    sup_theta: rec.sup_theta,
                },
            });
        }
        trajectory.diagnostics.push(rec);

        if step_idx.is_multiple_of(cfg.snapshot_every) || is_final {
            trajectory.times.push(t);
            trajectory.snapshots.push(phys);
        }
    }

    Ok(RunResult {
        trajectory,
        outcome: Outcome::Completed,
    })
}

/// Spectral mean (the `k = 0` coefficient) of the represented function.
pub fn spectral_mean(spec: &SpectralField) -> Complex64 {
    spec.coeffs()[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    fn sup_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.values()
            .iter()
            .zip(b.values())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn nonlinear_term_vanishes_for_constant() {
        let g = grid(32);
        let f = to_spectral(&ScalarField::from_fn(g, |_, _| 1.7)).unwrap();
        let nl = nonlinear_term(&f, AdvectionSign::Plus, true).unwrap();
        assert!(nl.max_abs() < 1e-14);
    }

    #[test]
    fn nonlinear_term_vanishes_for_single_mode_profiles() {
        let g = grid(32);
        // θ = sin x₁: u = (0, −cos x₁) ⊥ ∇θ = (cos x₁, 0).
        let f = to_spectral(&ScalarField::from_fn(g, |x, _| x.sin())).unwrap();
        assert!(nonlinear_term(&f, AdvectionSign::Plus, true).unwrap().max_abs() < 1e-14);
        // θ = sin x₁ + cos x₂: the two single-mode contributions cancel.
        let f = to_spectral(&ScalarField::from_fn(g, |x, y| x.sin() + y.cos())).unwrap();
        assert!(nonlinear_term(&f, AdvectionSign::Plus, true).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn nonlinear_term_matches_pointwise_oracle() {
        // θ = sin x₁ + cos 2x₂ ⇒ u = (−sin 2x₂, −cos x₁),
        // ∇θ = (cos x₁, −2 sin 2x₂) ⇒ u·∇θ = cos x₁ sin 2x₂.
        let g = grid(64);
        let f = to_spectral(&ScalarField::from_fn(g, |x, y| x.sin() + (2.0 * y).cos())).unwrap();
        let nl = nonlinear_term(&f, AdvectionSign::Plus, true).unwrap();
        let nl_phys = from_spectral(&nl).unwrap();
        let oracle = ScalarField::from_fn(g, |x, y| x.cos() * (2.0 * y).sin());
        assert!(sup_diff(&nl_phys, &oracle) < 1e-12);

        let nl_minus = nonlinear_term(&f, AdvectionSign::Minus, true).unwrap();
        let nl_minus_phys = from_spectral(&nl_minus).unwrap();
        let mut neg = oracle.clone();
        neg.scale(-1.0);
        assert!(sup_diff(&nl_minus_phys, &neg) < 1e-12);
    }

    #[test]
    fn step_keeps_zero_field_zero() {
        let g = grid(16);
        let zero = to_spectral(&ScalarField::zeros(g)).unwrap();
        let cfg = SolverConfig::new(0.5, 1.0);
        let out = step(&zero, 1e-2, &cfg).unwrap();
        assert!(out.max_abs() == 0.0);
    }

    #[test]
    fn pure_dissipation_is_exact_per_step() {
        let g = grid(32);
        let f = ScalarField::from_fn(g, |x, _| x.cos());
        let spec = to_spectral(&f).unwrap();
        let mut cfg = SolverConfig::new(0.5, 1.0);
        cfg.nonlinear_enabled = false;
        for dt in [1e-3, 0.1, 0.7] {
            let out = from_spectral(&step(&spec, dt, &cfg).unwrap()).unwrap();
            let expected = ScalarField::from_fn(g, |x, _| (-dt).exp() * x.cos());
            assert!(sup_diff(&out, &expected) < 1e-14, "dt={dt}");
        }
    }

    #[test]
    fn local_error_scales_as_dt_to_the_fifth() {
        let g = grid(64);
        let f = ScalarField::from_fn(g, |x, y| x.sin() * y.sin() + y.cos());
        let spec = to_spectral(&f).unwrap();
        let cfg = SolverConfig::new(0.5, 1.0);

        let local_err = |dt: f64| {
            let one = step(&spec, dt, &cfg).unwrap();
            let half = step(&step(&spec, dt / 2.0, &cfg).unwrap(), dt / 2.0, &cfg).unwrap();
            let d = from_spectral(&one).unwrap();
            let h = from_spectral(&half).unwrap();
            sup_diff(&d, &h)
        };

        // dt large enough that the dt⁵ local error clears the FFT noise floor.
        let dt = 0.02;
        let ratio = local_err(dt) / local_err(dt / 2.0);
        assert!(
            (ratio - 32.0).abs() <= 3.2,
            "local error ratio {ratio} not within 2^5 ± 10%"
        );
    }

    #[test]
    fn run_of_zero_field_stays_zero() {
        let g = grid(16);
        let cfg = SolverConfig::new(0.5, 0.5);
        let res = run(&ScalarField::zeros(g), &cfg).unwrap();
        assert_eq!(res.outcome, Outcome::Completed);
        for rec in &res.trajectory.diagnostics {
            assert_eq!(rec.sup_theta, 0.0);
            assert_eq!(rec.l2, 0.0);
        }
    }

    #[test]
    fn profile_depending_on_x1_only_decays_like_pure_dissipation() {
        // θ depending on x₁ alone has u ∥ x₂ and ∇θ ∥ x₁, so the nonlinear
        // term vanishes and the full run must match the dissipation-only run.
        let g = grid(32);
        let f = ScalarField::from_fn(g, |x, _| x.cos());
        let mut cfg = SolverConfig::new(0.5, 1.0);
        cfg.dt_max = 0.02;
        cfg.snapshot_every = 10;
        let full = run(&f, &cfg).unwrap();
        let mut cfg_lin = cfg;
        cfg_lin.nonlinear_enabled = false;
        let linear = run(&f, &cfg_lin).unwrap();
        assert_eq!(full.trajectory.times.len(), linear.trajectory.times.len());
        for (a, b) in full
            .trajectory
            .snapshots
            .iter()
            .zip(&linear.trajectory.snapshots)
        {
            assert!(sup_diff(a, b) < 1e-12);
        }
        let t_final = *full.trajectory.times.last().unwrap();
        let expected = ScalarField::from_fn(g, |x, _| (-t_final).exp() * x.cos());
        assert!(sup_diff(full.trajectory.snapshots.last().unwrap(), &expected) < 1e-10);
    }

    #[test]
    fn mean_is_conserved_and_l2_decays() {
        let g = grid(64);
        let f = ScalarField::from_fn(g, |x, y| 0.4 + x.sin() * y.sin() + y.cos());
        let mut cfg = SolverConfig::new(0.5, 0.5);
        cfg.snapshot_every = 5;
        let res = run(&f, &cfg).unwrap();
        assert_eq!(res.outcome, Outcome::Completed);
        let mean0 = spectral_mean(&to_spectral(&res.trajectory.snapshots[0]).unwrap());
        for snap in &res.trajectory.snapshots {
            let m = spectral_mean(&to_spectral(snap).unwrap());
            assert!((m - mean0).norm() <= 1e-12);
        }
        for pair in res.trajectory.diagnostics.windows(2) {
            assert!(pair[1].l2 <= pair[0].l2 * (1.0 + 1e-8));
        }
    }

    #[test]
    fn conservation_holds_for_both_advection_signs() {
        let g = grid(32);
        let f = ScalarField::from_fn(g, |x, y| x.sin() * y.sin() + y.cos());
        for sign in [AdvectionSign::Plus, AdvectionSign::Minus] {
            let mut cfg = SolverConfig::new(0.5, 0.3);
            cfg.advection_sign = sign;
            cfg.dt_max = 0.01;
            let res = run(&f, &cfg).unwrap();
            assert_eq!(res.outcome, Outcome::Completed);
            let sup0 = res.trajectory.diagnostics[0].sup_theta;
            for pair in res.trajectory.diagnostics.windows(2) {
                assert!(pair[1].l2 <= pair[0].l2 * (1.0 + 1e-8), "{sign:?}");
                assert!(pair[1].sup_theta <= sup0 * (1.0 + 1e-6), "{sign:?}");
            }
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let g = grid(16);
        let mut v = vec![0.0; g.len()];
        v[3] = f64::INFINITY;
        let f = ScalarField::new(g, v);
        assert!(f.is_err());
    }

    #[test]
    fn overflow_amplitude_aborts_with_blowup_report() {
        // 1e160·(cos x₁ + cos x₂): the advection product overflows in the
        // first step, which must surface as a blow-up outcome, not an Err.
        let g = grid(16);
        let f = ScalarField::from_fn(g, |x, y| 1e160 * (x.cos() + y.cos()));
        let cfg = SolverConfig::new(0.5, 1.0);
        let res = run(&f, &cfg).unwrap();
        match res.outcome {
            Outcome::BlowUp { step, .. } => assert!(step <= 1),
            Outcome::Completed => panic!("expected blow-up"),
        }
        assert!(!res.trajectory.snapshots.is_empty());
    }

    #[test]
    fn hermitian_symmetry_is_preserved_by_steps() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let g = grid(32);
        let f = ScalarField::from_fn(g, |_, _| rng.gen_range(-1.0..1.0));
        let cfg = SolverConfig::new(0.5, 1.0);
        let mut spec = dealias(&to_spectral(&f).unwrap());
        for _ in 0..5 {
            spec = step(&spec, 5e-3, &cfg).unwrap();
        }
        assert!(spec.hermitian_defect() < 1e-11);
    }
}
