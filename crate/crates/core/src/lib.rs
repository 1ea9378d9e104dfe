//! Simulation and verification workbench for the two-dimensional
//! dissipative surface quasi-geostrophic (SQG) equation
//!
//! ```text
//! θ_t = u·∇θ − (−Δ)^α θ,    u = (−R₂θ, R₁θ)
//! ```
//!
//! on the periodic square `[0, 2π)²`, where `R₁, R₂` are Riesz transforms
//! and `α = 1/2` is the critical dissipation strength.
//!
//! The crate has two halves:
//!
//! * a pseudo-spectral solver ([`spectral`], [`solver`]) with exact
//!   integration of the stiff dissipation via an integrating factor, and
//! * a verifier ([`modulus`], [`verify`], [`quad`]) that evaluates, with
//!   controlled-accuracy quadrature, the non-local maximum principle behind
//!   the global regularity of the critical equation: an explicit modulus of
//!   continuity whose flow-term bound `Ω(ξ)·ω′(ξ)` is dominated by the
//!   dissipation bound for every separation `ξ > 0`.
//!
//! [`diagnostics`] connects the two: empirical moduli of simulated fields,
//! the minimal admissible scaling constant of the modulus family along a
//! trajectory, and an empirical estimate of the velocity-modulus constant.

pub mod diagnostics;
pub mod grid;
pub mod modulus;
pub mod quad;
pub mod solver;
pub mod spectral;
pub mod verify;

pub use diagnostics::{
    calibrate_a, empirical_modulus, gradient_bound_check, min_admissible_c, DiagnosticsError,
    DiagnosticsRecord, EmpiricalModulus, MinAdmissibleC,
};
pub use grid::{FieldError, ScalarField, SpectralField, TorusGrid, VelocityField};
pub use modulus::{
    DoubleLogModulus, DoubleLogParams, LinearModulus, ModulusError, ModulusOfContinuity,
    PiecewiseLinearModulus, RampModulus, Side,
};
pub use quad::{QuadResult, QuadTolerance};
pub use solver::{
    nonlinear_term, run, step, AdvectionSign, Outcome, RunResult, SolverConfig, SolverError,
    Trajectory,
};
pub use spectral::{
    dealias, divergence_defect, frac_laplacian, from_spectral, gradient, riesz, to_spectral,
    velocity_from_theta, Axis,
};
pub use verify::{
    big_omega, breakthrough_margin, check_case_large, check_case_small, chains_hold,
    delta_feasibility_boundary, dissipation_functional, dissipation_parts, feasibility_violation,
    flow_functional, log_grid, scan_margins, search_params, ChainLink, ChainReport,
    FeasibilityBoundary, MarginReport, ParamSearch, ScanSummary, VerifyError,
};
