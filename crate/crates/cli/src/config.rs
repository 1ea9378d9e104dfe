//! Experiment configuration: a TOML file with `[grid]`, `[solver]`,
//! `[initial]`, optional `[modulus]`, and `[output]` sections. The exact
//! grammar is documented in the repository README.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::Deserialize;
use sqg_core::grid::{ScalarField, SpectralField, TorusGrid};
use sqg_core::modulus::DoubleLogParams;
use sqg_core::solver::{AdvectionSign, SolverConfig};
use sqg_core::spectral::from_spectral;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("[{section}] {message}")]
    Invalid {
        section: &'static str,
        message: String,
    },
}

fn invalid(section: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        section,
        message: message.into(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    grid: RawGrid,
    solver: RawSolver,
    initial: RawInitial,
    #[serde(default)]
    modulus: Option<RawModulus>,
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    alpha: f64,
    t_end: f64,
    cfl: Option<f64>,
    dt_max: Option<f64>,
    dealias: Option<bool>,
    advection_sign: Option<String>,
    snapshot_every: Option<usize>,
    nonlinear: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    preset: Option<String>,
    modes: Option<Vec<(i64, i64, f64, f64)>>,
    amplitude: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModulus {
    delta: f64,
    gamma: f64,
    a: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: PathBuf,
}

/// Initial condition specification after validation.
#[derive(Debug, Clone)]
pub enum InitialCondition {
    Zero,
    /// `sin x₁ sin x₂ + cos x₂`.
    Benchmark,
    /// Seeded band-limited noise, sup-normalized to 1 before scaling.
    Random { seed: u64 },
    /// Sum of `amp·cos(k₁x₁ + k₂x₂ + phase)` terms.
    Modes(Vec<(i64, i64, f64, f64)>),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub grid: TorusGrid,
    pub solver: SolverConfig,
    pub initial: InitialCondition,
    pub amplitude: f64,
    pub seed: u64,
    pub modulus: Option<DoubleLogParams>,
    pub a_const: f64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        let raw: RawConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let grid = TorusGrid::new(raw.grid.n)
            .map_err(|e| invalid("grid", format!("n: {e} (requires: n even and n >= 8)")))?;

        let mut solver = SolverConfig::new(raw.solver.alpha, raw.solver.t_end);
        if let Some(cfl) = raw.solver.cfl {
            solver.cfl = cfl;
        }
        if let Some(dt_max) = raw.solver.dt_max {
            solver.dt_max = dt_max;
        }
        if let Some(dealias) = raw.solver.dealias {
            solver.dealias_enabled = dealias;
        }
        if let Some(every) = raw.solver.snapshot_every {
            solver.snapshot_every = every;
        }
        if let Some(nl) = raw.solver.nonlinear {
            solver.nonlinear_enabled = nl;
        }
        if let Some(sign) = &raw.solver.advection_sign {
            solver.advection_sign = match sign.as_str() {
                "plus" => AdvectionSign::Plus,
                "minus" => AdvectionSign::Minus,
                other => {
                    return Err(invalid(
                        "solver",
                        format!("advection_sign: unknown value {other:?} (expected \"plus\" or \"minus\")"),
                    ))
                }
            };
        }
        solver
            .validate()
            .map_err(|e| invalid("solver", e.to_string()))?;

        let initial = match (&raw.initial.preset, &raw.initial.modes) {
            (Some(_), Some(_)) => {
                return Err(invalid("initial", "give either preset or modes, not both"))
            }
            (None, None) => return Err(invalid("initial", "one of preset or modes is required")),
            (Some(name), None) => match name.as_str() {
                "zero" => InitialCondition::Zero,
                "benchmark" => InitialCondition::Benchmark,
                "random" => InitialCondition::Random {
                    seed: raw.initial.seed.unwrap_or(0),
                },
                other => {
                    return Err(invalid(
                        "initial",
                        format!("preset: unknown preset {other:?} (expected \"zero\", \"benchmark\", or \"random\")"),
                    ))
                }
            },
            (None, Some(modes)) => {
                let nyq = (raw.grid.n / 2) as i64;
                for &(k1, k2, _, _) in modes {
                    if k1.abs() > nyq || k2.abs() > nyq {
                        return Err(invalid(
                            "initial",
                            format!("modes: wavenumber ({k1},{k2}) exceeds the Nyquist limit {nyq} for n={}", raw.grid.n),
                        ));
                    }
                }
                InitialCondition::Modes(modes.clone())
            }
        };

        let (modulus, a_const) = match raw.modulus {
            None => (None, 1.0),
            Some(m) => {
                let params = DoubleLogParams::new(m.delta, m.gamma).map_err(|e| {
                    invalid(
                        "modulus",
                        format!("{e} (requires: 0 < gamma < delta/2 and delta <= 0.01)"),
                    )
                })?;
                let a = m.a.unwrap_or(1.0);
                if a <= 0.0 {
                    return Err(invalid("modulus", "a must be > 0"));
                }
                (Some(params), a)
            }
        };

        Ok(Self {
            grid,
            solver,
            initial,
            amplitude: raw.initial.amplitude.unwrap_or(1.0),
            seed: raw.initial.seed.unwrap_or(0),
            modulus,
            a_const,
            output_dir: raw.output.dir,
        })
    }

    /// Builds the initial field.
    pub fn initial_field(&self) -> ScalarField {
        build_initial(self.grid, &self.initial, self.amplitude)
    }
}

pub fn build_initial(grid: TorusGrid, ic: &InitialCondition, amplitude: f64) -> ScalarField {
    let mut field = match ic {
        InitialCondition::Zero => ScalarField::zeros(grid),
        InitialCondition::Benchmark => {
            ScalarField::from_fn(grid, |x, y| x.sin() * y.sin() + y.cos())
        }
        InitialCondition::Modes(modes) => ScalarField::from_fn(grid, |x, y| {
            modes
                .iter()
                .map(|&(k1, k2, amp, phase)| amp * (k1 as f64 * x + k2 as f64 * y + phase).cos())
                .sum()
        }),
        InitialCondition::Random { seed } => random_band_limited(grid, *seed),
    };
    if amplitude != 1.0 {
        field.scale(amplitude);
    }
    field
}

/// Band-limited (`max |k_j| ≤ n/6`) Gaussian field, Hermitian-symmetrized,
/// normalized to unit sup norm.
fn random_band_limited(grid: TorusGrid, seed: u64) -> ScalarField {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let band = (n / 6).max(1) as i64;
    let mut spec = SpectralField::zeros(grid);
    for k2 in -band..=band {
        for k1 in -band..=band {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            // Fill each conjugate pair once.
            if (k2 > 0) || (k2 == 0 && k1 > 0) {
                let re = rng.gen_range(-1.0..1.0);
                let im = rng.gen_range(-1.0..1.0);
                *spec.coeff_at_mut(k1, k2) = Complex64::new(re, im);
                *spec.coeff_at_mut(-k1, -k2) = Complex64::new(re, -im);
            }
        }
    }
    let mut field = from_spectral(&spec).expect("synthetic spectrum is finite");
    let sup = field.sup_norm();
    if sup > 0.0 {
        field.scale(1.0 / sup);
    }
    field
}
