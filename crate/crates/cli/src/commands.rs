//! Subcommand implementations. Each returns the process exit code.

use std::path::Path;

use anyhow::{bail, Context, Result};
use sqg_core::diagnostics::{calibrate_a, empirical_modulus, min_admissible_c};
use sqg_core::grid::ScalarField;
use sqg_core::modulus::{DoubleLogModulus, DoubleLogParams};
use sqg_core::quad::QuadTolerance;
use sqg_core::solver::{run, Outcome};
use sqg_core::verify::{
    chains_hold, feasibility_violation, log_grid, scan_margins, search_params,
};

use crate::config::{ExperimentConfig, InitialCondition};
use crate::report;
use crate::snapshot::{write_snapshot, Snapshot};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;

const DEFAULT_CUTOFF: f64 = std::f64::consts::PI;

pub fn simulate(config_path: &Path) -> Result<i32> {
    let cfg = ExperimentConfig::load(config_path)?;
    let theta0 = cfg.initial_field();

    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating output dir {}", cfg.output_dir.display()))?;
    let snap_dir = cfg.output_dir.join("snapshots");
    std::fs::create_dir_all(&snap_dir)?;

    let result = run(&theta0, &cfg.solver)?;
    let mut diagnostics = result.trajectory.diagnostics.clone();

    // Fill min_C on snapshot rows when a modulus family is configured.
    if let Some(params) = cfg.modulus {
        let w = DoubleLogModulus::new(params);
        let mut warned = false;
        for (t, snap) in result
            .trajectory
            .times
            .iter()
            .zip(&result.trajectory.snapshots)
        {
            match min_admissible_c(snap, &w, DEFAULT_CUTOFF) {
                Ok(r) => {
                    if let Some(rec) = diagnostics.iter_mut().find(|rec| rec.t == *t) {
                        rec.min_c = Some(r.c);
                    }
                }
                Err(e) => {
                    if !warned {
                        eprintln!("warning: min_C not recorded: {e}");
                        warned = true;
                    }
                }
            }
        }
    }

    report::write_diagnostics_csv(&cfg.output_dir.join("diagnostics.csv"), &diagnostics)?;
    for (i, (t, snap)) in result
        .trajectory
        .times
        .iter()
        .zip(&result.trajectory.snapshots)
        .enumerate()
    {
        write_snapshot(
            &snap_dir.join(format!("snap_{i:06}.sqg")),
            &Snapshot {
                t: *t,
                alpha: cfg.solver.alpha,
                field: snap.clone(),
            },
        )?;
    }
    write_meta(&cfg, &result.outcome, diagnostics.len())?;

    match result.outcome {
        Outcome::Completed => {
            println!(
                "completed: t_end={}, steps={}, snapshots={}",
                cfg.solver.t_end,
                diagnostics.len() - 1,
                result.trajectory.times.len()
            );
            Ok(EXIT_OK)
        }
        Outcome::BlowUp { t, step, sup_theta } => {
            eprintln!(
                "blow-up abort at t={t:.6} (step {step}): sup_theta={sup_theta:e}; partial outputs written"
            );
            Ok(EXIT_BLOWUP)
        }
    }
}

fn write_meta(cfg: &ExperimentConfig, outcome: &Outcome, rows: usize) -> Result<()> {
    let initial = match &cfg.initial {
        InitialCondition::Zero => "zero".to_string(),
        InitialCondition::Benchmark => "benchmark".to_string(),
        InitialCondition::Random { seed } => format!("random (seed = {seed})"),
        InitialCondition::Modes(m) => format!("{} explicit modes", m.len()),
    };
    let text = format!(
        "n = {}\nalpha = {:e}\nt_end = {:e}\ninitial = {:?}\namplitude = {:e}\nseed = {}\na = {:e}\noutcome = {:?}\ndiagnostic_rows = {}\n",
        cfg.grid.n(),
        cfg.solver.alpha,
        cfg.solver.t_end,
        initial,
        cfg.amplitude,
        cfg.seed,
        cfg.a_const,
        outcome,
        rows,
    );
    std::fs::write(cfg.output_dir.join("meta.toml"), text)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn verify_inequality(
    a_const: f64,
    delta: f64,
    gamma: f64,
    xi_min: Option<f64>,
    xi_max: Option<f64>,
    points: usize,
    out: &Path,
) -> Result<i32> {
    if let Some(boundary) = feasibility_violation(a_const, delta, gamma) {
        println!("FAIL: feasibility boundary violated: {boundary}");
        return Ok(EXIT_FAIL);
    }
    let params = DoubleLogParams::new(delta, gamma)
        .map_err(|e| anyhow::anyhow!("inadmissible modulus parameters: {e}"))?;
    let w = DoubleLogModulus::new(params);

    let lo = xi_min.unwrap_or(delta * 1e-8);
    let hi = xi_max.unwrap_or(delta * 1e8);
    if !(lo > 0.0 && hi >= lo) {
        bail!("xi range must satisfy 0 < xi_min <= xi_max");
    }
    if points < 16 || lo > delta * 1e-8 || hi < delta * 1e8 {
        eprintln!(
            "warning: grid ({points} points over [{lo:e}, {hi:e}]) does not cover the recommended [1e-8, 1e8]×delta range"
        );
    }

    let tol = QuadTolerance::default();
    let grid = log_grid(lo, hi, points);
    let scan = scan_margins(&grid, &w, a_const, tol)?;
    report::write_margins_csv(out, &scan.reports)?;

    let chains_ok = chains_hold(&w, a_const, tol);
    println!(
        "max margin {:e} at xi = {:e}; summed quadrature error {:e}; case chains: {}",
        scan.max_margin,
        scan.argmax_xi,
        scan.total_quad_error,
        if chains_ok { "hold" } else { "FAILED" }
    );
    if scan.all_certified_negative {
        println!("PASS: margin certified negative at all {points} grid points");
        Ok(EXIT_OK)
    } else {
        println!("FAIL: margin not certified negative everywhere");
        Ok(EXIT_FAIL)
    }
}

pub fn scan_params(a_const: f64, out: Option<&Path>) -> Result<i32> {
    if a_const <= 0.0 {
        bail!("--a must be > 0");
    }
    let search = search_params(a_const, QuadTolerance::default());
    println!(
        "delta feasibility boundary for A={a_const:e}: delta <= {:e}",
        search.delta_boundary
    );
    let rows: Vec<(f64, f64, f64, f64, f64)> = search
        .certified
        .iter()
        .map(|c| {
            (
                c.params.delta(),
                c.params.gamma(),
                c.max_margin,
                c.argmax_xi,
                c.total_quad_error,
            )
        })
        .collect();
    for (delta, gamma, margin, xi, _) in &rows {
        println!("certified: delta={delta:e} gamma={gamma:e} max_margin={margin:e} at xi={xi:e}");
    }
    if let Some(path) = out {
        report::write_params_csv(path, &rows)?;
    }
    if rows.is_empty() {
        println!("no admissible (delta, gamma) found in the search box");
        Ok(EXIT_FAIL)
    } else {
        Ok(EXIT_OK)
    }
}

pub fn empirical_modulus_cmd(snapshot: &Path, cutoff: f64, out: &Path) -> Result<i32> {
    let snap = crate::snapshot::read_snapshot(snapshot)?;
    let em = empirical_modulus(&snap.field, cutoff)?;
    report::write_empirical_csv(out, &em)?;
    println!(
        "{} separation bins (subsampled: {}), max difference {:e}",
        em.distances.len(),
        em.subsampled,
        em.max_value()
    );
    Ok(EXIT_OK)
}

/// Pure single-mode corpus used for calibration.
fn single_mode_corpus(cfg: &ExperimentConfig) -> Vec<ScalarField> {
    let modes: [(f64, f64); 4] = [(1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (2.0, 1.0)];
    modes
        .iter()
        .map(|&(k1, k2)| {
            let mut f =
                ScalarField::from_fn(cfg.grid, move |x, y| (k1 * x + k2 * y).cos());
            f.scale(cfg.amplitude);
            f
        })
        .collect()
}

pub fn calibrate_a_cmd(config_path: &Path) -> Result<i32> {
    let cfg = ExperimentConfig::load(config_path)?;
    let Some(params) = cfg.modulus else {
        bail!("calibrate-a needs a [modulus] section in the config");
    };
    let w = DoubleLogModulus::new(params);
    let corpus = single_mode_corpus(&cfg);
    let report = calibrate_a(&corpus, &w, DEFAULT_CUTOFF, QuadTolerance::default())?;
    for (i, a) in report.per_field.iter().enumerate() {
        println!("field {i}: A = {a:e}");
    }
    println!("empirical A = {:e}", report.a_empirical);
    Ok(EXIT_OK)
}
