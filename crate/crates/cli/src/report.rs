//! CSV writers. Every file carries a header row; floats are printed with
//! `{:e}`, the shortest representation that round-trips exactly, so output
//! bytes are identical across runs for identical inputs.

use std::io::Write;
use std::path::Path;

use sqg_core::diagnostics::{DiagnosticsRecord, EmpiricalModulus};
use sqg_core::verify::MarginReport;

pub fn write_diagnostics_csv(path: &Path, records: &[DiagnosticsRecord]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "t,sup_theta,sup_grad,l2,min_C")?;
    for r in records {
        let min_c = r.min_c.map(|c| format!("{c:e}")).unwrap_or_default();
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{}",
            r.t, r.sup_theta, r.sup_grad, r.l2, min_c
        )?;
    }
    out.flush()
}

pub fn write_margins_csv(path: &Path, reports: &[MarginReport]) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "xi,flow,dissipation,margin,quad_error")?;
    for r in reports {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e}",
            r.xi, r.flow, r.dissipation, r.margin, r.quad_error
        )?;
    }
    out.flush()
}

pub fn write_empirical_csv(path: &Path, em: &EmpiricalModulus) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "separation,max_diff")?;
    for (xi, d) in em.distances.iter().zip(&em.max_diff) {
        writeln!(out, "{xi:e},{d:e}")?;
    }
    out.flush()
}

pub fn write_params_csv(
    path: &Path,
    rows: &[(f64, f64, f64, f64, f64)],
) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "delta,gamma,max_margin,argmax_xi,total_quad_error")?;
    for (delta, gamma, margin, xi, err) in rows {
        writeln!(out, "{delta:e},{gamma:e},{margin:e},{xi:e},{err:e}")?;
    }
    out.flush()
}
