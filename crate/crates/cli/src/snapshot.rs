//! Binary snapshot format.
//!
//! Layout (all little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "SQG1"
//! 4       4     u32  n (points per side)
//! 8       8     f64  t (snapshot time)
//! 16      8     f64  alpha (dissipation exponent)
//! 24      8n²   f64  samples, row-major
//! ```

use std::io::{Read, Write};
use std::path::Path;

use sqg_core::grid::{ScalarField, TorusGrid};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"SQG1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?} (expected \"SQG1\")")]
    BadMagic([u8; 4]),
    #[error("invalid grid size {0}")]
    BadGrid(usize),
    #[error("file truncated: expected {expected} samples")]
    Truncated { expected: usize },
    #[error("non-finite sample in snapshot")]
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub alpha: f64,
    pub field: ScalarField,
}

pub fn write_snapshot(path: &Path, snap: &Snapshot) -> Result<(), SnapshotError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    out.write_all(&MAGIC)?;
    out.write_all(&(snap.field.grid().n() as u32).to_le_bytes())?;
    out.write_all(&snap.t.to_le_bytes())?;
    out.write_all(&snap.alpha.to_le_bytes())?;
    for v in snap.field.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    let mut input = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(SnapshotError::BadMagic(magic));
    }
    let mut u32buf = [0u8; 4];
    input.read_exact(&mut u32buf)?;
    let n = u32::from_le_bytes(u32buf) as usize;
    let grid = TorusGrid::new(n).map_err(|_| SnapshotError::BadGrid(n))?;

    let mut f64buf = [0u8; 8];
    input.read_exact(&mut f64buf)?;
    let t = f64::from_le_bytes(f64buf);
    input.read_exact(&mut f64buf)?;
    let alpha = f64::from_le_bytes(f64buf);

    let expected = grid.len();
    let mut values = Vec::with_capacity(expected);
    for _ in 0..expected {
        if input.read_exact(&mut f64buf).is_err() {
            return Err(SnapshotError::Truncated { expected });
        }
        values.push(f64::from_le_bytes(f64buf));
    }
    let field = ScalarField::new(grid, values).map_err(|_| SnapshotError::NonFinite)?;
    Ok(Snapshot { t, alpha, field })
}
