//! Binary dump of a delay-Doppler channel matrix.
//!
//! Layout, all little-endian:
//!
//! | offset | size | content |
//! |---|---|---|
//! | 0 | 8 | magic `OTFSHDD1` |
//! | 8 | 4 | `M` as u32 |
//! | 12 | 4 | `N` as u32 |
//! | 16 | `8 (MN)^2` | entries row-major, each as `re: f32, im: f32` |
//!
//! Row and column index `a M + b` address Doppler bin `a`, delay bin `b`.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use otfs_outage_core::{DdMatrix, OtfsGrid};

use crate::error::{io_error, Error, Result};

pub const MAGIC: &[u8; 8] = b"OTFSHDD1";

pub fn write_dump<W: Write>(mut w: W, h: &DdMatrix) -> std::io::Result<()> {
    let grid = h.grid();
    let mut buf = Vec::with_capacity(16 + 8 * h.entries().len());
    buf.extend_from_slice(MAGIC);
    for d in [grid.m, grid.n] {
        let d = u32::try_from(d).map_err(|_| std::io::Error::other("grid dimension exceeds u32"))?;
        buf.extend_from_slice(&d.to_le_bytes());
    }
    for z in h.entries() {
        buf.extend_from_slice(&(z.re as f32).to_le_bytes());
        buf.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    w.write_all(&buf)
}

/// Reads a dump; `grid` supplies the physical parameters the file does not store.
pub fn read_dump<R: Read>(mut r: R, delta_f: f64, f_c: f64) -> Result<DdMatrix> {
    let path = Path::new("<dump>");
    let bad = |message: String| Error::Parse { path: path.to_path_buf(), line: 0, message };
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io_error(path))?;
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad("missing OTFSHDD1 header".into()));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as usize;
    let (m, n) = (word(8), word(12));
    let dim = m * n;
    if bytes.len() != 16 + 8 * dim * dim {
        return Err(bad(format!("expected {} payload bytes for M={m} N={n}, found {}", 8 * dim * dim, bytes.len() - 16)));
    }
    let float = |at: usize| f32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes")) as f64;
    let entries = (0..dim * dim).map(|i| Complex64::new(float(16 + 8 * i), float(20 + 8 * i))).collect();
    let grid = OtfsGrid::new(m, n, delta_f, f_c)?;
    Ok(DdMatrix::from_entries(grid, entries)?)
}

pub fn write_dump_file(path: &Path, h: &DdMatrix) -> Result<()> {
    let file = std::fs::File::create(path).map_err(io_error(path))?;
    write_dump(std::io::BufWriter::new(file), h).map_err(io_error(path))
}
