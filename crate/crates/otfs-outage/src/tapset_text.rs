//! Plain-text tap sets: one path per line, `re(h) im(h) delay doppler`,
//! where `doppler` is the total Doppler index `k + kappa`. Blank lines and
//! lines starting with `#` are ignored. Values are written in their shortest
//! exact form, so a write/read cycle is lossless.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use otfs_outage_core::TapSet;

use crate::error::{io_error, Error, Result};

pub fn to_text(taps: &TapSet) -> String {
    let mut out = String::from("# re(h) im(h) delay doppler\n");
    for ((h, l), v) in taps.gains().iter().zip(taps.delays()).zip(taps.dopplers()) {
        let _ = writeln!(out, "{:e} {:e} {l} {v:e}", h.re, h.im);
    }
    out
}

pub fn parse_text(text: &str, path: &Path) -> Result<TapSet> {
    let err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let (mut gains, mut delays, mut dopplers) = (Vec::new(), Vec::new(), Vec::new());
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(err(i + 1, format!("expected 4 fields, found {}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| err(i + 1, format!("`{s}`: {e}")));
        gains.push(Complex64::new(num(f[0])?, num(f[1])?));
        delays.push(f[2].parse::<usize>().map_err(|e| err(i + 1, format!("`{}`: {e}", f[2])))?);
        dopplers.push(num(f[3])?);
    }
    Ok(TapSet::new(gains, delays, dopplers)?)
}

pub fn write_taps(path: &Path, taps: &TapSet) -> Result<()> {
    std::fs::write(path, to_text(taps)).map_err(io_error(path))
}

pub fn read_taps(path: &Path) -> Result<TapSet> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_text(&text, path)
}
