//! CSV output of sweep results.
//!
//! Header `estimator,L,Rc,esn0_db,outage,trials,ci_low,ci_high,seed`, LF line
//! endings. Outage and interval bounds carry 8 significant digits; `Rc` and
//! `esn0_db` use the shortest representation that reads back exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{io_error, Error, Result};
use crate::sim::{Estimator, SweepResult};

pub const HEADER: &str = "estimator,L,Rc,esn0_db,outage,trials,ci_low,ci_high,seed";

/// One parsed CSV record.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub estimator: Estimator,
    pub paths: usize,
    pub rate: f64,
    pub es_n0_db: f64,
    pub outage: f64,
    pub trials: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// `%.8g`-style formatting.
pub fn sig8(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    // rounding can carry into the next decade, so take the exponent after rounding
    let sci = format!("{v:.7e}");
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let e: i32 = e.parse().expect("exponent");
    if (-5..8).contains(&e) {
        let decimals = (7 - e).max(0) as usize;
        trim(format!("{v:.decimals$}"))
    } else {
        format!("{}e{e}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn to_csv_string(result: &SweepResult) -> String {
    let mut out = String::with_capacity(64 * (result.rows.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in &result.rows {
        let e = &r.estimate;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.estimator,
            r.paths,
            r.rate,
            r.es_n0_db,
            sig8(e.mean),
            e.trials,
            sig8(e.ci_low),
            sig8(e.ci_high),
            r.seed
        )
        .expect("writing to a String");
    }
    out
}

pub fn write_csv(path: &Path, result: &SweepResult) -> Result<()> {
    std::fs::write(path, to_csv_string(result)).map_err(io_error(path))
}

pub fn parse_csv(text: &str, path: &Path) -> Result<Vec<CsvRow>> {
    let parse_err = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        _ => return Err(parse_err(1, format!("expected header `{HEADER}`"))),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let lineno = i + 1;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(parse_err(lineno, format!("expected 9 fields, found {}", f.len())));
        }
        let num = |idx: usize| f[idx].parse::<f64>().map_err(|e| parse_err(lineno, format!("field {}: {e}", idx + 1)));
        let int = |idx: usize| f[idx].parse::<u64>().map_err(|e| parse_err(lineno, format!("field {}: {e}", idx + 1)));
        rows.push(CsvRow {
            estimator: f[0].parse().map_err(|_| parse_err(lineno, format!("unknown estimator `{}`", f[0])))?,
            paths: int(1)? as usize,
            rate: num(2)?,
            es_n0_db: num(3)?,
            outage: num(4)?,
            trials: int(5)?,
            ci_low: num(6)?,
            ci_high: num(7)?,
            seed: int(8)?,
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_csv(&text, path)
}
