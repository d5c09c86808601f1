//! Gnuplot script for a sweep CSV.
//!
//! One series per `(estimator, L, R_c)`, log-scale outage axis. Rows are
//! selected by exact string match on the CSV fields, so series labels are the
//! CSV values themselves.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{io_error, Result};
use crate::sim::SweepResult;

/// Label of one series, built from the CSV field texts.
pub fn series_label(estimator: &str, paths: usize, rate: f64) -> String {
    format!("{estimator} L={paths} Rc={rate}")
}

/// Script plotting `csv_path`, which is referenced exactly as given.
pub fn gnuplot_script(result: &SweepResult, csv_path: &str, title: &str) -> String {
    let mut s = String::new();
    let q = quote(csv_path);
    s.push_str("set datafile separator ','\n");
    s.push_str("set termoption noenhanced\n");
    let _ = writeln!(s, "set title {}", quote(title));
    s.push_str("set xlabel 'Es/N0 (dB)'\n");
    s.push_str("set ylabel 'outage probability'\n");
    s.push_str("set logscale y\n");
    s.push_str("set format y '10^{%L}'\n");
    s.push_str("set grid\n");
    s.push_str("set key bottom left\n");
    let series = result.series();
    if series.is_empty() {
        return s;
    }
    s.push_str("plot \\\n");
    for (i, (estimator, paths, rate)) in series.iter().enumerate() {
        let sep = if i + 1 == series.len() { "\n" } else { ", \\\n" };
        let _ = write!(
            s,
            "  {q} skip 1 using 4:((strcol(1) eq '{e}' && strcol(2) eq '{paths}' && strcol(3) eq '{rate}') ? $5 : NaN) \
             with linespoints title {label}{sep}",
            e = estimator.as_str(),
            label = quote(&series_label(estimator.as_str(), *paths, *rate)),
        );
    }
    s
}

fn quote(text: &str) -> String {
    format!("'{}'", text.replace('\'', "''"))
}

/// Writes a script next to the CSV, referencing it by a path relative to the script.
pub fn write_gnuplot(plot_path: &Path, csv_path: &Path, result: &SweepResult, title: &str) -> Result<()> {
    let relative = relative_to(csv_path, plot_path.parent().unwrap_or(Path::new("")));
    std::fs::write(plot_path, gnuplot_script(result, &relative, title)).map_err(io_error(plot_path))
}

fn relative_to(target: &Path, base: &Path) -> String {
    let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
    let (target, base) = (abs(target), abs(base));
    let t: Vec<_> = target.components().collect();
    let b: Vec<_> = base.components().collect();
    let common = t.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let mut rel = std::path::PathBuf::new();
    for _ in common..b.len() {
        rel.push("..");
    }
    for c in &t[common..] {
        rel.push(c);
    }
    rel.to_string_lossy().replace('\\', "/")
}
