//! Preset golden file and output formats.

use std::fmt::Write as _;
use std::path::Path;

use otfs_outage::config::{parse_config_str, Preset, RunConfig};
use otfs_outage::csv::{parse_csv, to_csv_string};
use otfs_outage::plot::gnuplot_script;
use otfs_outage::sim::{run_sweep, Estimator, SweepSpec};

fn describe(cfg: &RunConfig) -> String {
    let s = &cfg.spec;
    let c = &s.channel;
    let mut out = String::new();
    let _ = writeln!(out, "{}", cfg.preset.unwrap());
    let _ = writeln!(out, "  grid M={} N={} delta_f={} f_c={}", s.grid.m, s.grid.n, s.grid.delta_f, s.grid.f_c);
    let _ = writeln!(
        out,
        "  channel l_max={} k_max={} mu={} fractional={} delay={:?}",
        c.l_max, c.k_max, c.mu, c.fractional_doppler, c.delay_model
    );
    let _ = writeln!(out, "  paths {:?}", s.path_counts);
    let _ = writeln!(out, "  rates {:?}", s.coding_rates);
    let names: Vec<&str> = s.estimators.iter().map(|e| e.as_str()).collect();
    let _ = writeln!(out, "  estimators {}", names.join(","));
    let _ = writeln!(out, "  es_n0_db {:?}", s.es_n0_grid_db);
    let _ = writeln!(out, "  trials {} theoretical {} seed {}", s.trials, s.theoretical_trials.unwrap(), s.base_seed);
    let _ = writeln!(out, "  power {:?} blocklength {} route {:?}", s.power_model, s.blocklength(), s.capacity_route);
    out
}

#[test]
fn presets_match_golden_file() {
    let got: String =
        Preset::ALL.iter().map(|&p| describe(&parse_config_str("", Some(p)).unwrap())).collect();
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/presets.txt")).unwrap();
    assert_eq!(got, golden);
}

fn tiny_spec() -> SweepSpec {
    let text = r#"
        trials = 50
        theoretical_trials = 20
        estimators = ["theoretical", "lower_avg"]
        es_n0_db = [-3.0, 0.5, 7.0]
        coding_rates = [0.6]
        paths = [2]
        [grid]
        m = 4
        n = 4
        delta_f_hz = 15000.0
        carrier_hz = 2.0e9
        [channel]
        l_max = 3
        k_max = 1
    "#;
    parse_config_str(text, None).unwrap().spec
}

#[test]
fn csv_is_deterministic_and_round_trips() {
    let result = run_sweep(&tiny_spec()).unwrap();
    let a = to_csv_string(&result);
    assert_eq!(a, to_csv_string(&run_sweep(&tiny_spec()).unwrap()));
    assert_eq!(a.lines().count(), 1 + result.rows.len());
    assert!(a.ends_with('\n') && !a.contains('\r'));
    let parsed = parse_csv(&a, Path::new("mem")).unwrap();
    for (row, back) in result.rows.iter().zip(&parsed) {
        assert_eq!(back.estimator, row.estimator);
        assert_eq!((back.paths, back.rate, back.es_n0_db, back.seed), (row.paths, row.rate, row.es_n0_db, row.seed));
        assert_eq!(back.trials, row.estimate.trials);
        for (x, y) in [(back.outage, row.estimate.mean), (back.ci_low, row.estimate.ci_low), (back.ci_high, row.estimate.ci_high)] {
            assert!((x - y).abs() <= 5e-8 * y.abs());
        }
    }
}

#[test]
fn three_rows_make_a_four_line_file() {
    let mut spec = tiny_spec();
    spec.estimators = [Estimator::LowerAvg].into_iter().collect();
    assert_eq!(to_csv_string(&run_sweep(&spec).unwrap()).lines().count(), 4);
}

#[test]
fn fig3_script_has_six_series_and_single_row_has_one() {
    let mut spec = parse_config_str("trials = 10\nes_n0_db = [0.0, 4.0]", Some(Preset::Fig3)).unwrap().spec;
    let result = run_sweep(&spec).unwrap();
    let script = gnuplot_script(&result, "fig3.csv", "fig3");
    assert_eq!(script.matches("with linespoints").count(), 6);
    for row in &result.rows {
        let label = format!("title '{} L={} Rc={}'", row.estimator, row.paths, row.rate);
        assert!(script.contains(&label), "{label}");
    }
    spec.es_n0_grid_db = vec![0.0];
    spec.path_counts = vec![3];
    spec.estimators = [Estimator::LowerWat].into_iter().collect();
    let single = run_sweep(&spec).unwrap();
    assert_eq!(single.rows.len(), 1);
    assert_eq!(gnuplot_script(&single, "x.csv", "t").matches("with linespoints").count(), 1);
}
