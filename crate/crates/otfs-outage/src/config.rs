//! Run configuration: a strict TOML schema layered over built-in presets.
//!
//! ```toml
//! preset = "fig3"                 # optional; explicit keys override it
//! seed = 1
//! trials = 10000                  # lower-bound estimators
//! theoretical_trials = 1000
//! threads = 4
//! estimators = ["lower_avg", "lower_wat"]   # theoretical | lower_avg | lower_wat
//! es_n0_db = [0.0, 2.0, 4.0]      # or es_n0_db_range = { start = -8.0, stop = 12.0, step = 2.0 }
//! coding_rates = [0.8]
//! paths = [3, 5, 7]
//! total_power_model = "per_path"  # per_path (W = L Es/N0) | shared (W = Es/N0)
//! blocklength = 512               # default M N
//! capacity_route = "banded"       # banded | dense
//!
//! [grid]
//! m = 32
//! n = 16
//! delta_f_hz = 7500.0
//! carrier_hz = 4.0e9
//!
//! [channel]
//! l_max = 8
//! k_max = 4
//! mu = 0.0
//! fractional_doppler = true
//! delay_model = "zero_delay_first"  # zero_delay_first | uniform
//!
//! [output]
//! csv = "fig3.csv"
//! plot = "fig3.gp"
//! verbosity = 1
//! ```
//!
//! Unknown keys and type mismatches are errors; every problem is reported at once.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use otfs_outage_core::{ChannelConfig, DelayModel, OtfsGrid, TotalPowerModel};
use toml::{Table, Value};

use crate::error::{io_error, Error, Result};
use crate::sim::{CapacityRoute, Estimator, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::Fig6];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
        }
    }

    /// Settings of the preset; every field is populated.
    pub fn settings(self) -> Settings {
        let (paths, rates, estimators): (Vec<usize>, Vec<f64>, Vec<Estimator>) = match self {
            Preset::Fig3 => (vec![3, 5, 7], vec![0.8], vec![Estimator::LowerAvg, Estimator::LowerWat]),
            Preset::Fig4 => (vec![5], vec![0.4, 0.6, 0.8], vec![Estimator::LowerAvg, Estimator::LowerWat]),
            Preset::Fig5 => (vec![3], vec![0.8], vec![Estimator::Theoretical, Estimator::LowerAvg]),
            Preset::Fig6 => (vec![5], vec![0.8], vec![Estimator::Theoretical, Estimator::LowerAvg]),
        };
        Settings {
            m: Some(32),
            n: Some(16),
            delta_f_hz: Some(7.5e3),
            carrier_hz: Some(4e9),
            l_max: Some(8),
            k_max: Some(4),
            mu: Some(0.0),
            fractional_doppler: Some(true),
            delay_model: Some(DelayModel::ZeroDelayFirst),
            es_n0_db: Some(default_es_n0_grid()),
            coding_rates: Some(rates),
            paths: Some(paths),
            trials: Some(100_000),
            theoretical_trials: Some(10_000),
            seed: Some(1),
            estimators: Some(estimators),
            total_power_model: Some(TotalPowerModel::PerPath),
            blocklength: None,
            capacity_route: Some(CapacityRoute::Banded),
            threads: None,
            csv: None,
            plot: None,
            verbosity: None,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(vec![format!("unknown preset `{s}` (expected fig3, fig4, fig5 or fig6)")]))
    }
}

/// Preset sweep axis: -8 dB to 12 dB in 2 dB steps.
pub fn default_es_n0_grid() -> Vec<f64> {
    (0..=10).map(|i| -8.0 + 2.0 * i as f64).collect()
}

/// Partially specified settings; presets and config files both produce one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub delta_f_hz: Option<f64>,
    pub carrier_hz: Option<f64>,
    pub l_max: Option<usize>,
    pub k_max: Option<usize>,
    pub mu: Option<f64>,
    pub fractional_doppler: Option<bool>,
    pub delay_model: Option<DelayModel>,
    pub es_n0_db: Option<Vec<f64>>,
    pub coding_rates: Option<Vec<f64>>,
    pub paths: Option<Vec<usize>>,
    pub trials: Option<u64>,
    pub theoretical_trials: Option<u64>,
    pub seed: Option<u64>,
    pub estimators: Option<Vec<Estimator>>,
    pub total_power_model: Option<TotalPowerModel>,
    pub blocklength: Option<u64>,
    pub capacity_route: Option<CapacityRoute>,
    pub threads: Option<usize>,
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub verbosity: Option<u8>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),*) => {
        Settings { $($field: $top.$field.or($base.$field)),* }
    };
}

impl Settings {
    /// Fields set in `self` win over `base`.
    pub fn over(self, base: Settings) -> Settings {
        let top = self;
        overlay!(
            base, top, m, n, delta_f_hz, carrier_hz, l_max, k_max, mu, fractional_doppler, delay_model, es_n0_db,
            coding_rates, paths, trials, theoretical_trials, seed, estimators, total_power_model, blocklength,
            capacity_route, threads, csv, plot, verbosity
        )
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub spec: SweepSpec,
    pub threads: Option<usize>,
    pub out_csv: Option<PathBuf>,
    pub out_plot: Option<PathBuf>,
    pub verbosity: u8,
}

impl RunConfig {
    /// Resolves `settings` on top of `preset`, checking required keys and sweep invariants.
    pub fn resolve(preset: Option<Preset>, settings: Settings) -> Result<Self> {
        let s = match preset {
            Some(p) => settings.over(p.settings()),
            None => settings,
        };
        let mut problems = Vec::new();
        macro_rules! required {
            ($field:ident, $key:literal) => {
                match s.$field.clone() {
                    Some(v) => Some(v),
                    None => {
                        problems.push(format!("missing required key `{}`", $key));
                        None
                    }
                }
            };
        }
        let m = required!(m, "grid.m");
        let n = required!(n, "grid.n");
        let delta_f = required!(delta_f_hz, "grid.delta_f_hz");
        let f_c = required!(carrier_hz, "grid.carrier_hz");
        let l_max = required!(l_max, "channel.l_max");
        let k_max = required!(k_max, "channel.k_max");
        let es_n0 = required!(es_n0_db, "es_n0_db");
        let rates = required!(coding_rates, "coding_rates");
        let paths = required!(paths, "paths");
        let trials = required!(trials, "trials");
        let estimators = required!(estimators, "estimators");
        if s.threads == Some(0) {
            problems.push("`threads` must be at least 1".into());
        }
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        let (m, n, delta_f, f_c, l_max, k_max) =
            (m.unwrap(), n.unwrap(), delta_f.unwrap(), f_c.unwrap(), l_max.unwrap(), k_max.unwrap());

        let grid = OtfsGrid { m, n, delta_f, f_c };
        let channel = ChannelConfig {
            paths: 1,
            l_max,
            k_max,
            mu: s.mu.unwrap_or(0.0),
            grid,
            fractional_doppler: s.fractional_doppler.unwrap_or(true),
            delay_model: s.delay_model.unwrap_or_default(),
        };
        let spec = SweepSpec {
            grid,
            channel,
            es_n0_grid_db: es_n0.unwrap(),
            coding_rates: rates.unwrap(),
            path_counts: paths.unwrap(),
            trials: trials.unwrap(),
            theoretical_trials: s.theoretical_trials,
            base_seed: s.seed.unwrap_or(0),
            estimators: estimators.unwrap().into_iter().collect::<BTreeSet<_>>(),
            power_model: s.total_power_model.unwrap_or_default(),
            blocklength: s.blocklength,
            capacity_route: s.capacity_route.unwrap_or_default(),
        };
        spec.validate()?;
        Ok(Self {
            preset,
            spec,
            threads: s.threads,
            out_csv: s.csv,
            out_plot: s.plot,
            verbosity: s.verbosity.unwrap_or(1),
        })
    }
}

/// Parses config text into settings plus the `preset` key, if any.
pub fn parse_settings(text: &str) -> Result<(Option<Preset>, Settings)> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
    let mut reader = Reader::default();
    let mut s = Settings::default();

    let preset = reader.string(&table, "", "preset").and_then(|v| match v.parse::<Preset>() {
        Ok(p) => Some(p),
        Err(_) => {
            reader.problem("preset", format!("unknown preset `{v}`"));
            None
        }
    });
    s.seed = reader.uint(&table, "", "seed");
    s.trials = reader.uint(&table, "", "trials");
    s.theoretical_trials = reader.uint(&table, "", "theoretical_trials");
    s.threads = reader.uint(&table, "", "threads").map(|v| v as usize);
    s.blocklength = reader.uint(&table, "", "blocklength");
    s.coding_rates = reader.float_list(&table, "", "coding_rates");
    s.paths = reader.uint_list(&table, "", "paths").map(|v| v.into_iter().map(|x| x as usize).collect());
    s.estimators = reader.parsed_list(&table, "", "estimators", |v| v.parse::<Estimator>().ok());
    s.total_power_model = reader.keyword(&table, "", "total_power_model", |v| match v {
        "per_path" => Some(TotalPowerModel::PerPath),
        "shared" => Some(TotalPowerModel::Shared),
        _ => None,
    });
    s.capacity_route = reader.keyword(&table, "", "capacity_route", |v| match v {
        "banded" => Some(CapacityRoute::Banded),
        "dense" => Some(CapacityRoute::Dense),
        _ => None,
    });
    let list = reader.float_list(&table, "", "es_n0_db");
    let range = reader.table(&table, "", "es_n0_db_range").and_then(|t| {
        let start = reader.float(t, "es_n0_db_range.", "start");
        let stop = reader.float(t, "es_n0_db_range.", "stop");
        let step = reader.float(t, "es_n0_db_range.", "step");
        reader.reject_unknown(t, "es_n0_db_range.", &["start", "stop", "step"]);
        match (start, stop, step) {
            (Some(a), Some(b), Some(h)) if h > 0.0 && b >= a => {
                let count = ((b - a) / h + 1e-9).floor() as usize;
                Some((0..=count).map(|i| a + h * i as f64).collect::<Vec<_>>())
            }
            (Some(_), Some(_), Some(_)) => {
                reader.problem("es_n0_db_range", "needs step > 0 and stop >= start".into());
                None
            }
            _ => {
                reader.problem("es_n0_db_range", "needs start, stop and step".into());
                None
            }
        }
    });
    s.es_n0_db = match (list, range) {
        (Some(_), Some(_)) => {
            reader.problem("es_n0_db", "give either `es_n0_db` or `es_n0_db_range`, not both".into());
            None
        }
        (a, b) => a.or(b),
    };

    if let Some(t) = reader.table(&table, "", "grid") {
        s.m = reader.uint(t, "grid.", "m").map(|v| v as usize);
        s.n = reader.uint(t, "grid.", "n").map(|v| v as usize);
        s.delta_f_hz = reader.float(t, "grid.", "delta_f_hz");
        s.carrier_hz = reader.float(t, "grid.", "carrier_hz");
        reader.reject_unknown(t, "grid.", &["m", "n", "delta_f_hz", "carrier_hz"]);
    }
    if let Some(t) = reader.table(&table, "", "channel") {
        s.l_max = reader.uint(t, "channel.", "l_max").map(|v| v as usize);
        s.k_max = reader.uint(t, "channel.", "k_max").map(|v| v as usize);
        s.mu = reader.float(t, "channel.", "mu");
        s.fractional_doppler = reader.boolean(t, "channel.", "fractional_doppler");
        s.delay_model = reader.keyword(t, "channel.", "delay_model", |v| match v {
            "zero_delay_first" => Some(DelayModel::ZeroDelayFirst),
            "uniform" => Some(DelayModel::Uniform),
            _ => None,
        });
        reader.reject_unknown(t, "channel.", &["l_max", "k_max", "mu", "fractional_doppler", "delay_model"]);
    }
    if let Some(t) = reader.table(&table, "", "output") {
        s.csv = reader.string(t, "output.", "csv").map(PathBuf::from);
        s.plot = reader.string(t, "output.", "plot").map(PathBuf::from);
        s.verbosity = reader.uint(t, "output.", "verbosity").map(|v| v.min(u8::MAX as u64) as u8);
        reader.reject_unknown(t, "output.", &["csv", "plot", "verbosity"]);
    }
    reader.reject_unknown(
        &table,
        "",
        &[
            "preset",
            "seed",
            "trials",
            "theoretical_trials",
            "threads",
            "blocklength",
            "coding_rates",
            "paths",
            "estimators",
            "total_power_model",
            "capacity_route",
            "es_n0_db",
            "es_n0_db_range",
            "grid",
            "channel",
            "output",
        ],
    );
    reader.finish()?;
    Ok((preset, s))
}

/// Reads and resolves a config file. `cli_preset` wins over a `preset` key in the file.
pub fn parse_config(path: &Path, cli_preset: Option<Preset>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    parse_config_str(&text, cli_preset)
}

pub fn parse_config_str(text: &str, cli_preset: Option<Preset>) -> Result<RunConfig> {
    let (file_preset, settings) = parse_settings(text)?;
    RunConfig::resolve(cli_preset.or(file_preset), settings)
}

#[derive(Default)]
struct Reader {
    problems: Vec<String>,
}

impl Reader {
    fn problem(&mut self, key: &str, message: String) {
        self.problems.push(format!("`{key}`: {message}"));
    }

    fn finish(self) -> Result<()> {
        if self.problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(self.problems))
        }
    }

    fn reject_unknown(&mut self, t: &Table, prefix: &str, known: &[&str]) {
        for key in t.keys() {
            if !known.contains(&key.as_str()) {
                self.problem(&format!("{prefix}{key}"), "unknown key".into());
            }
        }
    }

    fn typed<'a, T>(&mut self, t: &'a Table, prefix: &str, key: &str, want: &str, f: impl FnOnce(&'a Value) -> Option<T>) -> Option<T> {
        let v = t.get(key)?;
        let out = f(v);
        if out.is_none() {
            self.problem(&format!("{prefix}{key}"), format!("expected {want}, found {}", v.type_str()));
        }
        out
    }

    fn table<'a>(&mut self, t: &'a Table, prefix: &str, key: &str) -> Option<&'a Table> {
        self.typed(t, prefix, key, "a table", Value::as_table)
    }

    fn string(&mut self, t: &Table, prefix: &str, key: &str) -> Option<String> {
        self.typed(t, prefix, key, "a string", |v| v.as_str().map(str::to_owned))
    }

    fn boolean(&mut self, t: &Table, prefix: &str, key: &str) -> Option<bool> {
        self.typed(t, prefix, key, "a boolean", Value::as_bool)
    }

    fn uint(&mut self, t: &Table, prefix: &str, key: &str) -> Option<u64> {
        self.typed(t, prefix, key, "a non-negative integer", |v| v.as_integer().and_then(|i| u64::try_from(i).ok()))
    }

    fn float(&mut self, t: &Table, prefix: &str, key: &str) -> Option<f64> {
        self.typed(t, prefix, key, "a number", as_number)
    }

    fn float_list(&mut self, t: &Table, prefix: &str, key: &str) -> Option<Vec<f64>> {
        self.typed(t, prefix, key, "an array of numbers", |v| {
            v.as_array()?.iter().map(as_number).collect::<Option<Vec<_>>>()
        })
    }

    fn uint_list(&mut self, t: &Table, prefix: &str, key: &str) -> Option<Vec<u64>> {
        self.typed(t, prefix, key, "an array of non-negative integers", |v| {
            v.as_array()?
                .iter()
                .map(|x| x.as_integer().and_then(|i| u64::try_from(i).ok()))
                .collect::<Option<Vec<_>>>()
        })
    }

    fn keyword<T>(&mut self, t: &Table, prefix: &str, key: &str, parse: impl Fn(&str) -> Option<T>) -> Option<T> {
        let raw = self.string(t, prefix, key)?;
        let out = parse(&raw);
        if out.is_none() {
            self.problem(&format!("{prefix}{key}"), format!("unrecognised value `{raw}`"));
        }
        out
    }

    fn parsed_list<T>(&mut self, t: &Table, prefix: &str, key: &str, parse: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
        let items = self.typed(t, prefix, key, "an array of strings", |v| {
            v.as_array()?.iter().map(|x| x.as_str().map(str::to_owned)).collect::<Option<Vec<_>>>()
        })?;
        let mut out = Vec::with_capacity(items.len());
        for raw in items {
            match parse(&raw) {
                Some(v) => out.push(v),
                None => self.problem(&format!("{prefix}{key}"), format!("unrecognised value `{raw}`")),
            }
        }
        Some(out)
    }
}

fn as_number(v: &Value) -> Option<f64> {
    v.as_float().or_else(|| v.as_integer().map(|i| i as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problems(err: Error) -> Vec<String> {
        match err {
            Error::Config(p) => p,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn fig3_preset_contents() {
        let cfg = parse_config_str("preset = \"fig3\"", None).unwrap();
        assert_eq!(cfg.spec.path_counts, vec![3, 5, 7]);
        assert_eq!(cfg.spec.coding_rates, vec![0.8]);
        assert_eq!(
            cfg.spec.estimators.iter().copied().collect::<Vec<_>>(),
            vec![Estimator::LowerAvg, Estimator::LowerWat]
        );
        assert_eq!((cfg.spec.grid.m, cfg.spec.grid.n), (32, 16));
    }

    #[test]
    fn empty_config_lists_required_keys() {
        let p = problems(parse_config_str("", None).unwrap_err());
        for key in ["grid.m", "grid.n", "channel.l_max", "es_n0_db", "coding_rates", "paths", "trials", "estimators"] {
            assert!(p.iter().any(|m| m.contains(key)), "missing {key} in {p:?}");
        }
    }

    #[test]
    fn explicit_keys_override_preset() {
        let cfg = parse_config_str("coding_rates = [0.4]", Some(Preset::Fig4)).unwrap();
        assert_eq!(cfg.spec.coding_rates, vec![0.4]);
        assert_eq!(cfg.spec.path_counts, vec![5]);
    }

    #[test]
    fn cli_preset_wins_over_file_preset() {
        let cfg = parse_config_str("preset = \"fig3\"", Some(Preset::Fig6)).unwrap();
        assert_eq!(cfg.preset, Some(Preset::Fig6));
    }

    #[test]
    fn all_violations_are_reported() {
        let text = r#"
            preset = "fig3"
            trails = 5
            coding_rates = "fast"
            [grid]
            m = -3
            colour = "blue"
        "#;
        let p = problems(parse_config_str(text, None).unwrap_err());
        assert!(p.iter().any(|m| m.contains("`trails`") && m.contains("unknown")));
        assert!(p.iter().any(|m| m.contains("`coding_rates`") && m.contains("array")));
        assert!(p.iter().any(|m| m.contains("`grid.m`")));
        assert!(p.iter().any(|m| m.contains("`grid.colour`")));
    }

    #[test]
    fn sweep_invariants_are_checked() {
        let p = problems(parse_config_str("coding_rates = [1.2]\npaths = [12]", Some(Preset::Fig3)).unwrap_err());
        assert!(p.iter().any(|m| m.contains("1.2")));
        assert!(p.iter().any(|m| m.contains("L=12")));
    }

    #[test]
    fn range_syntax() {
        let cfg =
            parse_config_str("es_n0_db_range = { start = 0.0, stop = 20.0, step = 2.0 }", Some(Preset::Fig3)).unwrap();
        assert_eq!(cfg.spec.es_n0_grid_db.len(), 11);
        assert_eq!(cfg.spec.es_n0_grid_db[10], 20.0);
    }

    #[test]
    fn full_config_without_preset() {
        let text = r#"
            seed = 9
            trials = 100
            estimators = ["theoretical"]
            es_n0_db = [0, 5]
            coding_rates = [0.5]
            paths = [2]
            total_power_model = "shared"
            capacity_route = "dense"
            [grid]
            m = 4
            n = 4
            delta_f_hz = 15000
            carrier_hz = 2.0e9
            [channel]
            l_max = 3
            k_max = 2
            delay_model = "uniform"
            fractional_doppler = false
            [output]
            csv = "x.csv"
        "#;
        let cfg = parse_config_str(text, None).unwrap();
        assert_eq!(cfg.spec.base_seed, 9);
        assert_eq!(cfg.spec.power_model, TotalPowerModel::Shared);
        assert_eq!(cfg.spec.capacity_route, CapacityRoute::Dense);
        assert_eq!(cfg.spec.channel.delay_model, DelayModel::Uniform);
        assert!(!cfg.spec.channel.fractional_doppler);
        assert_eq!(cfg.out_csv, Some(PathBuf::from("x.csv")));
        assert_eq!(cfg.spec.es_n0_grid_db, vec![0.0, 5.0]);
    }
}
