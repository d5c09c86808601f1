//! Monte-Carlo estimation of OTFS outage probabilities over parameter sweeps.
//!
//! Three estimators are available:
//!
//! - `theoretical`: fraction of channel draws whose frame log-det capacity
//!   falls below `k = round(R_c M N)` bits, with a Wilson interval;
//! - `lower_avg` / `lower_wat`: mean over channel draws of the
//!   parallel-channel normal-approximation outage under average or
//!   water-filling power allocation, with a normal interval.
//!
//! Every trial owns its random stream. The stream is selected by a seed
//! derived from `(base_seed, estimator, L, R_c, Es/N0)` plus the trial index,
//! so results do not depend on thread count or scheduling. Per-trial values
//! are reduced in trial order.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use otfs_outage_core::{
    allocate, build_h_dd, frame_capacity_bits, frame_capacity_bits_banded, parallel_outage, sample_tapset,
    ChannelConfig, Error as CoreError, OtfsGrid, Strategy, TapSet, TotalPowerModel,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Largest tolerated fraction of failed trials for the theoretical estimator.
pub const MAX_FAILED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Theoretical,
    LowerAvg,
    LowerWat,
}

impl Estimator {
    pub const ALL: [Estimator; 3] = [Estimator::Theoretical, Estimator::LowerAvg, Estimator::LowerWat];

    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Theoretical => "theoretical",
            Estimator::LowerAvg => "lower_avg",
            Estimator::LowerWat => "lower_wat",
        }
    }

    fn tag(self) -> u64 {
        match self {
            Estimator::Theoretical => 1,
            Estimator::LowerAvg => 2,
            Estimator::LowerWat => 3,
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Estimator::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::Config(vec![format!("unknown estimator `{s}`")]))
    }
}

/// How the theoretical estimator evaluates `log2 det(I + g H^H H)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CapacityRoute {
    /// Exact log-det from the cyclically banded time-domain Gram matrix.
    #[default]
    Banded,
    /// Dense `H_DD` construction followed by a dense Cholesky factorization.
    Dense,
}

/// A full parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub grid: OtfsGrid,
    /// Channel template; `paths` is replaced by each entry of `path_counts`.
    pub channel: ChannelConfig,
    pub es_n0_grid_db: Vec<f64>,
    pub coding_rates: Vec<f64>,
    pub path_counts: Vec<usize>,
    /// Trials per point for the lower-bound estimators.
    pub trials: u64,
    /// Trials per point for the theoretical estimator; `None` uses `trials`.
    pub theoretical_trials: Option<u64>,
    pub base_seed: u64,
    pub estimators: BTreeSet<Estimator>,
    pub power_model: TotalPowerModel,
    /// Channel uses per codeword; `None` means one OTFS frame, `M N`.
    pub blocklength: Option<u64>,
    pub capacity_route: CapacityRoute,
}

impl SweepSpec {
    /// Reports every violated invariant, not just the first.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if let Err(e) = self.grid.validate() {
            problems.push(e.to_string());
        }
        if self.trials == 0 || self.theoretical_trials == Some(0) {
            problems.push("trials must be at least 1".into());
        }
        if self.es_n0_grid_db.is_empty() {
            problems.push("es_n0_db grid is empty".into());
        }
        if self.es_n0_grid_db.iter().any(|v| !v.is_finite()) {
            problems.push("es_n0_db grid contains non-finite values".into());
        }
        let mut sorted = self.es_n0_grid_db.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            problems.push("es_n0_db grid contains duplicates".into());
        }
        if self.coding_rates.is_empty() {
            problems.push("coding_rates is empty".into());
        }
        for &r in &self.coding_rates {
            if !(r > 0.0 && r < 1.0) {
                problems.push(format!("coding rate {r} outside (0, 1)"));
            }
        }
        if self.path_counts.is_empty() {
            problems.push("path_counts is empty".into());
        }
        for &paths in &self.path_counts {
            let cfg = ChannelConfig { paths, grid: self.grid, ..self.channel };
            if let Err(e) = cfg.validate() {
                problems.push(e.to_string());
            }
        }
        if self.estimators.is_empty() {
            problems.push("no estimator selected".into());
        }
        if self.blocklength == Some(0) {
            problems.push("blocklength must be at least 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn blocklength(&self) -> u64 {
        self.blocklength.unwrap_or(self.grid.blocklength() as u64)
    }

    fn trials_for(&self, estimator: Estimator) -> u64 {
        match estimator {
            Estimator::Theoretical => self.theoretical_trials.unwrap_or(self.trials),
            _ => self.trials,
        }
    }
}

/// One evaluation point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub channel: ChannelConfig,
    pub rate: f64,
    pub es_n0_db: f64,
    pub blocklength: u64,
    pub power_model: TotalPowerModel,
}

impl Point {
    pub fn es_n0_linear(&self) -> f64 {
        db_to_linear(self.es_n0_db)
    }

    /// Information bits per frame, `round(R_c M N)`.
    pub fn information_bits(&self) -> u64 {
        (self.rate * self.channel.grid.blocklength() as f64).round() as u64
    }
}

/// The single place where the dB sweep axis becomes a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Trials that produced a value.
    pub trials: u64,
    /// Trials that raised an error and were excluded.
    pub failed: u64,
}

impl Estimate {
    /// Sample mean of `values` in `[0, 1]` with a 95% normal interval, clamped to `[0, 1]`.
    pub fn normal(values: &[f64], failed: u64) -> Self {
        let count = values.len() as f64;
        // shifted by the first sample, so a constant sample has its exact value as mean
        let shift = values[0];
        let mean = shift + values.iter().map(|v| v - shift).sum::<f64>() / count;
        // deviations are rescaled so squares of tiny outage values do not underflow
        let scale = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        let sd = if values.len() > 1 && scale > 0.0 {
            scale * (values.iter().map(|v| ((v - mean) / scale).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        } else {
            0.0
        };
        let half = Z95 * sd / count.sqrt();
        Self {
            mean,
            ci_low: (mean - half).max(0.0).min(mean),
            ci_high: (mean + half).min(1.0).max(mean),
            trials: values.len() as u64,
            failed,
        }
    }

    /// Proportion `events / trials` with a 95% Wilson score interval.
    pub fn wilson(events: u64, trials: u64, failed: u64) -> Self {
        let n = trials as f64;
        let p = events as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Self {
            mean: p,
            ci_low: (centre - half).max(0.0).min(p),
            ci_high: (centre + half).min(1.0).max(p),
            trials,
            failed,
        }
    }

    /// No outage mass was observed, so the estimate only says `p < 1 / trials`.
    pub fn below_resolution(&self) -> bool {
        self.mean == 0.0
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Mixes one word into a running seed (SplitMix64 finalizer).
fn mix(state: u64, word: u64) -> u64 {
    let mut z = state ^ word.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed shared by all trials of one sweep point; trials select their own stream.
pub fn point_seed(base_seed: u64, estimator: Estimator, paths: usize, rate: f64, es_n0_db: f64) -> u64 {
    [estimator.tag(), paths as u64, rate.to_bits(), es_n0_db.to_bits()]
        .into_iter()
        .fold(mix(0, base_seed), mix)
}

/// Random source of trial `trial` at a point seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Draws the channel of trial `trial`.
pub fn trial_taps(channel: &ChannelConfig, seed: u64, trial: u64) -> otfs_outage_core::Result<TapSet> {
    sample_tapset(channel, &mut trial_rng(seed, trial))
}

fn strategy_of(estimator: Estimator) -> Option<Strategy> {
    match estimator {
        Estimator::LowerAvg => Some(Strategy::Average),
        Estimator::LowerWat => Some(Strategy::WaterFilling),
        Estimator::Theoretical => None,
    }
}

/// Conditional outage of one channel realization under a power allocation strategy.
pub fn lower_bound_trial(point: &Point, strategy: Strategy, taps: &TapSet) -> otfs_outage_core::Result<f64> {
    let budget = point.power_model.budget(point.es_n0_linear(), taps.len())?;
    let allocation = allocate(strategy, taps, &budget)?;
    parallel_outage(&allocation.snrs, point.blocklength, point.rate)
}

/// Outage indicator of one realization for the theoretical estimator.
pub fn theoretical_trial(point: &Point, route: CapacityRoute, taps: &TapSet) -> otfs_outage_core::Result<bool> {
    let grid = &point.channel.grid;
    let es_n0 = point.es_n0_linear();
    let bits = match route {
        CapacityRoute::Banded => frame_capacity_bits_banded(taps, grid, es_n0)?,
        CapacityRoute::Dense => frame_capacity_bits(&build_h_dd(taps, grid)?, es_n0)?,
    };
    Ok(bits < point.information_bits() as f64)
}

fn collect_trials<T, F>(trials: u64, eval: F) -> (Vec<T>, u64)
where
    T: Send,
    F: Fn(u64) -> otfs_outage_core::Result<T> + Sync,
{
    let outcomes: Vec<otfs_outage_core::Result<T>> =
        (0..trials as usize).into_par_iter().with_min_len(64).map(|t| eval(t as u64)).collect();
    let mut failed = 0;
    let values = outcomes
        .into_iter()
        .filter_map(|r| match r {
            Ok(v) => Some(v),
            Err(_) => {
                failed += 1;
                None
            }
        })
        .collect();
    (values, failed)
}

/// Lower-bound estimate at one point with channels drawn from `taps_for(trial)`.
pub fn estimate_lower_bound_with<F>(point: &Point, strategy: Strategy, trials: u64, taps_for: F) -> Result<Estimate>
where
    F: Fn(u64) -> otfs_outage_core::Result<TapSet> + Sync,
{
    if trials == 0 {
        return Err(Error::Config(vec!["trials must be at least 1".into()]));
    }
    let (values, failed) = collect_trials(trials, |t| lower_bound_trial(point, strategy, &taps_for(t)?));
    if values.is_empty() {
        return Err(Error::AllTrialsFailed { trials });
    }
    Ok(Estimate::normal(&values, failed))
}

/// Lower-bound estimate at one point with seeded random channels.
pub fn estimate_lower_bound(point: &Point, strategy: Strategy, trials: u64, seed: u64) -> Result<Estimate> {
    estimate_lower_bound_with(point, strategy, trials, |t| trial_taps(&point.channel, seed, t))
}

/// Theoretical outage estimate at one point with channels drawn from `taps_for(trial)`.
pub fn estimate_theoretical_with<F>(point: &Point, route: CapacityRoute, trials: u64, taps_for: F) -> Result<Estimate>
where
    F: Fn(u64) -> otfs_outage_core::Result<TapSet> + Sync,
{
    if trials == 0 {
        return Err(Error::Config(vec!["trials must be at least 1".into()]));
    }
    if point.information_bits() == 0 {
        return Err(CoreError::Domain { what: "information bits per frame", value: 0.0 }.into());
    }
    let (flags, failed) = collect_trials(trials, |t| theoretical_trial(point, route, &taps_for(t)?));
    if failed as f64 > MAX_FAILED_FRACTION * trials as f64 {
        return Err(Error::TooManyFailures { failed, trials });
    }
    let events = flags.iter().filter(|&&f| f).count() as u64;
    Ok(Estimate::wilson(events, flags.len() as u64, failed))
}

pub fn estimate_theoretical(point: &Point, route: CapacityRoute, trials: u64, seed: u64) -> Result<Estimate> {
    estimate_theoretical_with(point, route, trials, |t| trial_taps(&point.channel, seed, t))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub estimator: Estimator,
    pub paths: usize,
    pub rate: f64,
    pub es_n0_db: f64,
    pub estimate: Estimate,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failed_trials(&self) -> u64 {
        self.rows.iter().map(|r| r.estimate.failed).sum()
    }

    /// Rows of one curve, ordered by `Es/N0`.
    pub fn curve(&self, estimator: Estimator, paths: usize, rate: f64) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.estimator == estimator && r.paths == paths && r.rate == rate)
            .collect()
    }

    /// Distinct `(estimator, L, R_c)` triples in row order.
    pub fn series(&self) -> Vec<(Estimator, usize, f64)> {
        let mut out: Vec<(Estimator, usize, f64)> = Vec::new();
        for r in &self.rows {
            let key = (r.estimator, r.paths, r.rate);
            if !out.contains(&key) {
                out.push(key);
            }
        }
        out
    }
}

fn canonical_order(a: &SweepRow, b: &SweepRow) -> std::cmp::Ordering {
    a.estimator
        .cmp(&b.estimator)
        .then(a.paths.cmp(&b.paths))
        .then(a.rate.total_cmp(&b.rate))
        .then(a.es_n0_db.total_cmp(&b.es_n0_db))
}

/// Evaluates every requested estimator on the Cartesian product of the sweep
/// axes, using the current rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut es_grid = spec.es_n0_grid_db.clone();
    es_grid.sort_by(f64::total_cmp);
    let mut rates = spec.coding_rates.clone();
    rates.sort_by(f64::total_cmp);
    rates.dedup();
    let mut path_counts = spec.path_counts.clone();
    path_counts.sort_unstable();
    path_counts.dedup();

    let mut rows = Vec::new();
    for &estimator in &spec.estimators {
        for &paths in &path_counts {
            let channel = ChannelConfig { paths, grid: spec.grid, ..spec.channel };
            for &rate in &rates {
                for &es_n0_db in &es_grid {
                    let point = Point {
                        channel,
                        rate,
                        es_n0_db,
                        blocklength: spec.blocklength(),
                        power_model: spec.power_model,
                    };
                    let seed = point_seed(spec.base_seed, estimator, paths, rate, es_n0_db);
                    let trials = spec.trials_for(estimator);
                    let estimate = match strategy_of(estimator) {
                        Some(strategy) => estimate_lower_bound(&point, strategy, trials, seed)?,
                        None => estimate_theoretical(&point, spec.capacity_route, trials, seed)?,
                    };
                    rows.push(SweepRow { estimator, paths, rate, es_n0_db, estimate, seed });
                }
            }
        }
    }
    rows.sort_by(canonical_order);
    Ok(SweepResult { rows })
}

/// [`run_sweep`] on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    pool.install(|| run_sweep(spec))
}
