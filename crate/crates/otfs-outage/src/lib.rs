//! Outage simulation for OTFS links with finite blocklength: Monte-Carlo
//! sweeps, run configuration, and CSV, gnuplot and tap-set file formats.
//!
//! The numerical kernels live in [`otfs_outage_core`].

pub mod config;
pub mod csv;
pub mod dump;
pub mod error;
pub mod plot;
pub mod sim;
pub mod tapset_text;

pub use config::{parse_config, parse_config_str, Preset, RunConfig, Settings};
pub use error::{Error, Result};
pub use sim::{
    estimate_lower_bound, estimate_theoretical, point_seed, run_sweep, run_sweep_with_threads, trial_taps,
    CapacityRoute, Estimate, Estimator, Point, SweepResult, SweepRow, SweepSpec,
};
