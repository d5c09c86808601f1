use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use otfs_outage::config::{self, Preset, RunConfig, Settings};
use otfs_outage::{csv, dump, plot, sim, tapset_text, Error};
use otfs_outage_core::{build_h_dd, ChannelConfig};

#[derive(Parser)]
#[command(name = "otfs-outage", version, about = "Outage probability of OTFS links at finite blocklength")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write CSV and gnuplot output.
    Run {
        /// TOML configuration; optional when --preset is given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_preset)]
        preset: Option<Preset>,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_plot: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Trials per point, for every estimator.
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, env = "OTFS_OUTAGE_THREADS")]
        threads: Option<usize>,
    },
    /// Draw one channel realization and write it as text and, optionally, as a binary H_DD dump.
    Sample {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_preset)]
        preset: Option<Preset>,
        /// Number of paths; defaults to the first entry of `paths`.
        #[arg(long)]
        paths: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long)]
        taps_out: Option<PathBuf>,
        #[arg(long)]
        hdd_out: Option<PathBuf>,
    },
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(config: Option<&PathBuf>, preset: Option<Preset>) -> Result<RunConfig, Error> {
    match config {
        Some(path) => config::parse_config(path, preset),
        None => RunConfig::resolve(preset, Settings::default()),
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Run { config, preset, out_csv, out_plot, seed, trials, threads } => {
            let mut cfg = load(config.as_ref(), preset)?;
            if let Some(seed) = seed {
                cfg.spec.base_seed = seed;
            }
            if let Some(trials) = trials {
                cfg.spec.trials = trials;
                cfg.spec.theoretical_trials = Some(trials);
            }
            cfg.spec.validate()?;
            let out_csv = out_csv.or(cfg.out_csv.clone()).unwrap_or_else(|| default_output(&cfg, "csv"));
            let out_plot = out_plot.or(cfg.out_plot.clone()).unwrap_or_else(|| out_csv.with_extension("gp"));
            let threads = threads.or(cfg.threads).unwrap_or_else(|| {
                std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
            });

            let started = Instant::now();
            let result = sim::run_sweep_with_threads(&cfg.spec, threads)?;
            csv::write_csv(&out_csv, &result)?;
            let title = cfg.preset.map_or_else(|| "outage".to_string(), |p| p.name().to_string());
            plot::write_gnuplot(&out_plot, &out_csv, &result, &title)?;

            let failed = result.failed_trials();
            if cfg.verbosity > 0 {
                eprintln!(
                    "{} rows in {:.1} s on {threads} threads; {failed} failed trials; wrote {} and {}",
                    result.rows.len(),
                    started.elapsed().as_secs_f64(),
                    out_csv.display(),
                    out_plot.display()
                );
            }
            Ok(failed == 0)
        }
        Command::Sample { config, preset, paths, seed, trial, taps_out, hdd_out } => {
            let cfg = load(config.as_ref(), preset)?;
            let paths = paths.unwrap_or(cfg.spec.path_counts[0]);
            let channel = ChannelConfig { paths, ..cfg.spec.channel };
            channel.validate()?;
            let taps = sim::trial_taps(&channel, seed, trial)?;
            match taps_out {
                Some(path) => tapset_text::write_taps(&path, &taps)?,
                None => print!("{}", tapset_text::to_text(&taps)),
            }
            if let Some(path) = hdd_out {
                dump::write_dump_file(&path, &build_h_dd(&taps, &channel.grid)?)?;
            }
            Ok(true)
        }
    }
}

fn default_output(cfg: &RunConfig, ext: &str) -> PathBuf {
    let stem = cfg.preset.map_or("outage", |p| p.name());
    PathBuf::from(format!("{stem}.{ext}"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
