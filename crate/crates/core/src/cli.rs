//! `irs-relay` command line.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use log::info;
use rayon::prelude::*;

use crate::harness::{
    draw_gains, records_csv, run_sweep, run_trial, write_text, Axis, RunSettings, SweepSpec,
    TrialRecord, TrialTag,
};
use crate::irs_phase::PhaseStrategy;
use crate::pa_opt::{
    max_min_sr, max_sr, max_sr_rc, oracle_grid, Method, OracleObjective, TaylorMode,
};
use crate::scenario::{RngStream, SystemConfig};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "irs-relay",
    version,
    about = "Power allocation for an IRS-aided two-way DF relay network"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run trials of a single scenario and print one record per method.
    Run(CommonArgs),
    /// Sweep the total power (dBm).
    SweepPower(SweepArgs),
    /// Sweep the shadowing standard deviation (dB).
    SweepSigma(SweepArgs),
    /// Sweep the rate ratio mu.
    SweepMu(SweepArgs),
    /// Compare the optimizers against the brute-force grid on random instances.
    OracleCheck(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Scenario file (flat TOML); defaults to the built-in scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of trials (per sweep value).
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output CSV; sweeps also write `<stem>_agg.<ext>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of epa, max-sr, max-min-sr, max-sr-rc, or `all`.
    #[arg(long)]
    method: Option<String>,
    /// identity, random or greedy.
    #[arg(long, default_value = "greedy")]
    phase_strategy: String,
    #[arg(long, default_value_t = 3)]
    phase_passes: usize,
    #[arg(long, default_value_t = 64)]
    phase_grid: usize,
    /// Oracle grid resolution.
    #[arg(long, default_value_t = 2000)]
    grid: usize,
    /// Linearize without the inner derivative gamma*P.
    #[arg(long)]
    strict_paper_taylor: bool,
    /// Override the scenario's total power (dBm).
    #[arg(long, allow_negative_numbers = true)]
    p_dbm: Option<f64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated axis values; defaults depend on the sweep.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    values: Option<Vec<f64>>,
    /// `common` reuses each trial's draws at every value; `per-value` gives
    /// every value its own streams.
    #[arg(long, default_value = "common")]
    stream_layout: String,
}

fn parse_methods(spec: Option<&str>, default: &[Method]) -> Result<Vec<Method>> {
    match spec {
        None => Ok(default.to_vec()),
        Some("all") => Ok(Method::SCHEMES.to_vec()),
        Some(list) => {
            let mut methods: Vec<Method> = list
                .split(',')
                .map(|s| s.trim().parse())
                .collect::<Result<_>>()?;
            methods.sort();
            methods.dedup();
            Ok(methods)
        }
    }
}

impl CommonArgs {
    fn config(&self) -> Result<SystemConfig> {
        let mut cfg = match &self.config {
            Some(path) => SystemConfig::from_file(path)?,
            None => SystemConfig::default(),
        };
        if let Some(p) = self.p_dbm {
            cfg.p_dbm = p;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn phase(&self) -> Result<PhaseStrategy> {
        match self.phase_strategy.parse()? {
            PhaseStrategy::Greedy { .. } => {
                if self.phase_passes == 0 || self.phase_grid < 2 {
                    return Err(Error::InvalidConfig(
                        "--phase-passes must be >= 1 and --phase-grid >= 2".into(),
                    ));
                }
                Ok(PhaseStrategy::Greedy {
                    passes: self.phase_passes,
                    grid_points: self.phase_grid,
                })
            }
            other => Ok(other),
        }
    }

    fn settings(&self, default_methods: &[Method]) -> Result<RunSettings> {
        Ok(RunSettings {
            methods: parse_methods(self.method.as_deref(), default_methods)?,
            phase: self.phase()?,
            taylor_mode: if self.strict_paper_taylor {
                TaylorMode::PrintedForm
            } else {
                TaylorMode::ChainRule
            },
        })
    }
}

fn io_err(source: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    }
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_text(p, text),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

fn cmd_run(args: &CommonArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = args.config()?;
    let settings = args.settings(&Method::SCHEMES)?;
    let trials = args.trials.unwrap_or(1);
    if trials == 0 {
        return Err(Error::InvalidConfig("--trials must be >= 1".into()));
    }
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let tag = TrialTag {
                trial,
                seed: args.seed,
                axis: Axis::PowerDbm,
                axis_value: cfg.p_dbm,
            };
            run_trial(
                &cfg,
                &settings,
                &mut RngStream::new(args.seed, trial as u64),
                &tag,
            )
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    emit(out, args.out.as_ref(), &records_csv(&records)?)
}

fn cmd_sweep(axis: Axis, args: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let common = &args.common;
    let base = common.config()?;
    let default_methods: &[Method] = match axis {
        Axis::Mu => &[Method::MaxSrRc],
        _ => &Method::SCHEMES,
    };
    let spec = SweepSpec {
        axis,
        values: args.values.clone().unwrap_or_else(|| axis.default_values()),
        trials: common.trials.unwrap_or(500),
        base,
        settings: common.settings(default_methods)?,
        streams: args.stream_layout.parse()?,
    };
    info!(
        "sweeping {axis} over {:?} with {} trials per value",
        spec.values, spec.trials
    );
    let result = run_sweep(&spec, common.seed)?;
    let agg = crate::harness::aggregates_csv(&result.aggregates)?;
    if let Some(path) = &common.out {
        let agg_path = result.write(path)?;
        info!("wrote {} and {}", path.display(), agg_path.display());
    }
    out.write_all(agg.as_bytes()).map_err(io_err)
}

struct OracleRow {
    max_min_gap: f64,
    rc_gap: f64,
    max_sr_true_gap: f64,
    max_sr_overstated: bool,
    max_sr_above_max_min: bool,
}

fn cmd_oracle_check(args: &CommonArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = args.config()?;
    let phase = args.phase()?;
    let trials = args.trials.unwrap_or(100);
    let mut opts = cfg.solver_options();
    if args.strict_paper_taylor {
        opts.taylor_mode = TaylorMode::PrintedForm;
    }
    let p = cfg.total_power_watt();
    let rows: Vec<OracleRow> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<OracleRow> {
            let g = draw_gains(&cfg, &phase, &mut RngStream::new(args.seed, t as u64))?;
            let truth = oracle_grid(&g, p, OracleObjective::TrueSumRate, args.grid)?;
            let ratio = oracle_grid(
                &g,
                p,
                OracleObjective::RatioObjective { mu: cfg.mu },
                args.grid,
            )?;
            let mm = max_min_sr(&g, p, &opts)?;
            let sr = max_sr(&g, p, &opts)?;
            let rc = max_sr_rc(&g, p, cfg.mu, &opts)?;
            Ok(OracleRow {
                max_min_gap: (mm.r_reported - truth.r_reported).abs(),
                rc_gap: (rc.r_reported - ratio.r_reported).abs(),
                max_sr_true_gap: truth.r_reported - sr.r_true,
                max_sr_overstated: sr.r_reported > sr.r_true + 1e-6,
                max_sr_above_max_min: sr.r_reported > mm.r_reported + 1e-6,
            })
        })
        .collect::<Result<_>>()?;
    let max = |f: fn(&OracleRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let count = |f: fn(&OracleRow) -> bool| rows.iter().filter(|r| f(r)).count();
    let report = format!(
        "instances {trials}, grid {grid}, P {p_dbm} dBm, mu {mu}\n\
         max-min-sr  max |reported - oracle(sum rate)|   {:.3e}\n\
         max-sr-rc   max |reported - oracle(ratio)|      {:.3e}\n\
         max-sr      max (oracle(sum rate) - true rate)  {:.3e}\n\
         max-sr      reported > true + 1e-6              {}\n\
         max-sr      reported > max-min-sr + 1e-6        {}\n",
        max(|r| r.max_min_gap),
        max(|r| r.rc_gap),
        max(|r| r.max_sr_true_gap),
        count(|r| r.max_sr_overstated),
        count(|r| r.max_sr_above_max_min),
        grid = args.grid,
        p_dbm = cfg.p_dbm,
        mu = cfg.mu,
    );
    emit(out, args.out.as_ref(), &report)
}

/// Runs the CLI against `argv` (program name first), writing results to `out`.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::SweepPower(a) => cmd_sweep(Axis::PowerDbm, a, out),
        Command::SweepSigma(a) => cmd_sweep(Axis::SigmaDb, a, out),
        Command::SweepMu(a) => cmd_sweep(Axis::Mu, a, out),
        Command::OracleCheck(a) => cmd_oracle_check(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                EXIT_CONFIG
            } else if matches!(e, Error::Io { .. } | Error::Csv { .. }) {
                EXIT_IO
            } else {
                1
            }
        }
    }
}

/// Entry point used by the binary.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_cli(argv, &mut lock)
}
