//! Paired Monte Carlo trials and parameter sweeps.
//!
//! One trial draws one channel realization, computes both slots' phases once
//! and hands the same link gains to every allocation scheme. Sweeps run
//! `trials` independent trials per axis value; each trial owns a random
//! stream derived from the master seed, so results do not depend on how the
//! trials are scheduled.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::irs_phase::PhaseStrategy;
use crate::pa_opt::{epa, solve, Method, PAResult, TaylorMode};
use crate::rate_model::{link_gains, sum_rate, LinkGains};
use crate::scenario::{generate_channels, RngStream, SystemConfig};
use crate::{Error, Result};

/// Stream ids of different axis values are this far apart under
/// [`StreamLayout::PerValue`].
pub const AXIS_STREAM_STRIDE: u64 = 1_000_000;

/// How trial streams are assigned across sweep values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StreamLayout {
    /// Trial `t` uses stream `t` at every value, so each value sees the same
    /// channel draws and standard normals (common random numbers).
    #[default]
    Common,
    /// Trial `t` at the `i`-th value uses stream `i * 10^6 + t`.
    PerValue,
}

impl StreamLayout {
    pub fn stream_id(&self, axis_index: usize, trial: usize) -> u64 {
        match self {
            StreamLayout::Common => trial as u64,
            StreamLayout::PerValue => axis_index as u64 * AXIS_STREAM_STRIDE + trial as u64,
        }
    }
}

impl FromStr for StreamLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "common" => Ok(StreamLayout::Common),
            "per-value" => Ok(StreamLayout::PerValue),
            other => Err(Error::InvalidConfig(format!(
                "unknown stream layout '{other}' (expected common or per-value)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    PowerDbm,
    SigmaDb,
    Mu,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::PowerDbm => "power_dbm",
            Axis::SigmaDb => "sigma_db",
            Axis::Mu => "mu",
        }
    }

    /// Copy of `cfg` with this axis set to `value`.
    pub fn apply(&self, cfg: &SystemConfig, value: f64) -> SystemConfig {
        let mut cfg = cfg.clone();
        match self {
            Axis::PowerDbm => cfg.p_dbm = value,
            Axis::SigmaDb => cfg.shadow_sigma_db = value,
            Axis::Mu => cfg.mu = value,
        }
        cfg
    }

    pub fn value_of(&self, cfg: &SystemConfig) -> f64 {
        match self {
            Axis::PowerDbm => cfg.p_dbm,
            Axis::SigmaDb => cfg.shadow_sigma_db,
            Axis::Mu => cfg.mu,
        }
    }

    pub fn default_values(&self) -> Vec<f64> {
        match self {
            Axis::PowerDbm => vec![0.0, 10.0, 20.0, 30.0, 40.0],
            Axis::SigmaDb => vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            Axis::Mu => vec![0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Axis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

/// What to run inside each trial.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub methods: Vec<Method>,
    pub phase: PhaseStrategy,
    pub taylor_mode: TaylorMode,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            methods: Method::SCHEMES.to_vec(),
            phase: PhaseStrategy::default(),
            taylor_mode: TaylorMode::ChainRule,
        }
    }
}

/// Identifies a trial in the output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialTag {
    pub trial: usize,
    pub seed: u64,
    pub axis: Axis,
    pub axis_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub method: Method,
    pub axis: Axis,
    pub axis_value: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub r_reported: f64,
    pub r_true: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl TrialRecord {
    fn new(tag: &TrialTag, res: &PAResult) -> Self {
        Self {
            trial: tag.trial,
            seed: tag.seed,
            method: res.method,
            axis: tag.axis,
            axis_value: tag.axis_value,
            beta1: res.beta.beta1,
            beta2: res.beta.beta2,
            beta3: res.beta.beta3,
            r_reported: res.r_reported,
            r_true: res.r_true,
            iterations: res.iterations,
            converged: res.converged,
        }
    }
}

/// Channel realization plus phases, reduced to the four link gains.
pub fn draw_gains(
    cfg: &SystemConfig,
    phase: &PhaseStrategy,
    rng: &mut RngStream,
) -> Result<LinkGains> {
    let ch = generate_channels(cfg, rng)?;
    let noise = cfg.noise_powers();
    let (theta1, theta2) = phase.phases(&ch, &noise, rng)?;
    link_gains(&ch, &theta1, &theta2, &noise)
}

/// Solves every requested scheme on the given gains. A failing scheme is
/// recorded as unconverged at equal allocation.
pub fn solve_all(cfg: &SystemConfig, settings: &RunSettings, g: &LinkGains) -> Vec<PAResult> {
    let p = cfg.total_power_watt();
    let opts = crate::pa_opt::SolverOptions {
        taylor_mode: settings.taylor_mode,
        ..cfg.solver_options()
    };
    settings
        .methods
        .iter()
        .map(|&method| {
            solve(method, g, p, cfg.mu, &opts).unwrap_or_else(|e| {
                warn!("{method} failed: {e}");
                let beta = epa();
                PAResult {
                    method,
                    beta,
                    r_reported: 0.0,
                    r_true: sum_rate(g, &beta, p),
                    iterations: 0,
                    converged: false,
                    trace: Vec::new(),
                }
            })
        })
        .collect()
}

pub fn run_trial(
    cfg: &SystemConfig,
    settings: &RunSettings,
    rng: &mut RngStream,
    tag: &TrialTag,
) -> Result<Vec<TrialRecord>> {
    let g = draw_gains(cfg, &settings.phase, rng)?;
    debug!("trial {} gains {:?}", tag.trial, g);
    Ok(solve_all(cfg, settings, &g)
        .iter()
        .map(|res| TrialRecord::new(tag, res))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub trials: usize,
    pub base: SystemConfig,
    pub settings: RunSettings,
    pub streams: StreamLayout,
}

impl SweepSpec {
    pub fn new(axis: Axis, base: SystemConfig) -> Self {
        Self {
            axis,
            values: axis.default_values(),
            trials: 500,
            base,
            settings: RunSettings::default(),
            streams: StreamLayout::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidConfig(
                "sweep needs at least one value".into(),
            ));
        }
        if self.values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig(format!(
                "sweep values must be strictly increasing: {:?}",
                self.values
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        if self.settings.methods.is_empty() {
            return Err(Error::InvalidConfig("no methods selected".into()));
        }
        for v in &self.values {
            self.axis.apply(&self.base, *v).validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub axis_value: f64,
    pub method: Method,
    pub mean_r_reported: f64,
    pub mean_r_true: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<AggregateRow>,
}

pub fn run_sweep(spec: &SweepSpec, master_seed: u64) -> Result<SweepOutput> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = (0..spec.values.len())
        .flat_map(|vi| (0..spec.trials).map(move |t| (vi, t)))
        .collect();
    let per_trial: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(vi, trial)| {
            let value = spec.values[vi];
            let cfg = spec.axis.apply(&spec.base, value);
            let mut rng = RngStream::new(master_seed, spec.streams.stream_id(vi, trial));
            let tag = TrialTag {
                trial,
                seed: master_seed,
                axis: spec.axis,
                axis_value: value,
            };
            run_trial(&cfg, &spec.settings, &mut rng, &tag)
        })
        .collect::<Result<_>>()?;
    let records: Vec<TrialRecord> = per_trial.into_iter().flatten().collect();
    let aggregates = aggregate(&records, &spec.values, &spec.settings.methods);
    Ok(SweepOutput {
        records,
        aggregates,
    })
}

/// Per-(value, method) means in sweep order.
pub fn aggregate(records: &[TrialRecord], values: &[f64], methods: &[Method]) -> Vec<AggregateRow> {
    let mut rows = Vec::with_capacity(values.len() * methods.len());
    for &value in values {
        for &method in methods {
            let (mut rep, mut tru, mut n) = (0.0, 0.0, 0usize);
            for r in records
                .iter()
                .filter(|r| r.axis_value == value && r.method == method)
            {
                rep += r.r_reported;
                tru += r.r_true;
                n += 1;
            }
            if n > 0 {
                rows.push(AggregateRow {
                    axis_value: value,
                    method,
                    mean_r_reported: rep / n as f64,
                    mean_r_true: tru / n as f64,
                    trials: n,
                });
            }
        }
    }
    rows
}

fn to_csv<T: Serialize>(rows: &[T], path_hint: &Path) -> Result<String> {
    let csv_err = |source| Error::Csv {
        path: path_hint.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io {
        path: path_hint.to_path_buf(),
        source: e.into_error(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub const RECORD_HEADER: &str =
    "trial,seed,method,axis,axis_value,beta1,beta2,beta3,r_reported,r_true,iterations,converged";
pub const AGGREGATE_HEADER: &str = "axis_value,method,mean_r_reported,mean_r_true,trials";

/// CSV text of trial records, header included even when empty.
pub fn records_csv(records: &[TrialRecord]) -> Result<String> {
    if records.is_empty() {
        return Ok(format!("{RECORD_HEADER}\n"));
    }
    to_csv(records, Path::new("<records>"))
}

pub fn aggregates_csv(rows: &[AggregateRow]) -> Result<String> {
    if rows.is_empty() {
        return Ok(format!("{AGGREGATE_HEADER}\n"));
    }
    to_csv(rows, Path::new("<aggregates>"))
}

/// `runs/power.csv` -> `runs/power_agg.csv`.
pub fn aggregate_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_agg.{}", ext.to_string_lossy()),
        None => format!("{stem}_agg"),
    };
    out.with_file_name(name)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl SweepOutput {
    /// Writes the records to `out` and the aggregates next to it.
    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        write_text(out, &records_csv(&self.records)?)?;
        let agg = aggregate_path(out);
        write_text(&agg, &aggregates_csv(&self.aggregates)?)?;
        Ok(agg)
    }
}
