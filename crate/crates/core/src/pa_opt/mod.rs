//! Power allocation between the two users and the relay.
//!
//! Every scheme reduces to maximizing the minimum of a few concave functions
//! of `(beta1, beta2)` over the margin simplex (`beta3 = 1 - beta1 - beta2`).
//! [`inner`] solves that two-variable problem, [`sca`] wraps it in successive
//! convex approximation for the schemes whose constraints are linearized, and
//! [`oracle`] brute-forces the unrelaxed objectives on a grid.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::rate_model::{sum_rate, LinkGains, PAFactors};
use crate::{Error, Result};

pub mod inner;
pub mod oracle;
pub mod sca;

mod max_min_sr;
mod max_sr;
mod max_sr_rc;

pub use inner::{inner_maximin, inner_maximin_from, ConcaveFn, MaxMin};
pub use max_min_sr::max_min_sr;
pub use max_sr::{max_sr, MaxSrProblem};
pub use max_sr_rc::{max_sr_rc, rc_objective, MaxSrRcProblem};
pub use oracle::{oracle_grid, OracleObjective};
pub use sca::{sca_drive, Linearization, ScaOutcome};

/// Algorithm behind [`inner_maximin`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerMethod {
    /// Golden-section search on `beta1` over the partial maximum in `beta2`,
    /// each bracketed by a coarse scan.
    NestedSection,
    /// Coarse triangle grid followed by 4x local refinement rounds.
    GridRefine,
}

/// First-order expansion used for the `(1 + gamma beta P)^(1+mu)` terms of
/// the rate-constrained scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaylorMode {
    /// Exact tangent, slope `(1+mu)(1+gamma beta_t P)^mu gamma P`.
    ChainRule,
    /// Slope `(1+mu)(1+gamma beta_t P)^mu`, without the inner derivative.
    /// Not a valid minorant; kept for comparison runs only.
    PrintedForm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Stop SCA once the objective moves by less than this (bits/s/Hz).
    pub sca_tol: f64,
    pub sca_max_iter: usize,
    /// Resolution in `beta` at which the inner search stops.
    pub inner_tol: f64,
    /// Coarse scan points per axis.
    pub inner_grid_init: usize,
    /// Refinement rounds of the grid method.
    pub inner_refine_rounds: usize,
    /// Every factor is kept at or above this margin.
    pub box_margin: f64,
    pub inner_method: InnerMethod,
    pub taylor_mode: TaylorMode,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            sca_tol: 1e-6,
            sca_max_iter: 100,
            inner_tol: 1e-10,
            inner_grid_init: 64,
            inner_refine_rounds: 8,
            box_margin: 1e-6,
            inner_method: InnerMethod::NestedSection,
            taylor_mode: TaylorMode::ChainRule,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.sca_tol, self.inner_tol, self.box_margin]
            .iter()
            .all(|v| *v > 0.0 && v.is_finite());
        if !positive
            || self.sca_max_iter == 0
            || self.inner_grid_init < 2
            || self.inner_refine_rounds == 0
        {
            return Err(Error::InvalidConfig(format!(
                "solver options must be positive (grid >= 2): {self:?}"
            )));
        }
        if self.box_margin >= 1.0 / 3.0 {
            return Err(Error::InvalidConfig(format!(
                "box_margin must be below 1/3 (got {})",
                self.box_margin
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Epa,
    MaxSr,
    MaxMinSr,
    MaxSrRc,
    Oracle,
}

impl Method {
    /// The four allocation schemes compared by the harness.
    pub const SCHEMES: [Method; 4] = [
        Method::Epa,
        Method::MaxSr,
        Method::MaxMinSr,
        Method::MaxSrRc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Epa => "epa",
            Method::MaxSr => "max-sr",
            Method::MaxMinSr => "max-min-sr",
            Method::MaxSrRc => "max-sr-rc",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epa" => Ok(Method::Epa),
            "max-sr" => Ok(Method::MaxSr),
            "max-min-sr" => Ok(Method::MaxMinSr),
            "max-sr-rc" => Ok(Method::MaxSrRc),
            other => Err(Error::InvalidConfig(format!("unknown method '{other}'"))),
        }
    }
}

/// Outcome of one allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct PAResult {
    pub method: Method,
    pub beta: PAFactors,
    /// The optimizer's own objective at `beta`.
    pub r_reported: f64,
    /// Sum rate at `beta`.
    pub r_true: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each SCA round (a single entry for one-shot methods).
    pub trace: Vec<f64>,
}

pub fn epa() -> PAFactors {
    PAFactors::equal()
}

pub fn epa_result(g: &LinkGains, p: f64) -> PAResult {
    let beta = epa();
    let r = sum_rate(g, &beta, p);
    PAResult {
        method: Method::Epa,
        beta,
        r_reported: r,
        r_true: r,
        iterations: 0,
        converged: true,
        trace: vec![r],
    }
}

/// Runs one scheme. `mu` is only read by [`Method::MaxSrRc`].
pub fn solve(
    method: Method,
    g: &LinkGains,
    p: f64,
    mu: f64,
    opts: &SolverOptions,
) -> Result<PAResult> {
    match method {
        Method::Epa => Ok(epa_result(g, p)),
        Method::MaxSr => max_sr(g, p, opts),
        Method::MaxMinSr => max_min_sr(g, p, opts),
        Method::MaxSrRc => max_sr_rc(g, p, mu, opts),
        Method::Oracle => oracle_grid(g, p, OracleObjective::TrueSumRate, 2000),
    }
}

/// `1/2 log2(t)` for a constraint right-hand side, `-inf` where `t <= 0`.
#[inline]
pub(crate) fn half_log2(t: f64) -> f64 {
    if t > 0.0 {
        0.5 * t.log2()
    } else {
        f64::NEG_INFINITY
    }
}

pub(crate) fn check_power(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "total power must be positive, got {p} W"
        )))
    }
}

/// Wraps an SCA run into a result, falling back to equal allocation when the
/// first subproblem has no feasible point.
pub(crate) fn finish_sca(
    method: Method,
    g: &LinkGains,
    p: f64,
    outcome: Result<ScaOutcome>,
) -> Result<PAResult> {
    match outcome {
        Ok(o) => Ok(PAResult {
            method,
            beta: o.beta,
            r_reported: o.objective.max(0.0),
            r_true: sum_rate(g, &o.beta, p),
            iterations: o.iterations,
            converged: o.converged,
            trace: o.trace,
        }),
        Err(Error::Infeasible) => {
            let beta = epa();
            Ok(PAResult {
                method,
                beta,
                r_reported: 0.0,
                r_true: sum_rate(g, &beta, p),
                iterations: 0,
                converged: false,
                trace: Vec::new(),
            })
        }
        Err(e) => Err(e),
    }
}
