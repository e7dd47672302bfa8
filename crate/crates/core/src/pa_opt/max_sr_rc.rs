//! Sum-rate maximization under the rate ratio `R12 = mu R21`.
//!
//! Substituting the ratio leaves
//! `min{ (1+mu) R2ir, (1+mu) Rri1, Rmac }`. In `2^(2R)` form the first two
//! terms are the convex powers `(1 + gamma beta P)^(1+mu)`, replaced every
//! SCA round by their tangent at the incumbent.

use super::inner::ConcaveFn;
use super::sca::{sca_drive, Linearization};
use super::{check_power, epa, finish_sca, half_log2, Method, PAResult, SolverOptions, TaylorMode};
use crate::rate_model::{link_rate, mac_rate, LinkGains, PAFactors};
use crate::{Error, Result};

/// The ratio-constrained objective at `beta`, without any approximation.
pub fn rc_objective(g: &LinkGains, beta: &PAFactors, p: f64, mu: f64) -> f64 {
    let scale = 1.0 + mu;
    (scale * link_rate(g.gamma3, beta.beta2, p))
        .min(scale * link_rate(g.gamma4, beta.beta3, p))
        .min(mac_rate(g, beta, p))
}

#[derive(Debug, Clone, Copy)]
pub struct MaxSrRcProblem {
    pub g: LinkGains,
    pub p: f64,
    pub mu: f64,
    pub mode: TaylorMode,
}

impl MaxSrRcProblem {
    /// First-order expansion of `(1 + gamma beta P)^(1+mu)` around `beta_t`.
    pub fn tangent(&self, gamma: f64, beta: f64, beta_t: f64) -> f64 {
        let base = 1.0 + gamma * beta_t * self.p;
        let inner = match self.mode {
            TaylorMode::ChainRule => gamma * self.p,
            TaylorMode::PrintedForm => 1.0,
        };
        base.powf(1.0 + self.mu) + (1.0 + self.mu) * base.powf(self.mu) * inner * (beta - beta_t)
    }
}

impl Linearization for MaxSrRcProblem {
    fn subproblem(&self, at: &PAFactors) -> Vec<ConcaveFn<'_>> {
        let (b2t, b3t) = (at.beta2, at.beta3);
        let LinkGains {
            gamma1: g1,
            gamma3: g3,
            gamma4: g4,
            ..
        } = self.g;
        let p = self.p;
        vec![
            Box::new(move |_, b2| half_log2(self.tangent(g3, b2, b2t))),
            Box::new(move |b1, b2| half_log2(self.tangent(g4, 1.0 - b1 - b2, b3t))),
            Box::new(move |b1, b2| half_log2(1.0 + g1 * b1 * p + g3 * b2 * p)),
        ]
    }
}

pub fn max_sr_rc(g: &LinkGains, p: f64, mu: f64, opts: &SolverOptions) -> Result<PAResult> {
    check_power(p)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let problem = MaxSrRcProblem {
        g: *g,
        p,
        mu,
        mode: opts.taylor_mode,
    };
    finish_sca(Method::MaxSrRc, g, p, sca_drive(&problem, epa(), opts))
}
