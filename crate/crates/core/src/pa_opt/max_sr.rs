//! Relaxed sum-rate maximization.
//!
//! The four remaining branches of the expanded sum rate become constraints
//! on `2^(2R)`. The two mixed-hop products are bounded from below with
//! `beta1 beta2 <= (beta1^2 + beta2^2) / 2` (applied once, not iterated) and
//! the relay-only branch is linearized in `beta3` at every SCA round.

use super::inner::ConcaveFn;
use super::sca::{sca_drive, Linearization};
use super::{check_power, epa, finish_sca, half_log2, Method, PAResult, SolverOptions};
use crate::rate_model::{LinkGains, PAFactors};
use crate::Result;

#[derive(Debug, Clone, Copy)]
pub struct MaxSrProblem {
    pub g: LinkGains,
    pub p: f64,
}

impl MaxSrProblem {
    /// Lower bound of `(1 + g1 b1 P)(1 + g4 b3 P)` with `b3 = 1 - b1 - b2`.
    pub fn u1_branch(&self, b1: f64, b2: f64) -> f64 {
        let LinkGains {
            gamma1: g1,
            gamma4: g4,
            ..
        } = self.g;
        let p = self.p;
        1.0 + g4 * p + b1 * (g1 * p - g4 * p + g1 * g4 * p * p)
            - g4 * b2 * p
            - g1 * g4 * (3.0 * b1 * b1 + b2 * b2) * p * p / 2.0
    }

    /// Lower bound of `(1 + g3 b2 P)(1 + g2 b3 P)`.
    pub fn u2_branch(&self, b1: f64, b2: f64) -> f64 {
        let LinkGains {
            gamma2: g2,
            gamma3: g3,
            ..
        } = self.g;
        let p = self.p;
        1.0 + g2 * p + b2 * (g3 * p - g2 * p + g2 * g3 * p * p)
            - g2 * b1 * p
            - g2 * g3 * (b1 * b1 + 3.0 * b2 * b2) * p * p / 2.0
    }

    /// Tangent minorant of `1 + b3 P (g2 + g4) + g2 g4 b3^2 P^2` at `b3t`.
    pub fn relay_branch(&self, b3: f64, b3t: f64) -> f64 {
        let LinkGains {
            gamma2: g2,
            gamma4: g4,
            ..
        } = self.g;
        let p = self.p;
        1.0 + g2 * g4 * b3t * b3t * p * p
            + 2.0 * g2 * g4 * b3t * p * p * (b3 - b3t)
            + b3 * p * (g2 + g4)
    }

    pub fn mac_branch(&self, b1: f64, b2: f64) -> f64 {
        1.0 + self.g.gamma1 * b1 * self.p + self.g.gamma3 * b2 * self.p
    }
}

impl Linearization for MaxSrProblem {
    fn subproblem(&self, at: &PAFactors) -> Vec<ConcaveFn<'_>> {
        let b3t = at.beta3;
        vec![
            Box::new(move |b1, b2| half_log2(self.u1_branch(b1, b2))),
            Box::new(move |b1, b2| half_log2(self.u2_branch(b1, b2))),
            Box::new(move |b1, b2| half_log2(self.relay_branch(1.0 - b1 - b2, b3t))),
            Box::new(move |b1, b2| half_log2(self.mac_branch(b1, b2))),
        ]
    }
}

pub fn max_sr(g: &LinkGains, p: f64, opts: &SolverOptions) -> Result<PAResult> {
    check_power(p)?;
    let problem = MaxSrProblem { g: *g, p };
    finish_sca(Method::MaxSr, g, p, sca_drive(&problem, epa(), opts))
}
