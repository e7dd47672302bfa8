//! Exact sum-rate maximization through the two per-direction rates.
//!
//! With `R1 <= min(R1ir, Rri2)`, `R2 <= min(R2ir, Rri1)`, `R <= R1 + R2` and
//! `R <= Rmac`, the epigraph is exact, so the problem is maximizing
//! `min{ min(R1ir, Rri2) + min(R2ir, Rri1), Rmac }` directly. That function
//! is concave in the factors and a single inner solve finds its optimum.

use super::inner::ConcaveFn;
use super::sca::{sca_drive, Linearization};
use super::{check_power, epa, finish_sca, Method, PAResult, SolverOptions};
use crate::rate_model::{half_log2_1p, LinkGains, PAFactors};
use crate::Result;

struct MaxMinSrProblem {
    g: LinkGains,
    p: f64,
}

impl Linearization for MaxMinSrProblem {
    fn subproblem(&self, _at: &PAFactors) -> Vec<ConcaveFn<'_>> {
        let LinkGains {
            gamma1: g1,
            gamma2: g2,
            gamma3: g3,
            gamma4: g4,
        } = self.g;
        let p = self.p;
        vec![
            Box::new(move |b1, b2| {
                let b3 = 1.0 - b1 - b2;
                let r1 = half_log2_1p((g1 * b1 * p).min(g2 * b3 * p));
                let r2 = half_log2_1p((g3 * b2 * p).min(g4 * b3 * p));
                r1 + r2
            }),
            Box::new(move |b1, b2| half_log2_1p(g1 * b1 * p + g3 * b2 * p)),
        ]
    }

    fn is_static(&self) -> bool {
        true
    }
}

pub fn max_min_sr(g: &LinkGains, p: f64, opts: &SolverOptions) -> Result<PAResult> {
    check_power(p)?;
    let problem = MaxMinSrProblem { g: *g, p };
    finish_sca(Method::MaxMinSr, g, p, sca_drive(&problem, epa(), opts))
}
