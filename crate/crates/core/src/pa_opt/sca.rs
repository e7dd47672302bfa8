//! Successive convex approximation over the power-allocation simplex.
//!
//! Each round rebuilds the concave subproblem with its first-order terms
//! anchored at the incumbent and re-solves it. The minorants are tight at
//! the anchor, so the incumbent stays feasible with the same value and the
//! objective sequence never decreases.

use super::inner::{inner_maximin_from, ConcaveFn};
use super::SolverOptions;
use crate::rate_model::PAFactors;
use crate::Result;

pub trait Linearization {
    /// Concave functions whose minimum is the subproblem objective when the
    /// linearized terms are expanded at `at`.
    fn subproblem(&self, at: &PAFactors) -> Vec<ConcaveFn<'_>>;

    /// True when [`Self::subproblem`] does not depend on its anchor, so a
    /// single solve is already exact.
    fn is_static(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    pub beta: PAFactors,
    pub objective: f64,
    /// Subproblem optimum of every round.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

pub fn sca_drive<L: Linearization + ?Sized>(
    problem: &L,
    init: PAFactors,
    opts: &SolverOptions,
) -> Result<ScaOutcome> {
    let mut anchor = init;
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    for _ in 0..opts.sca_max_iter {
        let funcs = problem.subproblem(&anchor);
        let sol = inner_maximin_from(&funcs, opts, Some(anchor))?;
        anchor = sol.beta;
        let prev = trace.last().copied();
        trace.push(sol.value);
        if problem.is_static() {
            converged = true;
            break;
        }
        if let Some(prev) = prev {
            if (sol.value - prev).abs() < opts.sca_tol {
                converged = true;
                break;
            }
        }
    }
    Ok(ScaOutcome {
        beta: anchor,
        objective: *trace.last().expect("sca_max_iter >= 1"),
        iterations: trace.len(),
        trace,
        converged,
    })
}
