//! Brute-force reference: evaluates an unrelaxed objective on every point
//! `(i/n, j/n)` of the open simplex and keeps the best one.

use super::max_sr_rc::rc_objective;
use super::{Method, PAResult};
use crate::rate_model::{sum_rate, LinkGains, PAFactors};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleObjective {
    TrueSumRate,
    RatioObjective { mu: f64 },
}

impl OracleObjective {
    pub fn evaluate(&self, g: &LinkGains, beta: &PAFactors, p: f64) -> f64 {
        match *self {
            OracleObjective::TrueSumRate => sum_rate(g, beta, p),
            OracleObjective::RatioObjective { mu } => rc_objective(g, beta, p, mu),
        }
    }
}

pub fn oracle_grid(g: &LinkGains, p: f64, obj: OracleObjective, n: usize) -> Result<PAResult> {
    if n < 10 {
        return Err(Error::InvalidConfig(format!(
            "oracle grid needs n >= 10, got {n}"
        )));
    }
    if let OracleObjective::RatioObjective { mu } = obj {
        if !(mu > 0.0) {
            return Err(Error::Domain(format!("mu must be positive, got {mu}")));
        }
    }
    let nf = n as f64;
    let mut best_val = f64::NEG_INFINITY;
    let mut best = (1, 1);
    for i in 1..n {
        for j in 1..n - i {
            let beta = PAFactors {
                beta1: i as f64 / nf,
                beta2: j as f64 / nf,
                beta3: (n - i - j) as f64 / nf,
            };
            let v = obj.evaluate(g, &beta, p);
            if v > best_val {
                best_val = v;
                best = (i, j);
            }
        }
    }
    let beta = PAFactors {
        beta1: best.0 as f64 / nf,
        beta2: best.1 as f64 / nf,
        beta3: (n - best.0 - best.1) as f64 / nf,
    };
    Ok(PAResult {
        method: Method::Oracle,
        beta,
        r_reported: best_val,
        r_true: sum_rate(g, &beta, p),
        iterations: 0,
        converged: true,
        trace: vec![best_val],
    })
}
