//! Reflection coefficients of the surface for both time slots.
//!
//! Three strategies are available: all-zero phases, i.i.d. uniform phases and
//! a greedy per-element grid ascent on a slot surrogate. The first slot
//! maximizes `gamma1 + gamma3` and the second slot `gamma2 + gamma4`, since
//! each slot's phases only enter those two gains.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::rate_model::{norm_sqr, NoisePowers};
use crate::scenario::{ChannelSet, RngStream};
use crate::{Error, Result};

const UNIT_MODULUS_TOL: f64 = 1e-12;

/// Unit-modulus reflection coefficients, one per element.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(Vec<Complex64>);

impl PhaseVector {
    pub fn new(theta: Vec<Complex64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidConfig("phase vector needs N >= 1".into()));
        }
        if let Some(z) = theta
            .iter()
            .find(|z| !((z.norm() - 1.0).abs() <= UNIT_MODULUS_TOL))
        {
            return Err(Error::Domain(format!(
                "reflection coefficient {z} is not unit modulus"
            )));
        }
        Ok(Self(theta))
    }

    pub fn from_phases(phases: &[f64]) -> Result<Self> {
        Self::new(
            phases
                .iter()
                .map(|p| Complex64::from_polar(1.0, *p))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn conj(&self) -> Self {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }
}

pub fn identity_phase(n: usize) -> Result<PhaseVector> {
    PhaseVector::new(vec![Complex64::new(1.0, 0.0); n])
}

/// Phases drawn i.i.d. uniform on (0, 2 pi].
pub fn random_phase(n: usize, rng: &mut RngStream) -> Result<PhaseVector> {
    let phases: Vec<f64> = (0..n).map(|_| TAU * (1.0 - rng.random::<f64>())).collect();
    PhaseVector::from_phases(&phases)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    First,
    Second,
}

/// Surrogate maximized by the greedy strategy for one slot.
pub fn slot_objective(
    ch: &ChannelSet,
    slot: Slot,
    noise: &NoisePowers,
    theta: &PhaseVector,
) -> Result<f64> {
    use crate::rate_model::{combined_channel, combined_channel_reverse};
    Ok(match slot {
        Slot::First => {
            let a = combined_channel(&ch.h_1r, &ch.h_ir, theta, &ch.h_1i)?;
            let b = combined_channel(&ch.h_2r, &ch.h_ir, theta, &ch.h_2i)?;
            (norm_sqr(&a) + norm_sqr(&b)) / noise.relay
        }
        Slot::Second => {
            let to_u2 = combined_channel_reverse(&ch.h_2r, &ch.h_ir, theta, &ch.h_2i)?;
            let to_u1 = combined_channel_reverse(&ch.h_1r, &ch.h_ir, theta, &ch.h_1i)?;
            norm_sqr(&to_u2) / noise.user2 + norm_sqr(&to_u1) / noise.user1
        }
    })
}

/// Running composite channel of one user, updated element by element.
struct Composite {
    weight: f64,
    sum: Vec<Complex64>,
    /// Per-element contribution before the phase is applied, `taps[n][m]`.
    taps: Vec<Vec<Complex64>>,
}

impl Composite {
    fn new(
        ch: &ChannelSet,
        slot: Slot,
        direct: &[Complex64],
        h_ui: &[Complex64],
        weight: f64,
        theta: &[Complex64],
    ) -> Self {
        let (m, n) = (ch.m(), ch.n());
        let taps: Vec<Vec<Complex64>> = (0..n)
            .map(|k| {
                (0..m)
                    .map(|r| {
                        let t = ch.h_ir.get(r, k) * h_ui[k];
                        match slot {
                            Slot::First => t,
                            Slot::Second => t.conj(),
                        }
                    })
                    .collect()
            })
            .collect();
        let mut sum: Vec<Complex64> = direct
            .iter()
            .map(|d| match slot {
                Slot::First => *d,
                Slot::Second => d.conj(),
            })
            .collect();
        for (k, tap) in taps.iter().enumerate() {
            for (s, t) in sum.iter_mut().zip(tap) {
                *s += t * theta[k];
            }
        }
        Self { weight, sum, taps }
    }

    /// Weighted energy if element `k` switched from `old` to `new`.
    fn energy_with(&self, k: usize, old: Complex64, new: Complex64) -> f64 {
        let delta = new - old;
        self.weight
            * self
                .sum
                .iter()
                .zip(&self.taps[k])
                .map(|(s, t)| (s + t * delta).norm_sqr())
                .sum::<f64>()
    }

    fn apply(&mut self, k: usize, old: Complex64, new: Complex64) {
        let delta = new - old;
        for (s, t) in self.sum.iter_mut().zip(&self.taps[k]) {
            *s += t * delta;
        }
    }
}

/// Greedy coordinate ascent, returning the objective after every element
/// update as well (the first entry is the starting objective).
pub fn greedy_phase_traced(
    ch: &ChannelSet,
    slot: Slot,
    noise: &NoisePowers,
    passes: usize,
    grid_points: usize,
) -> Result<(PhaseVector, Vec<f64>)> {
    if passes == 0 || grid_points < 2 {
        return Err(Error::InvalidConfig(format!(
            "greedy phase search needs passes >= 1 and grid >= 2 (got {passes}, {grid_points})"
        )));
    }
    let n = ch.n();
    let mut theta = vec![Complex64::new(1.0, 0.0); n];
    // First slot: both users' uplinks land at the relay. Second slot: the
    // user-1 composite feeds gamma4 (noise at U1), the user-2 one gamma2.
    let (w_1, w_2) = match slot {
        Slot::First => (1.0 / noise.relay, 1.0 / noise.relay),
        Slot::Second => (1.0 / noise.user1, 1.0 / noise.user2),
    };
    let mut users = [
        Composite::new(ch, slot, &ch.h_1r, &ch.h_1i, w_1, &theta),
        Composite::new(ch, slot, &ch.h_2r, &ch.h_2i, w_2, &theta),
    ];
    // Candidate phases 2 pi k / G for k = 1..=G, so zero phase (k = G) is
    // always on the grid.
    let candidates: Vec<Complex64> = (1..=grid_points)
        .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / grid_points as f64))
        .collect();

    let total =
        |users: &[Composite; 2]| -> f64 { users.iter().map(|u| u.weight * norm_sqr(&u.sum)).sum() };
    let mut trace = vec![total(&users)];
    for _ in 0..passes {
        for k in 0..n {
            let old = theta[k];
            let mut best = old;
            let mut best_val: f64 = users.iter().map(|u| u.energy_with(k, old, old)).sum();
            for &c in &candidates {
                let v: f64 = users.iter().map(|u| u.energy_with(k, old, c)).sum();
                if v > best_val {
                    best_val = v;
                    best = c;
                }
            }
            if best != old {
                for u in users.iter_mut() {
                    u.apply(k, old, best);
                }
                theta[k] = best;
            }
            trace.push(total(&users));
        }
    }
    Ok((PhaseVector::new(theta)?, trace))
}

pub fn greedy_phase(
    ch: &ChannelSet,
    slot: Slot,
    noise: &NoisePowers,
    passes: usize,
    grid_points: usize,
) -> Result<PhaseVector> {
    greedy_phase_traced(ch, slot, noise, passes, grid_points).map(|(theta, _)| theta)
}

/// How both slots' phases are chosen for a channel realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseStrategy {
    Identity,
    Random,
    Greedy { passes: usize, grid_points: usize },
}

impl Default for PhaseStrategy {
    fn default() -> Self {
        PhaseStrategy::Greedy {
            passes: 3,
            grid_points: 64,
        }
    }
}

impl PhaseStrategy {
    /// Returns `(theta1, theta2)`. Only the random strategy consumes draws.
    pub fn phases(
        &self,
        ch: &ChannelSet,
        noise: &NoisePowers,
        rng: &mut RngStream,
    ) -> Result<(PhaseVector, PhaseVector)> {
        let n = ch.n();
        match *self {
            PhaseStrategy::Identity => Ok((identity_phase(n)?, identity_phase(n)?)),
            PhaseStrategy::Random => Ok((random_phase(n, rng)?, random_phase(n, rng)?)),
            PhaseStrategy::Greedy {
                passes,
                grid_points,
            } => Ok((
                greedy_phase(ch, Slot::First, noise, passes, grid_points)?,
                greedy_phase(ch, Slot::Second, noise, passes, grid_points)?,
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PhaseStrategy::Identity => "identity",
            PhaseStrategy::Random => "random",
            PhaseStrategy::Greedy { .. } => "greedy",
        }
    }
}

impl fmt::Display for PhaseStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PhaseStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(PhaseStrategy::Identity),
            "random" => Ok(PhaseStrategy::Random),
            "greedy" => Ok(PhaseStrategy::default()),
            other => Err(Error::InvalidConfig(format!(
                "unknown phase strategy '{other}'"
            ))),
        }
    }
}
