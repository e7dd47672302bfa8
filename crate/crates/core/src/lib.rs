//! Power allocation for an IRS-aided two-way decode-and-forward relay network.
//!
//! Two single-antenna users exchange data through a multi-antenna DF relay
//! station over two time slots, helped by a passive reflecting surface. The
//! crate covers the whole chain from geometry to sum rate:
//!
//! - [`scenario`]: configuration, path loss with log-normal shadowing and
//!   seeded Rayleigh channel generation.
//! - [`irs_phase`]: reflection-coefficient strategies for both slots.
//! - [`rate_model`]: effective link gains and achievable rates.
//! - [`pa_opt`]: equal allocation, the three power-allocation optimizers,
//!   the concave max-min engine they share and a brute-force grid oracle.
//! - [`harness`]: paired Monte Carlo trials, parameter sweeps and CSV output.
//! - [`cli`]: the `irs-relay` command line.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod harness;
pub mod irs_phase;
pub mod pa_opt;
pub mod rate_model;
pub mod scenario;

pub use error::{Error, Result};
