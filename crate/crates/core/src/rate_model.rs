//! Effective link gains and achievable rates of the two-slot DF exchange.
//!
//! All rates are in bits/s/Hz and already include the 1/2 factor for the two
//! time slots.

use std::f64::consts::LN_2;

use num_complex::Complex64;

use crate::irs_phase::PhaseVector;
use crate::scenario::{CMatrix, ChannelSet};
use crate::{Error, Result};

/// Receiver noise powers in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePowers {
    pub relay: f64,
    pub user1: f64,
    pub user2: f64,
}

impl NoisePowers {
    pub fn uniform(watt: f64) -> Self {
        Self {
            relay: watt,
            user1: watt,
            user2: watt,
        }
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("relay", self.relay),
            ("user1", self.user1),
            ("user2", self.user2),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "{name} noise power must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// SNR per watt of transmit power on each of the four hops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    /// U1 -> RS, first slot.
    pub gamma1: f64,
    /// RS -> U2, second slot.
    pub gamma2: f64,
    /// U2 -> RS, first slot.
    pub gamma3: f64,
    /// RS -> U1, second slot.
    pub gamma4: f64,
}

impl LinkGains {
    pub fn new(gamma1: f64, gamma2: f64, gamma3: f64, gamma4: f64) -> Result<Self> {
        let g = Self {
            gamma1,
            gamma2,
            gamma3,
            gamma4,
        };
        if g.as_array().iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Domain(format!(
                "link gains must be finite and >= 0: {g:?}"
            )));
        }
        Ok(g)
    }

    pub fn uniform(gamma: f64) -> Self {
        Self {
            gamma1: gamma,
            gamma2: gamma,
            gamma3: gamma,
            gamma4: gamma,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.gamma1, self.gamma2, self.gamma3, self.gamma4]
    }
}

/// Power-allocation factors of U1, U2 and the relay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PAFactors {
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
}

impl PAFactors {
    pub const SUM_TOL: f64 = 1e-9;

    pub fn new(beta1: f64, beta2: f64, beta3: f64) -> Result<Self> {
        let b = Self {
            beta1,
            beta2,
            beta3,
        };
        let inside = [beta1, beta2, beta3].iter().all(|v| *v > 0.0 && *v < 1.0);
        if !inside || (beta1 + beta2 + beta3 - 1.0).abs() > Self::SUM_TOL {
            return Err(Error::Domain(format!(
                "power-allocation factors must lie in (0, 1) and sum to 1: {b:?}"
            )));
        }
        Ok(b)
    }

    /// Builds the factors from the two user shares; the relay gets the rest.
    pub fn from_users(beta1: f64, beta2: f64) -> Self {
        Self {
            beta1,
            beta2,
            beta3: 1.0 - beta1 - beta2,
        }
    }

    pub fn equal() -> Self {
        let third = 1.0 / 3.0;
        Self {
            beta1: third,
            beta2: third,
            beta3: third,
        }
    }
}

/// `h_direct + H_ir diag(theta) h_ui`, the first-slot composite channel.
pub fn combined_channel(
    h_direct: &[Complex64],
    h_ir: &CMatrix,
    theta: &PhaseVector,
    h_ui: &[Complex64],
) -> Result<Vec<Complex64>> {
    check_conformal(h_direct, h_ir, theta, h_ui)?;
    let theta = theta.as_slice();
    Ok((0..h_ir.rows())
        .map(|m| {
            let cascade: Complex64 = (0..h_ir.cols())
                .map(|n| h_ir.get(m, n) * theta[n] * h_ui[n])
                .sum();
            h_direct[m] + cascade
        })
        .collect())
}

/// `h_direct^H + h_ui^H diag(theta) H_ir^H`, the second-slot row channel
/// obtained from the first-slot channels by reciprocity.
pub fn combined_channel_reverse(
    h_direct: &[Complex64],
    h_ir: &CMatrix,
    theta: &PhaseVector,
    h_ui: &[Complex64],
) -> Result<Vec<Complex64>> {
    check_conformal(h_direct, h_ir, theta, h_ui)?;
    let theta = theta.as_slice();
    Ok((0..h_ir.rows())
        .map(|m| {
            let cascade: Complex64 = (0..h_ir.cols())
                .map(|n| h_ui[n].conj() * theta[n] * h_ir.get(m, n).conj())
                .sum();
            h_direct[m].conj() + cascade
        })
        .collect())
}

fn check_conformal(
    h_direct: &[Complex64],
    h_ir: &CMatrix,
    theta: &PhaseVector,
    h_ui: &[Complex64],
) -> Result<()> {
    if h_direct.len() != h_ir.rows() || h_ui.len() != h_ir.cols() || theta.len() != h_ir.cols() {
        return Err(Error::DimensionMismatch(format!(
            "direct {} / cascade {}x{} / phases {} / user-surface {}",
            h_direct.len(),
            h_ir.rows(),
            h_ir.cols(),
            theta.len(),
            h_ui.len()
        )));
    }
    Ok(())
}

pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// Effective gains: gamma1/gamma3 use the first-slot phases and the relay
/// noise, gamma2/gamma4 the second-slot phases and the receiving user's noise.
pub fn link_gains(
    ch: &ChannelSet,
    theta1: &PhaseVector,
    theta2: &PhaseVector,
    noise: &NoisePowers,
) -> Result<LinkGains> {
    noise.check()?;
    let g1 = norm_sqr(&combined_channel(&ch.h_1r, &ch.h_ir, theta1, &ch.h_1i)?);
    let g3 = norm_sqr(&combined_channel(&ch.h_2r, &ch.h_ir, theta1, &ch.h_2i)?);
    let g2 = norm_sqr(&combined_channel_reverse(
        &ch.h_2r, &ch.h_ir, theta2, &ch.h_2i,
    )?);
    let g4 = norm_sqr(&combined_channel_reverse(
        &ch.h_1r, &ch.h_ir, theta2, &ch.h_1i,
    )?);
    LinkGains::new(
        g1 / noise.relay,
        g2 / noise.user2,
        g3 / noise.relay,
        g4 / noise.user1,
    )
}

/// `1/2 log2(1 + snr)`, accurate for tiny arguments.
#[inline]
pub fn half_log2_1p(snr: f64) -> f64 {
    0.5 * snr.ln_1p() / LN_2
}

#[inline]
pub fn link_rate(gamma: f64, beta: f64, p: f64) -> f64 {
    half_log2_1p(gamma * beta * p)
}

pub fn mac_rate(g: &LinkGains, beta: &PAFactors, p: f64) -> f64 {
    half_log2_1p(g.gamma1 * beta.beta1 * p + g.gamma3 * beta.beta2 * p)
}

/// The four hop rates and the MAC rate at one allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRates {
    pub r_1ir: f64,
    pub r_ri2: f64,
    pub r_2ir: f64,
    pub r_ri1: f64,
    pub r_mac: f64,
}

impl LinkRates {
    pub fn at(g: &LinkGains, beta: &PAFactors, p: f64) -> Self {
        Self {
            r_1ir: link_rate(g.gamma1, beta.beta1, p),
            r_ri2: link_rate(g.gamma2, beta.beta3, p),
            r_2ir: link_rate(g.gamma3, beta.beta2, p),
            r_ri1: link_rate(g.gamma4, beta.beta3, p),
            r_mac: mac_rate(g, beta, p),
        }
    }

    /// U1 -> RS -> U2 end-to-end rate.
    pub fn r12(&self) -> f64 {
        self.r_1ir.min(self.r_ri2)
    }

    /// U2 -> RS -> U1 end-to-end rate.
    pub fn r21(&self) -> f64 {
        self.r_2ir.min(self.r_ri1)
    }
}

/// `min{ min(R1ir, Rri2) + min(R2ir, Rri1), Rmac }`.
pub fn sum_rate(g: &LinkGains, beta: &PAFactors, p: f64) -> f64 {
    let r = LinkRates::at(g, beta, p);
    (r.r12() + r.r21()).min(r.r_mac)
}

/// Same quantity as [`sum_rate`] with the pairwise sums spelled out and the
/// `R1ir + R2ir` branch dropped (it never binds below the MAC rate).
pub fn sum_rate_expanded(g: &LinkGains, beta: &PAFactors, p: f64) -> f64 {
    let r = LinkRates::at(g, beta, p);
    [
        r.r_1ir + r.r_ri1,
        r.r_ri2 + r.r_2ir,
        r.r_ri2 + r.r_ri1,
        r.r_mac,
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}
