//! Network geometry, large-scale fading and random channel generation.
//!
//! Every link gets a distance-based path loss with an additive Gaussian
//! shadowing term (in dB) and i.i.d. circularly-symmetric Rayleigh entries.
//! Randomness only enters through an explicit [`RngStream`], so a given
//! `(seed, stream_id)` pair always produces the same channels.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::pa_opt::{InnerMethod, SolverOptions, TaylorMode};
use crate::rate_model::NoisePowers;
use crate::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Cartesian position in meters.
pub type Position = [f64; 3];

pub fn distance(a: &Position, b: &Position) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Scenario description, loadable from a flat TOML file whose keys match the
/// field names below. Missing keys fall back to the default scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub pos_u1: Position,
    pub pos_u2: Position,
    pub pos_irs: Position,
    pub pos_rs: Position,
    /// Relay antenna count.
    #[serde(rename = "M")]
    pub m: usize,
    /// Reflecting element count.
    #[serde(rename = "N")]
    pub n: usize,
    pub fc_hz: f64,
    pub noise_r_dbm: f64,
    pub noise_1_dbm: f64,
    pub noise_2_dbm: f64,
    /// Path-loss exponent of the U1-RS and U2-RS links.
    pub alpha_direct: f64,
    /// Path-loss exponent of every link touching the surface.
    pub alpha_irs: f64,
    pub shadow_sigma_db: f64,
    pub d0_m: f64,
    /// Total transmit power shared by both users and the relay.
    pub p_dbm: f64,
    /// Target ratio R12 / R21 used by the rate-constrained allocation.
    pub mu: f64,

    pub sca_tol: f64,
    pub sca_max_iter: usize,
    pub inner_tol: f64,
    pub inner_grid_init: usize,
    pub inner_refine_rounds: usize,
    pub box_margin: f64,
    pub inner_method: InnerMethod,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let solver = SolverOptions::default();
        Self {
            pos_u1: [0.0, 0.0, 0.0],
            pos_u2: [0.0, 100.0, 0.0],
            pos_irs: [-10.0, 50.0, 20.0],
            pos_rs: [10.0, 50.0, 10.0],
            m: 4,
            n: 16,
            fc_hz: 1.5e9,
            noise_r_dbm: -80.0,
            noise_1_dbm: -80.0,
            noise_2_dbm: -80.0,
            alpha_direct: 2.3,
            alpha_irs: 2.1,
            shadow_sigma_db: 3.0,
            d0_m: 1.0,
            p_dbm: 40.0,
            mu: 3.0,
            sca_tol: solver.sca_tol,
            sca_max_iter: solver.sca_max_iter,
            inner_tol: solver.inner_tol,
            inner_grid_init: solver.inner_grid_init,
            inner_refine_rounds: solver.inner_refine_rounds,
            box_margin: solver.box_margin,
            inner_method: solver.inner_method,
        }
    }
}

impl SystemConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SystemConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text).map_err(|e| Error::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m == 0 || self.n == 0 {
            return bad(format!(
                "M and N must be >= 1 (got M={}, N={})",
                self.m, self.n
            ));
        }
        if !(self.fc_hz > 0.0 && self.fc_hz.is_finite()) {
            return bad(format!("fc_hz must be positive (got {})", self.fc_hz));
        }
        if !(self.d0_m > 0.0) {
            return bad(format!("d0_m must be positive (got {})", self.d0_m));
        }
        if !(self.shadow_sigma_db >= 0.0) {
            return bad(format!(
                "shadow_sigma_db must be >= 0 (got {})",
                self.shadow_sigma_db
            ));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad(format!("mu must be positive (got {})", self.mu));
        }
        let finite = [
            self.noise_r_dbm,
            self.noise_1_dbm,
            self.noise_2_dbm,
            self.alpha_direct,
            self.alpha_irs,
            self.p_dbm,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("noise powers, exponents and p_dbm must be finite".into());
        }
        let nodes = [
            ("u1", &self.pos_u1),
            ("u2", &self.pos_u2),
            ("irs", &self.pos_irs),
            ("rs", &self.pos_rs),
        ];
        for (i, (na, a)) in nodes.iter().enumerate() {
            for (nb, b) in &nodes[i + 1..] {
                if !(distance(a, b) > 0.0) {
                    return bad(format!("nodes {na} and {nb} coincide"));
                }
            }
        }
        self.solver_options().validate()
    }

    pub fn total_power_watt(&self) -> f64 {
        dbm_to_watt(self.p_dbm)
    }

    pub fn noise_powers(&self) -> NoisePowers {
        NoisePowers {
            relay: dbm_to_watt(self.noise_r_dbm),
            user1: dbm_to_watt(self.noise_1_dbm),
            user2: dbm_to_watt(self.noise_2_dbm),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        SolverOptions {
            sca_tol: self.sca_tol,
            sca_max_iter: self.sca_max_iter,
            inner_tol: self.inner_tol,
            inner_grid_init: self.inner_grid_init,
            inner_refine_rounds: self.inner_refine_rounds,
            box_margin: self.box_margin,
            inner_method: self.inner_method,
            taylor_mode: TaylorMode::ChainRule,
        }
    }
}

/// Seeded random source. Identical `(seed, stream_id)` pairs yield identical
/// draw sequences.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Dense complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }
}

/// Small-scale plus large-scale channels of all five links, first-slot
/// orientation. The second slot reuses them through reciprocity.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// U1 -> RS, length M.
    pub h_1r: Vec<Complex64>,
    /// U2 -> RS, length M.
    pub h_2r: Vec<Complex64>,
    /// IRS -> RS, M x N.
    pub h_ir: CMatrix,
    /// U1 -> IRS, length N.
    pub h_1i: Vec<Complex64>,
    /// U2 -> IRS, length N.
    pub h_2i: Vec<Complex64>,
}

impl ChannelSet {
    pub fn new(
        h_1r: Vec<Complex64>,
        h_2r: Vec<Complex64>,
        h_ir: CMatrix,
        h_1i: Vec<Complex64>,
        h_2i: Vec<Complex64>,
    ) -> Result<Self> {
        let set = Self {
            h_1r,
            h_2r,
            h_ir,
            h_1i,
            h_2i,
        };
        set.check()?;
        Ok(set)
    }

    pub fn m(&self) -> usize {
        self.h_ir.rows()
    }

    pub fn n(&self) -> usize {
        self.h_ir.cols()
    }

    fn check(&self) -> Result<()> {
        let (m, n) = (self.m(), self.n());
        if self.h_1r.len() != m || self.h_2r.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "direct channels must have length M={m}"
            )));
        }
        if self.h_1i.len() != n || self.h_2i.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "user-to-surface channels must have length N={n}"
            )));
        }
        let all = self
            .h_1r
            .iter()
            .chain(&self.h_2r)
            .chain(self.h_ir.as_slice())
            .chain(&self.h_1i)
            .chain(&self.h_2i);
        for z in all {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::Domain("channel entry is not finite".into()));
            }
        }
        Ok(())
    }
}

pub fn wavelength(fc_hz: f64) -> Result<f64> {
    if !(fc_hz > 0.0) || !fc_hz.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "carrier frequency must be positive (got {fc_hz})"
        )));
    }
    Ok(SPEED_OF_LIGHT / fc_hz)
}

/// Large-scale gain in dB: `PL0 - 10 alpha log10(d/d0) - x_sigma`, with
/// `PL0 = -20 log10(4 pi d0 / lambda)`. Negative values mean attenuation.
pub fn path_loss_db(d: f64, alpha: f64, d0: f64, lambda: f64, x_sigma_db: f64) -> Result<f64> {
    if !(d0 > 0.0) || !(lambda > 0.0) {
        return Err(Error::Domain(format!(
            "reference distance and wavelength must be positive (d0={d0}, lambda={lambda})"
        )));
    }
    if !(d >= d0) {
        return Err(Error::Domain(format!(
            "distance {d} m is below the reference distance {d0} m"
        )));
    }
    let pl0 = -20.0 * (4.0 * PI * d0 / lambda).log10();
    Ok(pl0 - 10.0 * alpha * (d / d0).log10() - x_sigma_db)
}

/// One real Gaussian shadowing sample in dB. Always consumes exactly one
/// normal draw so streams stay aligned across different `sigma_db` values.
pub fn draw_shadowing(rng: &mut RngStream, sigma_db: f64) -> f64 {
    debug_assert!(sigma_db >= 0.0);
    let z: f64 = StandardNormal.sample(rng);
    if sigma_db == 0.0 {
        0.0
    } else {
        sigma_db * z
    }
}

/// CN(0, 1) sample.
fn complex_normal(rng: &mut RngStream) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * FRAC_1_SQRT_2
}

/// Amplitude scale `sqrt(10^(PL/10))` of one link with a fresh shadowing draw.
fn link_amplitude(
    rng: &mut RngStream,
    cfg: &SystemConfig,
    lambda: f64,
    a: &Position,
    b: &Position,
    alpha: f64,
) -> Result<f64> {
    let x_sigma = draw_shadowing(rng, cfg.shadow_sigma_db);
    let pl = path_loss_db(distance(a, b), alpha, cfg.d0_m, lambda, x_sigma)?;
    Ok(db_to_linear(pl).sqrt())
}

fn rayleigh_vector(rng: &mut RngStream, len: usize, scale: f64) -> Vec<Complex64> {
    (0..len).map(|_| complex_normal(rng) * scale).collect()
}

/// Draws one channel realization. Link order (and so draw order) is fixed:
/// U1-RS, U2-RS, IRS-RS, U1-IRS, U2-IRS; each link takes its shadowing sample
/// before its fading entries.
pub fn generate_channels(cfg: &SystemConfig, rng: &mut RngStream) -> Result<ChannelSet> {
    cfg.validate()?;
    let lambda = wavelength(cfg.fc_hz)?;
    let (m, n) = (cfg.m, cfg.n);

    let a = link_amplitude(rng, cfg, lambda, &cfg.pos_u1, &cfg.pos_rs, cfg.alpha_direct)?;
    let h_1r = rayleigh_vector(rng, m, a);
    let a = link_amplitude(rng, cfg, lambda, &cfg.pos_u2, &cfg.pos_rs, cfg.alpha_direct)?;
    let h_2r = rayleigh_vector(rng, m, a);
    let a = link_amplitude(rng, cfg, lambda, &cfg.pos_irs, &cfg.pos_rs, cfg.alpha_irs)?;
    let h_ir = CMatrix::from_fn(m, n, |_, _| complex_normal(rng) * a);
    let a = link_amplitude(rng, cfg, lambda, &cfg.pos_u1, &cfg.pos_irs, cfg.alpha_irs)?;
    let h_1i = rayleigh_vector(rng, n, a);
    let a = link_amplitude(rng, cfg, lambda, &cfg.pos_u2, &cfg.pos_irs, cfg.alpha_irs)?;
    let h_2i = rayleigh_vector(rng, n, a);

    ChannelSet::new(h_1r, h_2r, h_ir, h_1i, h_2i)
}
