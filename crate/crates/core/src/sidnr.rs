//! Instantaneous signal-to-interference-distortion-noise ratios.
//!
//! Every SIDNR in the network has the same shape
//!
//! ```text
//!            share * P * g
//! ---------------------------------------------------------
//! self * P * g + csi * P + geometry * P_T * g_int + d^tau * noise
//! ```
//!
//! where `g` is the estimated desired gain and `g_int` the primary-to-receiver
//! gain. [`HopCoefficients`] carries the constants for one (hop, layer) pair.

use crate::config::{AccessMode, SystemConfig};
use crate::error::{Error, Result};

/// Constants of one SIDNR expression.
#[derive(Clone, Debug, PartialEq)]
pub struct HopCoefficients {
    /// Power-allocation factor of the decoded layer.
    pub share: f64,
    /// Multiplier of the self term: uncancelled + residual + distortion.
    pub self_interference: f64,
    /// Channel-estimation error term `zeta * (1 + phi^2)`.
    pub csi_error: f64,
    /// Primary interference geometry `d_hop^tau * d_int^-tau * (1 + phi_T^2)`.
    pub primary_geometry: f64,
    /// Power of the weaker layers not yet decoded.
    pub uncancelled: f64,
    /// Power leaked by imperfect cancellation of stronger layers.
    pub residual: f64,
    /// Receiver noise variance.
    pub noise: f64,
    /// `d_hop^tau`.
    pub distance_factor: f64,
}

impl HopCoefficients {
    /// Supremum of the SIDNR over all channel states (infinite without self term).
    pub fn ceiling(&self) -> f64 {
        if self.self_interference > 0.0 {
            self.share / self.self_interference
        } else {
            f64::INFINITY
        }
    }

    /// Evaluates the SIDNR. `power` is the (capped) secondary transmit power.
    pub fn sidnr(&self, power: f64, p_t: f64, desired_gain: f64, interference_gain: f64) -> f64 {
        let signal = power * desired_gain;
        if signal == 0.0 {
            return 0.0;
        }
        // Accumulation order: self, csi, interference, noise.
        let mut den = self.self_interference * signal;
        den += self.csi_error * power;
        den += self.primary_geometry * p_t * interference_gain;
        den += self.distance_factor * self.noise;
        self.share * signal / den
    }
}

fn check_user(config: &SystemConfig, user: usize) -> Result<()> {
    config.check_user(user)
}

fn residual_sum(config: &SystemConfig, shares: &[f64], layer: usize) -> f64 {
    (0..layer - 1).map(|n| config.sic_residue[n] * shares[n]).sum()
}

fn uncancelled_sum(shares: &[f64], layer: usize) -> f64 {
    shares[layer..].iter().sum()
}

/// Coefficients of `gamma_{R,j}`: relay decoding layer `j` (1-based).
///
/// For `j = B` the uncancelled sum is empty, which gives the last-user
/// self term `residual + phi_SR^2`.
pub fn hop1_coefficients(config: &SystemConfig, j: usize, zeta: f64) -> Result<HopCoefficients> {
    check_user(config, j)?;
    let tau = config.pathloss;
    let phi2 = config.hi_source * config.hi_source;
    let uncancelled = uncancelled_sum(&config.alpha, j);
    let residual = residual_sum(config, &config.alpha, j);
    Ok(HopCoefficients {
        share: config.alpha[j - 1],
        self_interference: uncancelled + residual + phi2,
        csi_error: zeta + zeta * phi2,
        primary_geometry: config.d_sr.powf(tau)
            * config.d_tr.powf(-tau)
            * (1.0 + config.hi_primary * config.hi_primary),
        uncancelled,
        residual,
        noise: config.noise_r,
        distance_factor: config.d_sr.powf(tau),
    })
}

/// Coefficients of `gamma_{b,j}`: user `b` decoding layer `j <= b`.
///
/// The uncancelled sum runs over layers `j+1..=B`, not `j+1..=b`: U_b
/// receives the full superposition, so every weaker layer is still present
/// when decoding layer `j`. Summing only to `b` would make U_1 see no
/// inter-user interference at all.
pub fn hop2_coefficients(config: &SystemConfig, b: usize, j: usize, zeta: f64) -> Result<HopCoefficients> {
    check_user(config, b)?;
    check_user(config, j)?;
    if j > b {
        return Err(Error::LayerAfterReceiver { layer: j, receiver: b });
    }
    let tau = config.pathloss;
    let phi2 = config.hi_user[b - 1] * config.hi_user[b - 1];
    let uncancelled = uncancelled_sum(&config.beta, j);
    let residual = residual_sum(config, &config.beta, j);
    Ok(HopCoefficients {
        share: config.beta[j - 1],
        self_interference: uncancelled + residual + phi2,
        csi_error: zeta + zeta * phi2,
        primary_geometry: config.d_ru[b - 1].powf(tau)
            * config.d_tu[b - 1].powf(-tau)
            * (1.0 + config.hi_primary * config.hi_primary),
        uncancelled,
        residual,
        noise: config.noise_user[b - 1],
        distance_factor: config.d_ru[b - 1].powf(tau),
    })
}

/// Single-user coefficients of the time-division baseline: full power, no
/// inter-user terms, impairments kept.
pub fn oma_coefficients(config: &SystemConfig, hop: Hop, user: usize, zeta: f64) -> Result<HopCoefficients> {
    let mut c = match hop {
        Hop::SourceToRelay => hop1_coefficients(config, user, zeta)?,
        Hop::RelayToUser => hop2_coefficients(config, user, user, zeta)?,
    };
    let phi = match hop {
        Hop::SourceToRelay => config.hi_source,
        Hop::RelayToUser => config.hi_user[user - 1],
    };
    c.share = 1.0;
    c.uncancelled = 0.0;
    c.residual = 0.0;
    c.self_interference = phi * phi;
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Hop {
    SourceToRelay,
    RelayToUser,
}

/// Coefficients user `user` depends on for its own message under the
/// configured access mode: hop 1 at the relay, hop 2 at the user itself.
pub fn own_layer_coefficients(config: &SystemConfig, hop: Hop, user: usize, zeta: f64) -> Result<HopCoefficients> {
    match (config.mode, hop) {
        (AccessMode::Oma, _) => oma_coefficients(config, hop, user, zeta),
        (AccessMode::Noma, Hop::SourceToRelay) => hop1_coefficients(config, user, zeta),
        (AccessMode::Noma, Hop::RelayToUser) => hop2_coefficients(config, user, user, zeta),
    }
}

/// `gamma_{R,j}` at source power `p_s` for gains `x` (S->R) and `z` (T->R).
pub fn sidnr_hop1(coeffs: &HopCoefficients, p_s: f64, p_t: f64, x: f64, z: f64) -> f64 {
    coeffs.sidnr(p_s, p_t, x, z)
}

/// `gamma_{b,j}` at relay power `p_r` for gains `q` (R->U_b) and `w` (T->U_b).
pub fn sidnr_hop2(coeffs: &HopCoefficients, p_r: f64, p_t: f64, q: f64, w: f64) -> f64 {
    coeffs.sidnr(p_r, p_t, q, w)
}

/// Dual-hop decode-and-forward rate `0.5 * log2(1 + min(g1, g2))`.
pub fn achievable_rate(gamma_hop1: f64, gamma_hop2: f64) -> f64 {
    0.5 * (1.0 + gamma_hop1.min(gamma_hop2)).log2()
}

/// SIDNR threshold for a target rate over two slots: `2^(2R) - 1`.
pub fn threshold_psi(rate: f64) -> f64 {
    (2.0 * rate).exp2() - 1.0
}

/// Baseline threshold: with 2B slots each user gets 1/B of each hop, so the
/// rate target is stretched to `2^(2 B R) - 1`.
pub fn oma_threshold(num_users: usize, rate: f64) -> f64 {
    (2.0 * num_users as f64 * rate).exp2() - 1.0
}

/// Threshold of `user` under the configured access mode.
pub fn user_threshold(config: &SystemConfig, user: usize) -> Result<f64> {
    config.check_user(user)?;
    let rate = config.rate_thresholds[user - 1];
    Ok(match config.mode {
        AccessMode::Noma => threshold_psi(rate),
        AccessMode::Oma => oma_threshold(config.num_users, rate),
    })
}

/// Baseline end-to-end SIDNR and threshold of `user` for a given draw and
/// transmit powers.
pub fn oma_sidnr_and_threshold(
    config: &SystemConfig,
    user: usize,
    realization: &crate::channel::ChannelRealization,
    p_s: f64,
    p_r: f64,
) -> Result<(f64, f64)> {
    let zeta = realization.zeta;
    let c1 = oma_coefficients(config, Hop::SourceToRelay, user, zeta)?;
    let c2 = oma_coefficients(config, Hop::RelayToUser, user, zeta)?;
    let g1 = c1.sidnr(p_s, config.p_t, realization.x, realization.z);
    let g2 = c2.sidnr(p_r, config.p_t, realization.q[user - 1], realization.w[user - 1]);
    Ok((g1.min(g2), oma_threshold(config.num_users, config.rate_thresholds[user - 1])))
}
