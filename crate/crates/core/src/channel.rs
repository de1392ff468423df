//! Rayleigh block-fading draws with an MMSE estimate/error split and the
//! underlay transmit-power cap.
//!
//! Desired links (S->R, R->U_b) are represented by their *estimated* gain,
//! drawn with variance `1 - zeta`. Links that only carry interference or feed
//! the power cap (S->D, R->D, T->R, T->U_b) use the total channel with unit
//! mean.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// Lower bound on the estimated-channel variance when `zeta -> 1`.
pub const ESTIMATE_VARIANCE_FLOOR: f64 = 1e-6;

/// Counter-based random substream: one `stream_id` per trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Power gains of one fading block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChannelRealization {
    /// Estimated S->R gain.
    pub x: f64,
    /// Total S->D gain.
    pub y: f64,
    /// Total T->R gain.
    pub z: f64,
    /// Total R->D gain.
    pub v: f64,
    /// Estimated R->U_b gains.
    pub q: Vec<f64>,
    /// Total T->U_b gains.
    pub w: Vec<f64>,
    /// Estimation error variance the estimated gains were drawn with.
    pub zeta: f64,
    /// Set when `1 - zeta` fell below [`ESTIMATE_VARIANCE_FLOOR`].
    pub csi_clamped: bool,
}

/// Exponential variate with the given mean (|CN(0, mean)|^2).
pub fn sample_power_gain<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> Result<f64> {
    if !(mean > 0.0) {
        return Err(Error::NonPositive { name: "mean", value: mean });
    }
    let e: f64 = Exp1.sample(rng);
    Ok(mean * e)
}

/// Variance of the estimated channel given the error variance.
pub fn estimate_variance(zeta: f64) -> (f64, bool) {
    let v = 1.0 - zeta;
    if v < ESTIMATE_VARIANCE_FLOOR {
        (ESTIMATE_VARIANCE_FLOOR, true)
    } else {
        (v, false)
    }
}

/// `min(pbar, i_itc * d^tau / gain_to_d)`; an infinite ITC or a zero gain
/// leaves the peak power untouched.
pub fn secondary_transmit_power(pbar: f64, i_itc: f64, gain_to_d: f64, d_to_d: f64, tau: f64) -> f64 {
    if i_itc.is_infinite() || gain_to_d <= 0.0 {
        return pbar;
    }
    pbar.min(i_itc * d_to_d.powf(tau) / gain_to_d)
}

/// Precomputed draw plan for one configuration and SNR.
#[derive(Clone, Debug)]
pub struct ChannelSampler {
    estimate_mean: f64,
    zeta: f64,
    clamped: bool,
    num_users: usize,
}

impl ChannelSampler {
    pub fn new(config: &SystemConfig, rho: f64) -> Self {
        let zeta = config.csi_error_variance(rho);
        let (estimate_mean, clamped) = estimate_variance(zeta);
        Self {
            estimate_mean,
            zeta,
            clamped,
            num_users: config.num_users,
        }
    }

    pub fn estimate_mean(&self) -> f64 {
        self.estimate_mean
    }

    /// Fills `out` in a fixed draw order: x, y, z, v, then (q_b, w_b) per user.
    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut ChannelRealization) {
        let est = self.estimate_mean;
        let mut exp = || -> f64 { Exp1.sample(rng) };
        out.x = est * exp();
        out.y = exp();
        out.z = exp();
        out.v = exp();
        out.q.resize(self.num_users, 0.0);
        out.w.resize(self.num_users, 0.0);
        for b in 0..self.num_users {
            out.q[b] = est * exp();
            out.w[b] = exp();
        }
        out.zeta = self.zeta;
        out.csi_clamped = self.clamped;
    }
}

/// Draws one realization at transmit SNR `rho` from `stream`.
pub fn draw_realization(config: &SystemConfig, rho: f64, stream: RngStream) -> ChannelRealization {
    let sampler = ChannelSampler::new(config, rho);
    let mut out = ChannelRealization::default();
    sampler.fill(&mut stream.rng(), &mut out);
    out
}
