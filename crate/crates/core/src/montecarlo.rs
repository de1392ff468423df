//! Seeded Monte Carlo estimation of outage probabilities and hop CDFs.
//!
//! Trial `t` draws from the ChaCha substream `(seed, t)`, so any trial can be
//! replayed alone. Work is split into fixed trial-id batches and reduced with
//! integer counters, which keeps results bit-identical for any thread count.

use rayon::prelude::*;

use crate::channel::{secondary_transmit_power, ChannelRealization, ChannelSampler, RngStream};
use crate::config::{AccessMode, SystemConfig};
use crate::error::{Error, Result};
use crate::sidnr::{self, Hop, HopCoefficients};

const BATCH: u64 = 4096;

/// How a user's outage event is defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OutageSemantics {
    /// Own layer only: `min(gamma_{R,j}, gamma_{j,j}) < psi_j`.
    PerLayer,
    /// Every layer `k <= j` must clear `psi_k` at the relay and at U_j.
    JointSic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct McOptions {
    pub trials: u64,
    pub seed: u64,
    /// Also emit [`OutageSemantics::JointSic`] results.
    pub joint_sic: bool,
}

impl McOptions {
    pub fn new(trials: u64, seed: u64) -> Self {
        Self {
            trials,
            seed,
            joint_sic: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutageResult {
    pub user: usize,
    pub rho: f64,
    pub analytic_op: Option<f64>,
    pub empirical_op: f64,
    pub trials: u64,
    /// `3 sqrt(p (1 - p) / N)`.
    pub ci_halfwidth: f64,
    pub hop1_cdf: f64,
    pub hop2_cdf: f64,
    pub semantics: OutageSemantics,
}

pub fn ci_halfwidth(p: f64, trials: u64) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

/// Per-trial SIDNRs and outage indicators for every user.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrialOutcome {
    /// `gamma_{R,j}` for each layer (own-user SIDNR in OMA mode).
    pub relay_sidnr: Vec<f64>,
    /// `gamma_{j,j}` for each user.
    pub access_sidnr: Vec<f64>,
    pub outage: Vec<bool>,
    pub joint_outage: Vec<bool>,
    pub csi_clamped: bool,
}

/// Coefficients and thresholds prepared once per (config, SNR).
#[derive(Clone, Debug)]
pub struct TrialEngine {
    config: SystemConfig,
    sampler: ChannelSampler,
    relay: Vec<HopCoefficients>,
    /// `access[b - 1][j - 1]`, layers `j <= b`.
    access: Vec<Vec<HopCoefficients>>,
    thresholds: Vec<f64>,
    sd_factor: f64,
    rd_factor: f64,
}

impl TrialEngine {
    pub fn new(config: &SystemConfig, rho: f64) -> Result<Self> {
        let report = config.validate();
        if !report.is_ok() {
            return Err(Error::InvalidConfig(report));
        }
        let at = config.at_snr(rho);
        let zeta = at.csi_error_variance(rho);
        let b_max = at.num_users;
        let mut relay = Vec::with_capacity(b_max);
        let mut access = Vec::with_capacity(b_max);
        let mut thresholds = Vec::with_capacity(b_max);
        for b in 1..=b_max {
            thresholds.push(sidnr::user_threshold(&at, b)?);
            match at.mode {
                AccessMode::Noma => {
                    relay.push(sidnr::hop1_coefficients(&at, b, zeta)?);
                    access.push(
                        (1..=b)
                            .map(|j| sidnr::hop2_coefficients(&at, b, j, zeta))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                AccessMode::Oma => {
                    relay.push(sidnr::oma_coefficients(&at, Hop::SourceToRelay, b, zeta)?);
                    access.push(vec![sidnr::oma_coefficients(&at, Hop::RelayToUser, b, zeta)?]);
                }
            }
        }
        Ok(Self {
            sampler: ChannelSampler::new(&at, rho),
            sd_factor: at.d_sd.powf(at.pathloss),
            rd_factor: at.d_rd.powf(at.pathloss),
            config: at,
            relay,
            access,
            thresholds,
        })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    fn own_access(&self, b: usize) -> &HopCoefficients {
        self.access[b - 1].last().expect("at least one layer per user")
    }

    /// Runs trial `trial_id`, reusing `scratch` for the channel draw.
    pub fn run(&self, seed: u64, trial_id: u64, scratch: &mut ChannelRealization, out: &mut TrialOutcome) {
        let mut rng = RngStream::new(seed, trial_id).rng();
        self.sampler.fill(&mut rng, scratch);
        let c = &self.config;
        let p_s = secondary_transmit_power(c.pbar_s, c.i_itc, scratch.y, self.sd_factor, 1.0);
        let p_r = secondary_transmit_power(c.pbar_r, c.i_itc, scratch.v, self.rd_factor, 1.0);

        let n = c.num_users;
        out.relay_sidnr.resize(n, 0.0);
        out.access_sidnr.resize(n, 0.0);
        out.outage.resize(n, false);
        out.joint_outage.resize(n, false);
        out.csi_clamped = scratch.csi_clamped;

        for j in 0..n {
            out.relay_sidnr[j] = self.relay[j].sidnr(p_s, c.p_t, scratch.x, scratch.z);
        }
        for b in 1..=n {
            let (q, w) = (scratch.q[b - 1], scratch.w[b - 1]);
            let own = self.own_access(b).sidnr(p_r, c.p_t, q, w);
            out.access_sidnr[b - 1] = own;
            let psi = self.thresholds[b - 1];
            let fails = out.relay_sidnr[b - 1].min(own) < psi;
            out.outage[b - 1] = fails;

            let mut joint = fails;
            if c.mode == AccessMode::Noma {
                for k in 1..b {
                    if joint {
                        break;
                    }
                    let psi_k = self.thresholds[k - 1];
                    let cross = self.access[b - 1][k - 1].sidnr(p_r, c.p_t, q, w);
                    joint = out.relay_sidnr[k - 1] < psi_k || cross < psi_k;
                }
            }
            out.joint_outage[b - 1] = joint;
        }
    }
}

/// Runs a single trial from scratch.
pub fn run_trial(config: &SystemConfig, rho: f64, seed: u64, trial_id: u64) -> Result<TrialOutcome> {
    let engine = TrialEngine::new(config, rho)?;
    let mut scratch = ChannelRealization::default();
    let mut out = TrialOutcome::default();
    engine.run(seed, trial_id, &mut scratch, &mut out);
    Ok(out)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Counts {
    outage: u64,
    joint: u64,
    hop1: u64,
    hop2: u64,
}

fn add_counts(mut a: Vec<Counts>, b: Vec<Counts>) -> Vec<Counts> {
    for (x, y) in a.iter_mut().zip(b) {
        x.outage += y.outage;
        x.joint += y.joint;
        x.hop1 += y.hop1;
        x.hop2 += y.hop2;
    }
    a
}

fn batches(trials: u64) -> impl IndexedParallelIterator<Item = std::ops::Range<u64>> {
    let n = trials.div_ceil(BATCH) as usize;
    (0..n).into_par_iter().map(move |i| {
        let i = i as u64;
        i * BATCH..((i + 1) * BATCH).min(trials)
    })
}

/// Empirical per-user outage probabilities at transmit SNR `rho`.
///
/// Returns one [`OutageSemantics::PerLayer`] result per user, followed by
/// one [`OutageSemantics::JointSic`] result per user when requested.
pub fn estimate_outage(config: &SystemConfig, rho: f64, opts: McOptions) -> Result<Vec<OutageResult>> {
    if opts.trials == 0 {
        return Err(Error::NonPositive { name: "trials", value: 0.0 });
    }
    let engine = TrialEngine::new(config, rho)?;
    let n = config.num_users;
    let counts = batches(opts.trials)
        .map(|range| {
            let mut scratch = ChannelRealization::default();
            let mut out = TrialOutcome::default();
            let mut counts = vec![Counts::default(); n];
            for t in range {
                engine.run(opts.seed, t, &mut scratch, &mut out);
                for (b, c) in counts.iter_mut().enumerate() {
                    let psi = engine.thresholds[b];
                    c.outage += u64::from(out.outage[b]);
                    c.joint += u64::from(out.joint_outage[b]);
                    c.hop1 += u64::from(out.relay_sidnr[b] < psi);
                    c.hop2 += u64::from(out.access_sidnr[b] < psi);
                }
            }
            counts
        })
        .reduce(|| vec![Counts::default(); n], add_counts);

    let total = opts.trials as f64;
    let make = |user: usize, c: &Counts, semantics: OutageSemantics| {
        let hits = match semantics {
            OutageSemantics::PerLayer => c.outage,
            OutageSemantics::JointSic => c.joint,
        };
        let p = hits as f64 / total;
        OutageResult {
            user,
            rho,
            analytic_op: None,
            empirical_op: p,
            trials: opts.trials,
            ci_halfwidth: ci_halfwidth(p, opts.trials),
            hop1_cdf: c.hop1 as f64 / total,
            hop2_cdf: c.hop2 as f64 / total,
            semantics,
        }
    };
    let mut results: Vec<_> = counts
        .iter()
        .enumerate()
        .map(|(b, c)| make(b + 1, c, OutageSemantics::PerLayer))
        .collect();
    if opts.joint_sic {
        results.extend(
            counts
                .iter()
                .enumerate()
                .map(|(b, c)| make(b + 1, c, OutageSemantics::JointSic)),
        );
    }
    Ok(results)
}

/// Empirical CDF of one hop SIDNR of `user` over an ascending threshold grid,
/// all points from the same sample set.
pub fn empirical_cdf(
    config: &SystemConfig,
    hop: Hop,
    user: usize,
    rho: f64,
    grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    config.check_user(user)?;
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidSweep("threshold grid must be ascending".into()));
    }
    if trials == 0 {
        return Err(Error::NonPositive { name: "trials", value: 0.0 });
    }
    let engine = TrialEngine::new(config, rho)?;
    let mut samples: Vec<f64> = batches(trials)
        .flat_map_iter(|range| {
            let mut scratch = ChannelRealization::default();
            let mut out = TrialOutcome::default();
            let engine = &engine;
            range.map(move |t| {
                engine.run(seed, t, &mut scratch, &mut out);
                match hop {
                    Hop::SourceToRelay => out.relay_sidnr[user - 1],
                    Hop::RelayToUser => out.access_sidnr[user - 1],
                }
            })
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    Ok(grid
        .iter()
        .map(|&psi| samples.partition_point(|&g| g < psi) as f64 / trials as f64)
        .collect())
}
