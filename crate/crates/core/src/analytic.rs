//! Closed-form per-hop SIDNR CDFs and the end-to-end outage probability.
//!
//! Every hop CDF splits on whether the underlay cap binds. With `G` the
//! desired gain, `C` the gain towards the primary receiver and `I` the
//! primary-interference gain, all exponential:
//!
//! ```text
//! F(psi) = P[G < I K_p + M_p + L,     C < cap]      (peak-power branch)
//!        + P[G < C I K_c + C M_c + L, C > cap]      (capped branch)
//! ```
//!
//! The peak branch integrates in elementary functions. The capped branch
//! reduces to `int_0^inf e^(-mu z) / (z + xi) dz = -e^(mu xi) Ei(-mu xi)`.
//! The same evaluator serves both hops and both the intermediate users and
//! user B; only the coefficients differ.

use crate::channel::estimate_variance;
use crate::config::SystemConfig;
use crate::error::Result;
use crate::sidnr::{self, HopCoefficients, Hop};
use crate::special::scaled_ei;

/// Thresholds closer than this to the SIDNR ceiling evaluate to CDF = 1.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

pub use crate::sidnr::threshold_psi;

/// Slope/offset of the outage region `G < I * slope + offset (+ L)` for one
/// power regime.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchPair {
    /// Coefficient of the primary-interference gain (K, S, E).
    pub interference_slope: f64,
    /// Noise contribution (M, O, H).
    pub noise_offset: f64,
}

/// Constants of one closed-form hop CDF.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdfCoefficients {
    /// Rate of the desired (estimated) gain: lambda_x or lambda_q.
    pub rate_desired: f64,
    /// Rate of the gain towards the primary receiver: lambda_y or lambda_v.
    pub rate_cap: f64,
    /// Rate of the primary-interference gain: lambda_z or lambda_w.
    pub rate_interference: f64,
    /// Branch where the peak power is used.
    pub peak: BranchPair,
    /// Branch where the cap binds; `None` when the ITC is infinite.
    pub capped: Option<BranchPair>,
    /// CSI-error offset (L, T, I).
    pub csi_offset: f64,
    /// `I_ITC d^tau / pbar`; infinite without ITC.
    pub cap_ratio: f64,
}

/// Result of preparing a hop CDF at a given threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CdfEvaluation {
    /// `psi = 0`: the CDF of a nonnegative variable at zero.
    Zero,
    /// Threshold at or above the SIDNR ceiling, or zero transmit power.
    /// `binding` is the probability that the cap binds, which is where the
    /// branch decomposition puts that share of the unit mass.
    Saturated { binding: f64 },
    Closed(CdfCoefficients),
}

/// The two branch probabilities of a hop CDF (Delta/Upsilon on the first
/// hop, Theta/Phi on the second).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchTerms {
    pub peak: f64,
    pub capped: f64,
}

impl BranchTerms {
    pub fn total(&self) -> f64 {
        self.peak + self.capped
    }
}

/// Peak-power and cap-binding hop parameters fed to [`prepare_cdf`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HopPower {
    pub pbar: f64,
    pub p_t: f64,
    pub i_itc: f64,
    /// `d_jD^tau` of the transmitter towards the primary receiver.
    pub cap_distance_factor: f64,
}

/// Builds the closed-form constants for SIDNR `coeffs` at threshold `psi`.
pub fn prepare_cdf(coeffs: &HopCoefficients, power: HopPower, psi: f64, rate_desired: f64) -> CdfEvaluation {
    if psi <= 0.0 {
        return CdfEvaluation::Zero;
    }
    if power.i_itc <= 0.0 {
        return CdfEvaluation::Saturated { binding: 1.0 };
    }
    if psi >= coeffs.ceiling() - BOUNDARY_TOLERANCE || power.pbar <= 0.0 {
        let binding = if power.i_itc.is_infinite() || power.pbar <= 0.0 {
            0.0
        } else {
            (-power.i_itc * power.cap_distance_factor / power.pbar).exp()
        };
        return CdfEvaluation::Saturated { binding };
    }
    let margin = coeffs.share - coeffs.self_interference * psi;
    let interference = coeffs.primary_geometry * power.p_t * psi;
    let noise = psi * coeffs.distance_factor * coeffs.noise;
    let branch = |level: f64| BranchPair {
        interference_slope: interference / (level * margin),
        noise_offset: noise / (level * margin),
    };
    let (capped, cap_ratio) = if power.i_itc.is_infinite() {
        (None, f64::INFINITY)
    } else {
        let level = power.i_itc * power.cap_distance_factor;
        (Some(branch(level)), level / power.pbar)
    };
    CdfEvaluation::Closed(CdfCoefficients {
        rate_desired,
        rate_cap: 1.0,
        rate_interference: 1.0,
        peak: branch(power.pbar),
        capped,
        csi_offset: coeffs.csi_error * psi / margin,
        cap_ratio,
    })
}

impl CdfCoefficients {
    /// `P[cap does not bind] = 1 - e^(-lambda_c cap)`.
    fn peak_probability(&self) -> f64 {
        -(-self.rate_cap * self.cap_ratio).exp_m1()
    }

    /// `lambda_i e^(-lambda_g (M + L)) / (lambda_i + lambda_g K)` of the peak branch.
    fn peak_survival(&self) -> f64 {
        let (lx, lz) = (self.rate_desired, self.rate_interference);
        lz * (-lx * (self.peak.noise_offset + self.csi_offset)).exp()
            / (lz + lx * self.peak.interference_slope)
    }

    /// The Ei-bearing term of the capped branch (nonpositive).
    fn capped_ei_term(&self) -> f64 {
        let Some(capped) = self.capped else {
            return 0.0;
        };
        let (lx, ly, lz) = (self.rate_desired, self.rate_cap, self.rate_interference);
        let cap = self.cap_ratio;
        let k = capped.interference_slope;
        let m = capped.noise_offset;
        let decay = -cap * (ly + lx * m) - lx * self.csi_offset;
        if k == 0.0 {
            // No primary interference: the z-integral is trivial.
            return -ly * decay.exp() / (lx * m + ly);
        }
        let mu = lz + lx * cap * k;
        let xi = m / k + ly / (lx * k);
        ly * lz / (lx * k) * decay.exp() * scaled_ei(mu * xi)
    }

    /// Branch decomposition of the CDF.
    pub fn terms(&self) -> BranchTerms {
        let peak = self.peak_probability() * (1.0 - self.peak_survival());
        let capped = match self.capped {
            None => 0.0,
            Some(_) => (-self.rate_cap * self.cap_ratio).exp() + self.capped_ei_term(),
        };
        BranchTerms { peak, capped }
    }

    /// CDF in the rearranged single-expression form
    /// `1 - S (1 - e^(-lambda_c cap)) + Ei-term`.
    pub fn cdf(&self) -> f64 {
        let value = 1.0 - self.peak_survival() * self.peak_probability() + self.capped_ei_term();
        value.clamp(0.0, 1.0)
    }

    /// `1 - cdf()` as a sum of nonnegative terms, accurate when the CDF
    /// rounds to one.
    pub fn survival(&self) -> f64 {
        let value = self.peak_survival() * self.peak_probability() - self.capped_ei_term();
        value.clamp(0.0, 1.0)
    }
}

impl CdfEvaluation {
    pub fn cdf(&self) -> f64 {
        match self {
            CdfEvaluation::Zero => 0.0,
            CdfEvaluation::Saturated { .. } => 1.0,
            CdfEvaluation::Closed(c) => c.cdf(),
        }
    }

    pub fn survival(&self) -> f64 {
        match self {
            CdfEvaluation::Zero => 1.0,
            CdfEvaluation::Saturated { .. } => 0.0,
            CdfEvaluation::Closed(c) => c.survival(),
        }
    }

    pub fn is_saturated(&self) -> bool {
        matches!(self, CdfEvaluation::Saturated { .. })
    }

    /// Branch terms; a saturated hop splits its unit mass by whether the
    /// cap binds.
    pub fn terms(&self) -> BranchTerms {
        match self {
            CdfEvaluation::Zero => BranchTerms { peak: 0.0, capped: 0.0 },
            CdfEvaluation::Saturated { binding } => BranchTerms {
                peak: 1.0 - binding,
                capped: *binding,
            },
            CdfEvaluation::Closed(c) => c.terms(),
        }
    }
}

fn hop_power(config: &SystemConfig, hop: Hop) -> HopPower {
    let tau = config.pathloss;
    match hop {
        Hop::SourceToRelay => HopPower {
            pbar: config.pbar_s,
            p_t: config.p_t,
            i_itc: config.i_itc,
            cap_distance_factor: config.d_sd.powf(tau),
        },
        Hop::RelayToUser => HopPower {
            pbar: config.pbar_r,
            p_t: config.p_t,
            i_itc: config.i_itc,
            cap_distance_factor: config.d_rd.powf(tau),
        },
    }
}

fn prepare(config: &SystemConfig, hop: Hop, coeffs: &HopCoefficients, rho: f64, psi: f64) -> CdfEvaluation {
    let (variance, _) = estimate_variance(config.csi_error_variance(rho));
    prepare_cdf(coeffs, hop_power(config, hop), psi, 1.0 / variance)
}

/// Prepared first-hop CDF of the relay decoding layer `j` at SNR `rho`.
pub fn relay_cdf_evaluation(config: &SystemConfig, j: usize, rho: f64, psi: f64) -> Result<CdfEvaluation> {
    let at = config.at_snr(rho);
    let zeta = at.csi_error_variance(rho);
    let coeffs = match at.mode {
        crate::config::AccessMode::Noma => sidnr::hop1_coefficients(&at, j, zeta)?,
        crate::config::AccessMode::Oma => sidnr::oma_coefficients(&at, Hop::SourceToRelay, j, zeta)?,
    };
    Ok(prepare(&at, Hop::SourceToRelay, &coeffs, rho, psi))
}

/// Prepared second-hop CDF of user `b` decoding layer `j` at SNR `rho`.
pub fn user_cdf_evaluation(config: &SystemConfig, b: usize, j: usize, rho: f64, psi: f64) -> Result<CdfEvaluation> {
    let at = config.at_snr(rho);
    let zeta = at.csi_error_variance(rho);
    let coeffs = match at.mode {
        crate::config::AccessMode::Noma => sidnr::hop2_coefficients(&at, b, j, zeta)?,
        crate::config::AccessMode::Oma => {
            if j > b {
                return Err(crate::error::Error::LayerAfterReceiver { layer: j, receiver: b });
            }
            sidnr::oma_coefficients(&at, Hop::RelayToUser, b, zeta)?
        }
    };
    Ok(prepare(&at, Hop::RelayToUser, &coeffs, rho, psi))
}

/// CDF of `gamma_{R,j}` at `psi`.
pub fn cdf_relay(config: &SystemConfig, j: usize, rho: f64, psi: f64) -> Result<f64> {
    Ok(relay_cdf_evaluation(config, j, rho, psi)?.cdf())
}

/// CDF of `gamma_{b,j}` at `psi`.
pub fn cdf_user(config: &SystemConfig, b: usize, j: usize, rho: f64, psi: f64) -> Result<f64> {
    Ok(user_cdf_evaluation(config, b, j, rho, psi)?.cdf())
}

/// CDF of `gamma_{R,B}`, the relay decoding the weakest layer.
pub fn cdf_relay_last(config: &SystemConfig, rho: f64, psi: f64) -> Result<f64> {
    cdf_relay(config, config.num_users, rho, psi)
}

/// CDF of `gamma_B`, the weakest user decoding its own layer.
pub fn cdf_user_last(config: &SystemConfig, rho: f64, psi: f64) -> Result<f64> {
    cdf_user(config, config.num_users, config.num_users, rho, psi)
}

/// Closed-form constants for one user's end-to-end outage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticCoefficients {
    pub user: usize,
    pub psi: f64,
    pub relay: CdfEvaluation,
    pub access: CdfEvaluation,
}

pub fn analytic_coefficients(config: &SystemConfig, user: usize, rho: f64) -> Result<AnalyticCoefficients> {
    let psi = sidnr::user_threshold(config, user)?;
    Ok(AnalyticCoefficients {
        user,
        psi,
        relay: relay_cdf_evaluation(config, user, rho, psi)?,
        access: user_cdf_evaluation(config, user, user, rho, psi)?,
    })
}

/// `F1 + F2 - F1 F2`: independent hops, outage if either fails.
pub fn compose_outage(f1: f64, f2: f64) -> f64 {
    f1 + f2 - f1 * f2
}

/// Per-user analytic outage with the hop CDFs it was built from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutageBreakdown {
    pub psi: f64,
    pub hop1_cdf: f64,
    pub hop2_cdf: f64,
    pub outage: f64,
    /// `1 - outage`, computed from the hop survival functions directly.
    pub success: f64,
    /// A hop threshold sat at or beyond its SIDNR ceiling.
    pub boundary: bool,
}

pub fn outage_breakdown(config: &SystemConfig, user: usize, rho: f64) -> Result<OutageBreakdown> {
    let c = analytic_coefficients(config, user, rho)?;
    let hop1_cdf = c.relay.cdf();
    let hop2_cdf = c.access.cdf();
    Ok(OutageBreakdown {
        psi: c.psi,
        hop1_cdf,
        hop2_cdf,
        outage: compose_outage(hop1_cdf, hop2_cdf),
        success: c.relay.survival() * c.access.survival(),
        boundary: c.relay.is_saturated() || c.access.is_saturated(),
    })
}

/// End-to-end outage probability of `user` at transmit SNR `rho`.
pub fn outage_probability(config: &SystemConfig, user: usize, rho: f64) -> Result<f64> {
    Ok(outage_breakdown(config, user, rho)?.outage)
}

/// Largest SIC residue keeping the two-user weak layer decodable:
/// `(weak - phi^2) / (strong * psi_weak)`, floored at zero.
pub fn max_tolerable_sic(strong_share: f64, weak_share: f64, phi: f64, psi_weak: f64) -> f64 {
    ((weak_share - phi * phi) / (strong_share * psi_weak)).max(0.0)
}

/// Branch terms of the first-hop CDF (Delta, Upsilon).
pub fn relay_terms(config: &SystemConfig, j: usize, rho: f64, psi: f64) -> Result<BranchTerms> {
    Ok(relay_cdf_evaluation(config, j, rho, psi)?.terms())
}

/// Branch terms of the second-hop CDF (Theta, Phi).
pub fn user_terms(config: &SystemConfig, b: usize, j: usize, rho: f64, psi: f64) -> Result<BranchTerms> {
    Ok(user_cdf_evaluation(config, b, j, rho, psi)?.terms())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{db_to_linear, two_user_reference};

    #[test]
    fn zero_threshold_is_zero() {
        let cfg = two_user_reference();
        assert_eq!(cdf_relay(&cfg, 1, 100.0, 0.0).unwrap(), 0.0);
        assert_eq!(cdf_user(&cfg, 2, 1, 100.0, 0.0).unwrap(), 0.0);
        assert_eq!(cdf_relay_last(&cfg, 100.0, 0.0).unwrap(), 0.0);
        assert_eq!(cdf_user_last(&cfg, 100.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn ceiling_saturates() {
        let cfg = two_user_reference();
        // alpha_1 / A = 4
        assert_eq!(cdf_relay(&cfg, 1, 100.0, 4.0).unwrap(), 1.0);
        assert_eq!(cdf_relay(&cfg, 1, 100.0, 4.0 - 1e-13).unwrap(), 1.0);
        assert!(cdf_relay(&cfg, 1, 100.0, 3.99).unwrap() < 1.0);
        assert_eq!(cdf_user(&cfg, 1, 1, 100.0, 9.0).unwrap(), 1.0);

        let mut cfg = two_user_reference();
        cfg.set_sic_residue(0.05);
        assert_eq!(cdf_relay_last(&cfg, 1e6, 7.0).unwrap(), 1.0);
        assert_eq!(cdf_user_last(&cfg, 1e6, 7.0).unwrap(), 1.0);
        assert_eq!(outage_probability(&cfg, 2, 1e6).unwrap(), 1.0);
        assert!(outage_breakdown(&cfg, 2, 1e6).unwrap().boundary);
    }

    #[test]
    fn no_itc_single_exponential() {
        // Ideal, no primary: F = 1 - exp(-psi d^tau sigma^2 / (P margin)).
        let cfg = two_user_reference();
        let f = cdf_relay(&cfg, 1, 100.0, 3.0).unwrap();
        let want = 1.0 - (-3.0f64 / (100.0 * 0.2)).exp();
        assert!((f - want).abs() < 1e-15);
        let terms = relay_terms(&cfg, 1, 100.0, 3.0).unwrap();
        assert_eq!(terms.capped, 0.0);
        assert!((terms.peak - f).abs() < 1e-15);
    }

    #[test]
    fn zero_itc_forces_outage() {
        let mut cfg = two_user_reference();
        cfg.i_itc = 0.0;
        assert_eq!(cdf_relay(&cfg, 1, 100.0, 3.0).unwrap(), 1.0);
    }

    #[test]
    fn tiny_itc_moves_mass_to_capped_branch() {
        let mut cfg = two_user_reference();
        cfg.i_itc = 1e-12;
        cfg.p_t = 10.0;
        let t = relay_terms(&cfg, 1, 100.0, 3.0).unwrap();
        assert!(t.peak < 1e-12);
        assert!(t.capped > 0.999);
    }

    #[test]
    fn composition_identities() {
        assert_eq!(compose_outage(0.0, 0.0), 0.0);
        assert_eq!(compose_outage(1.0, 0.37), 1.0);
        assert_eq!(compose_outage(0.37, 1.0), 1.0);
        for &(a, b) in &[(0.1, 0.2), (0.999, 0.5), (1e-9, 0.3)] {
            let o = compose_outage(a, b);
            assert!((o - (1.0 - (1.0 - a) * (1.0 - b))).abs() <= 1e-15);
            assert!(o >= a.max(b) && o <= 1.0);
        }
    }

    #[test]
    fn reference_outage_hand_value() {
        // U1, 20 dB, P_T = 10 dB, no ITC: both hops share
        // F = 1 - e^(-0.15) / (1 + 0.15 * 10/27).
        let mut cfg = two_user_reference();
        cfg.p_t = db_to_linear(10.0);
        let f = 1.0 - (-0.15f64).exp() / (1.0 + 0.15 * cfg.p_t / 27.0);
        let op = outage_probability(&cfg, 1, 100.0).unwrap();
        assert!((op - (1.0 - (1.0 - f) * (1.0 - f))).abs() < 1e-14);
    }

    #[test]
    fn tolerable_sic_examples() {
        assert!((max_tolerable_sic(0.8, 0.2, 0.0, 7.0) - 0.2 / 5.6).abs() < 1e-15);
        assert!((max_tolerable_sic(0.8, 0.2, 0.0, 7.0) - 0.0357).abs() < 1e-4);
        assert_eq!(max_tolerable_sic(0.8, 0.2, 0.5, 7.0), 0.0);
        assert!((max_tolerable_sic(0.8, 0.2, 0.1, 7.0) - 0.19 / 5.6).abs() < 1e-15);
    }

    #[test]
    fn rearranged_form_equals_branch_sum() {
        let mut cfg = two_user_reference();
        cfg.p_t = 10.0;
        cfg.i_itc = 100.0;
        cfg.csi_theta = 0.01;
        cfg.set_hardware_impairment(0.1);
        cfg.set_sic_residue(0.01);
        for rho in [10.0, 300.0, 3000.0, 1e5] {
            for j in 1..=2 {
                let psi = sidnr::user_threshold(&cfg, j).unwrap();
                let ev = relay_cdf_evaluation(&cfg, j, rho, psi).unwrap();
                assert!((ev.terms().total() - ev.cdf()).abs() < 1e-12);
                let ev = user_cdf_evaluation(&cfg, j, j, rho, psi).unwrap();
                assert!((ev.terms().total() - ev.cdf()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn saturated_hop_splits_by_cap() {
        let mut cfg = two_user_reference();
        cfg.i_itc = 100.0;
        // d_SD^3 = 27: cap binds with probability e^(-27)
        let t = relay_terms(&cfg, 1, 100.0, 5.0).unwrap();
        assert_eq!(t.total(), 1.0);
        assert!((t.capped - (-27.0f64).exp()).abs() < 1e-25);
    }

    #[test]
    fn survival_resolves_deep_outage() {
        let cfg = two_user_reference();
        let b = outage_breakdown(&cfg, 2, 1.0).unwrap();
        assert_eq!(b.outage, 1.0);
        assert!(b.success > 0.0 && b.success < 1e-20);
        let b = outage_breakdown(&cfg, 1, 1000.0).unwrap();
        assert!((b.success - (1.0 - b.outage)).abs() < 1e-14);
    }

    #[test]
    fn capped_branch_continuous_in_primary_power() {
        let mut cfg = two_user_reference();
        cfg.i_itc = 100.0;
        let rho = 1e4;
        cfg.p_t = 0.0;
        let f0 = cdf_relay(&cfg, 1, rho, 3.0).unwrap();
        cfg.p_t = 1e-9;
        let f1 = cdf_relay(&cfg, 1, rho, 3.0).unwrap();
        assert!((f0 - f1).abs() < 1e-8, "{f0} {f1}");
    }
}
