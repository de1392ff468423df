//! System parameterization of the two-hop underlay network.
//!
//! All powers, noise variances and the interference temperature constraint
//! are stored linear. The file format accepts `_db` variants of the power
//! fields and converts them on load; writing always emits linear values so a
//! config survives a save/load cycle bit for bit.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the power-allocation sums.
pub const PA_SUM_TOLERANCE: f64 = 1e-9;

/// Multiple access scheme evaluated for every user.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessMode {
    #[default]
    Noma,
    /// Time-division baseline: 2B slots, full power per user.
    Oma,
}

impl fmt::Display for AccessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AccessMode::Noma => f.write_str("noma"),
            AccessMode::Oma => f.write_str("oma"),
        }
    }
}

/// Complete network parameterization.
///
/// User indices are 1-based throughout the crate: `alpha[0]` belongs to U1,
/// the strongest-allocated user. `sic_residue[k]` is the residue fraction left
/// after cancelling layer `k + 1`, so it has `num_users - 1` entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfig")]
pub struct SystemConfig {
    pub num_users: usize,
    /// Source power-allocation factors, descending, summing to one.
    pub alpha: Vec<f64>,
    /// Relay power-allocation factors, descending, summing to one.
    pub beta: Vec<f64>,
    pub sic_residue: Vec<f64>,
    /// Aggregate hardware-impairment level of the S->R link.
    pub hi_source: f64,
    /// Aggregate hardware-impairment level of each R->U_b link.
    pub hi_user: Vec<f64>,
    /// Aggregate hardware-impairment level of the primary transmitter links.
    pub hi_primary: f64,
    /// Channel-estimation error scale; zero means perfect CSI.
    pub csi_theta: f64,
    pub csi_kappa: f64,
    pub pbar_s: f64,
    pub pbar_r: f64,
    /// Primary transmit power; zero disables primary interference.
    pub p_t: f64,
    /// Interference temperature constraint at the primary receiver (may be infinite).
    pub i_itc: f64,
    pub noise_r: f64,
    pub noise_user: Vec<f64>,
    pub d_sr: f64,
    pub d_sd: f64,
    pub d_rd: f64,
    pub d_tr: f64,
    pub d_ru: Vec<f64>,
    pub d_tu: Vec<f64>,
    pub pathloss: f64,
    /// Target rates in bits/s/Hz over the two slots.
    pub rate_thresholds: Vec<f64>,
    pub mode: AccessMode,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.violations.iter().any(|v| v.field == field)
    }

    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.field, v.message)?;
        }
        Ok(())
    }
}

/// Checks every invariant of a [`SystemConfig`], collecting all failures.
pub fn validate(config: &SystemConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let b = config.num_users;
    if b < 2 {
        report.push("num_users", format!("need at least 2 users, got {b}"));
    }

    let per_user: [(&str, usize); 7] = [
        ("alpha", config.alpha.len()),
        ("beta", config.beta.len()),
        ("hi_user", config.hi_user.len()),
        ("noise_user", config.noise_user.len()),
        ("d_ru", config.d_ru.len()),
        ("d_tu", config.d_tu.len()),
        ("rate_thresholds", config.rate_thresholds.len()),
    ];
    for (field, len) in per_user {
        if len != b {
            report.push(field, format!("expected {b} entries, got {len}"));
        }
    }
    if config.sic_residue.len() + 1 != b {
        report.push(
            "sic_residue",
            format!(
                "expected {} entries, got {}",
                b.saturating_sub(1),
                config.sic_residue.len()
            ),
        );
    }

    for (field, pa) in [("alpha", &config.alpha), ("beta", &config.beta)] {
        if pa.is_empty() {
            continue;
        }
        let sum: f64 = pa.iter().sum();
        if (sum - 1.0).abs() > PA_SUM_TOLERANCE {
            report.push(field, format!("factors sum to {sum}, expected 1"));
        }
        if pa.windows(2).any(|w| !(w[0] > w[1])) {
            report.push(field, "factors must be strictly decreasing");
        }
        if pa.iter().any(|&a| !(a > 0.0)) {
            report.push(field, "factors must be positive");
        }
    }

    for (i, &e) in config.sic_residue.iter().enumerate() {
        if !(0.0..=1.0).contains(&e) {
            report.push(format!("sic_residue[{i}]"), format!("{e} outside [0, 1]"));
        }
    }

    let mut nonneg = |field: String, v: f64| {
        if !(v >= 0.0) {
            report.push(field, format!("must be nonnegative, got {v}"));
        }
    };
    nonneg("hi_source".into(), config.hi_source);
    nonneg("hi_primary".into(), config.hi_primary);
    for (i, &v) in config.hi_user.iter().enumerate() {
        nonneg(format!("hi_user[{i}]"), v);
    }
    nonneg("csi_theta".into(), config.csi_theta);
    nonneg("csi_kappa".into(), config.csi_kappa);
    nonneg("pbar_s".into(), config.pbar_s);
    nonneg("pbar_r".into(), config.pbar_r);
    nonneg("p_t".into(), config.p_t);
    nonneg("i_itc".into(), config.i_itc);
    nonneg("noise_r".into(), config.noise_r);
    for (i, &v) in config.noise_user.iter().enumerate() {
        nonneg(format!("noise_user[{i}]"), v);
    }
    for (i, &v) in config.rate_thresholds.iter().enumerate() {
        nonneg(format!("rate_thresholds[{i}]"), v);
    }

    let mut positive = |field: String, v: f64| {
        if !(v > 0.0 && v.is_finite()) {
            report.push(field, format!("must be positive and finite, got {v}"));
        }
    };
    positive("d_sr".into(), config.d_sr);
    positive("d_sd".into(), config.d_sd);
    positive("d_rd".into(), config.d_rd);
    positive("d_tr".into(), config.d_tr);
    for (i, &v) in config.d_ru.iter().enumerate() {
        positive(format!("d_ru[{i}]"), v);
    }
    for (i, &v) in config.d_tu.iter().enumerate() {
        positive(format!("d_tu[{i}]"), v);
    }

    if !(config.pathloss >= 2.0) || !config.pathloss.is_finite() {
        report.push("pathloss", format!("exponent must be >= 2, got {}", config.pathloss));
    }
    for (field, v) in [("pbar_s", config.pbar_s), ("pbar_r", config.pbar_r), ("p_t", config.p_t)] {
        if v.is_infinite() {
            report.push(field, "must be finite");
        }
    }
    report
}

/// MMSE channel-estimation error variance `theta * rho^(-kappa)`.
pub fn effective_error_variance(theta: f64, kappa: f64, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::NonPositive { name: "rho", value: rho });
    }
    Ok(theta * rho.powf(-kappa))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

impl SystemConfig {
    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn validated(self) -> Result<Self> {
        let report = validate(&self);
        if report.is_ok() {
            Ok(self)
        } else {
            Err(Error::InvalidConfig(report))
        }
    }

    /// Transmit SNR `P / sigma^2` of the source, referenced to the relay noise.
    pub fn transmit_snr(&self) -> f64 {
        self.pbar_s / self.noise_r
    }

    /// Copy with `pbar_s = pbar_r = rho * noise_r`.
    pub fn at_snr(&self, rho: f64) -> SystemConfig {
        let mut c = self.clone();
        c.pbar_s = rho * self.noise_r;
        c.pbar_r = rho * self.noise_r;
        c
    }

    /// Estimation error variance at transmit SNR `rho` (zero for perfect CSI).
    pub fn csi_error_variance(&self, rho: f64) -> f64 {
        if self.csi_theta == 0.0 {
            return 0.0;
        }
        effective_error_variance(self.csi_theta, self.csi_kappa, rho).unwrap_or(f64::INFINITY)
    }

    /// Sets every hardware-impairment level to `phi`.
    pub fn set_hardware_impairment(&mut self, phi: f64) {
        self.hi_source = phi;
        self.hi_primary = phi;
        self.hi_user.iter_mut().for_each(|h| *h = phi);
    }

    /// Sets the SIC residue of every cancelled layer to `epsilon`.
    pub fn set_sic_residue(&mut self, epsilon: f64) {
        self.sic_residue.iter_mut().for_each(|e| *e = epsilon);
    }

    pub fn check_user(&self, user: usize) -> Result<()> {
        if user == 0 || user > self.num_users {
            return Err(Error::UserOutOfRange {
                index: user,
                num_users: self.num_users,
            });
        }
        Ok(())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SystemConfig =
            toml::from_str(text).map_err(|e| Error::ConfigSyntax(e.to_string()))?;
        config.validated()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }
}

/// On-disk form: optional fields with defaults and `_db` alternatives.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    num_users: usize,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    sic_residue: Option<Vec<f64>>,
    #[serde(default)]
    hi_source: f64,
    hi_user: Option<Vec<f64>>,
    #[serde(default)]
    hi_primary: f64,
    #[serde(default)]
    csi_theta: f64,
    #[serde(default)]
    csi_kappa: f64,
    pbar_s: Option<f64>,
    pbar_s_db: Option<f64>,
    pbar_r: Option<f64>,
    pbar_r_db: Option<f64>,
    p_t: Option<f64>,
    p_t_db: Option<f64>,
    i_itc: Option<f64>,
    i_itc_db: Option<f64>,
    noise_r: Option<f64>,
    noise_user: Option<Vec<f64>>,
    d_sr: f64,
    d_sd: f64,
    d_rd: f64,
    d_tr: f64,
    d_ru: Vec<f64>,
    d_tu: Vec<f64>,
    pathloss: f64,
    rate_thresholds: Vec<f64>,
    #[serde(default)]
    mode: AccessMode,
}

fn pick(
    name: &str,
    linear: Option<f64>,
    db: Option<f64>,
    default: Option<f64>,
) -> std::result::Result<f64, String> {
    match (linear, db) {
        (Some(_), Some(_)) => Err(format!("both `{name}` and `{name}_db` given")),
        (Some(v), None) => Ok(v),
        (None, Some(d)) => Ok(db_to_linear(d)),
        (None, None) => default.ok_or_else(|| format!("missing `{name}` (or `{name}_db`)")),
    }
}

impl TryFrom<RawConfig> for SystemConfig {
    type Error = String;

    fn try_from(raw: RawConfig) -> std::result::Result<Self, String> {
        let b = raw.num_users;
        let pbar_s = pick("pbar_s", raw.pbar_s, raw.pbar_s_db, None)?;
        let pbar_r = pick("pbar_r", raw.pbar_r, raw.pbar_r_db, Some(pbar_s))?;
        Ok(SystemConfig {
            num_users: b,
            alpha: raw.alpha,
            beta: raw.beta,
            sic_residue: raw.sic_residue.unwrap_or_else(|| vec![0.0; b.saturating_sub(1)]),
            hi_source: raw.hi_source,
            hi_user: raw.hi_user.unwrap_or_else(|| vec![0.0; b]),
            hi_primary: raw.hi_primary,
            csi_theta: raw.csi_theta,
            csi_kappa: raw.csi_kappa,
            pbar_s,
            pbar_r,
            p_t: pick("p_t", raw.p_t, raw.p_t_db, Some(0.0))?,
            i_itc: pick("i_itc", raw.i_itc, raw.i_itc_db, Some(f64::INFINITY))?,
            noise_r: raw.noise_r.unwrap_or(1.0),
            noise_user: raw.noise_user.unwrap_or_else(|| vec![1.0; b]),
            d_sr: raw.d_sr,
            d_sd: raw.d_sd,
            d_rd: raw.d_rd,
            d_tr: raw.d_tr,
            d_ru: raw.d_ru,
            d_tu: raw.d_tu,
            pathloss: raw.pathloss,
            rate_thresholds: raw.rate_thresholds,
            mode: raw.mode,
        })
    }
}

/// A named, validated configuration shipped with the crate.
#[derive(Clone, Debug)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: SystemConfig,
}

/// Two-user reference network: S-R and R-U links at unit distance, every
/// link touching the primary pair at three units, path-loss exponent 3.
/// Ideal hardware, perfect SIC and CSI, no primary interference, no ITC,
/// 20 dB transmit SNR.
pub fn two_user_reference() -> SystemConfig {
    SystemConfig {
        num_users: 2,
        alpha: vec![0.8, 0.2],
        beta: vec![0.8, 0.2],
        sic_residue: vec![0.0],
        hi_source: 0.0,
        hi_user: vec![0.0, 0.0],
        hi_primary: 0.0,
        csi_theta: 0.0,
        csi_kappa: 0.0,
        pbar_s: 100.0,
        pbar_r: 100.0,
        p_t: 0.0,
        i_itc: f64::INFINITY,
        noise_r: 1.0,
        noise_user: vec![1.0, 1.0],
        d_sr: 1.0,
        d_sd: 3.0,
        d_rd: 3.0,
        d_tr: 3.0,
        d_ru: vec![1.0, 1.0],
        d_tu: vec![3.0, 3.0],
        pathloss: 3.0,
        rate_thresholds: vec![1.0, 1.5],
        mode: AccessMode::Noma,
    }
}

pub fn presets() -> Vec<ScenarioPreset> {
    let noma = two_user_reference();
    let oma = SystemConfig {
        mode: AccessMode::Oma,
        ..noma.clone()
    };
    vec![
        ScenarioPreset {
            name: "baseline",
            description: "two-user reference network (alpha = beta = [0.8, 0.2], rates 1 and 1.5 bit/s/Hz, tau = 3)",
            config: noma,
        },
        ScenarioPreset {
            name: "baseline-oma",
            description: "reference network under the time-division baseline (2B slots, full power)",
            config: oma,
        },
    ]
}

pub fn preset(name: &str) -> Result<ScenarioPreset> {
    presets()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_owned()))
}
