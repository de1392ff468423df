//! Independent numerical oracles for the closed forms: adaptive
//! Gauss-Kronrod quadrature, the exponential integral by quadrature, and hop
//! CDFs by nested integration over the three fading gains.
#![allow(dead_code)]

use crnoma_core::config::{two_user_reference, AccessMode, SystemConfig};
use proptest::prelude::*;

// 7-point Gauss / 15-point Kronrod nodes on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive G7-K15 on `[a, b]` to `max(abs_tol, rel_tol |I|)`.
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (est, err) = gk15(f, a, b);
    let mut intervals = vec![(a, b, est, err)];
    for _ in 0..2000 {
        let total: f64 = intervals.iter().map(|i| i.2).sum();
        let total_err: f64 = intervals.iter().map(|i| i.3).sum();
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (e1, r1) = gk15(f, lo, mid);
        let (e2, r2) = gk15(f, mid, hi);
        intervals.push((lo, mid, e1, r1));
        intervals.push((mid, hi, e2, r2));
    }
    intervals.iter().map(|i| i.2).sum()
}

/// `int_a^inf f` via `x = a + t / (1 - t)`.
pub fn integrate_to_inf(f: &mut dyn FnMut(f64) -> f64, a: f64, abs_tol: f64, rel_tol: f64) -> f64 {
    let mut g = |t: f64| {
        let s = 1.0 - t;
        let v = f(a + t / s);
        if v == 0.0 {
            0.0
        } else {
            v / (s * s)
        }
    };
    integrate(&mut g, 0.0, 1.0, abs_tol, rel_tol)
}

/// `Ei(-a) = -E1(a)`, `E1(a) = int_0^inf exp(-a e^u) du`.
pub fn ei_by_quadrature(x: f64) -> f64 {
    assert!(x < 0.0);
    let a = -x;
    // beyond a e^u = a + 60 the remaining mass is below e^-60 relative
    let upper = ((a + 60.0) / a).ln();
    let mut f = |u: f64| (-a * u.exp()).exp();
    -integrate(&mut f, 0.0, upper, 0.0, 1e-14)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Link {
    /// Relay decoding layer `j`.
    Relay { j: usize },
    /// User `b` decoding layer `j`.
    User { b: usize, j: usize },
}

/// SIDNR written directly from the network description: wanted layer power
/// over weaker layers, cancellation leakage, distortion, estimation error,
/// primary interference and noise.
pub fn oracle_sidnr(c: &SystemConfig, link: Link, zeta: f64, power: f64, gain: f64, int_gain: f64) -> f64 {
    let tau = c.pathloss;
    let oma = c.mode == AccessMode::Oma;
    let (shares, j, phi, d_hop, d_int, noise) = match link {
        Link::Relay { j } => (&c.alpha, j, c.hi_source, c.d_sr, c.d_tr, c.noise_r),
        Link::User { b, j } => (&c.beta, j, c.hi_user[b - 1], c.d_ru[b - 1], c.d_tu[b - 1], c.noise_user[b - 1]),
    };
    let wanted = if oma { 1.0 } else { shares[j - 1] };
    let mut weaker = 0.0;
    let mut leak = 0.0;
    if !oma {
        for (i, &s) in shares.iter().enumerate() {
            if i + 1 > j {
                weaker += s;
            } else if i + 1 < j {
                leak += c.sic_residue[i] * s;
            }
        }
    }
    let signal = power * gain;
    let distortion = phi * phi * signal;
    let estimation = zeta * power * (1.0 + phi * phi);
    let primary = c.p_t * int_gain * (1.0 + c.hi_primary * c.hi_primary) * (d_hop / d_int).powf(tau);
    let noise = d_hop.powf(tau) * noise;
    wanted * signal / ((weaker + leak) * signal + distortion + estimation + primary + noise)
}

fn power_for(c: &SystemConfig, link: Link, cap_gain: f64) -> f64 {
    let (pbar, d) = match link {
        Link::Relay { .. } => (c.pbar_s, c.d_sd),
        Link::User { .. } => (c.pbar_r, c.d_rd),
    };
    if c.i_itc.is_infinite() {
        pbar
    } else {
        pbar.min(c.i_itc * d.powf(c.pathloss) / cap_gain)
    }
}

/// Largest desired gain still in outage, by bisection on [`oracle_sidnr`].
fn outage_gain(c: &SystemConfig, link: Link, zeta: f64, power: f64, z: f64, psi: f64, rate: f64) -> f64 {
    let g = |x: f64| oracle_sidnr(c, link, zeta, power, x, z);
    let limit = 80.0 / rate;
    if g(limit) < psi {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0.0, limit);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < psi {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Hop CDF at `psi` split into (cap slack, cap binding) by nested quadrature
/// over the cap gain y, the primary gain z and the desired gain x.
pub fn oracle_cdf_terms(config: &SystemConfig, link: Link, rho: f64, psi: f64) -> (f64, f64) {
    let c = config.at_snr(rho);
    let zeta = if c.csi_theta == 0.0 { 0.0 } else { c.csi_theta * rho.powf(-c.csi_kappa) };
    let rate = 1.0 / (1.0 - zeta).max(1e-6);
    let tol = 1e-11;

    let over_x = |power: f64, z: f64| {
        let xs = outage_gain(&c, link, zeta, power, z, psi, rate);
        if xs.is_infinite() {
            return 1.0;
        }
        let mut f = |x: f64| rate * (-rate * x).exp();
        integrate(&mut f, 0.0, xs, tol * 1e-2, 1e-12)
    };
    let over_z = |power: f64| {
        if c.p_t == 0.0 {
            return over_x(power, 0.0);
        }
        let mut f = |z: f64| (-z).exp() * over_x(power, z);
        integrate_to_inf(&mut f, 0.0, tol * 1e-1, 1e-12)
    };

    let pbar = match link {
        Link::Relay { .. } => c.pbar_s,
        Link::User { .. } => c.pbar_r,
    };
    if c.i_itc.is_infinite() {
        return (over_z(pbar), 0.0);
    }
    let d = match link {
        Link::Relay { .. } => c.d_sd,
        Link::User { .. } => c.d_rd,
    };
    let y0 = c.i_itc * d.powf(c.pathloss) / pbar;
    let slack = (1.0 - (-y0).exp()) * over_z(pbar);
    let mut f = |y: f64| (-y).exp() * over_z(power_for(&c, link, y));
    let binding = integrate_to_inf(&mut f, y0, tol, 1e-12);
    (slack, binding)
}

pub fn oracle_cdf(config: &SystemConfig, link: Link, rho: f64, psi: f64) -> f64 {
    let (a, b) = oracle_cdf_terms(config, link, rho, psi);
    a + b
}

/// Strictly decreasing power-allocation vector summing to one.
fn allocation(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|mut w| {
        w.sort_by(|a, b| b.total_cmp(a));
        for i in 1..w.len() {
            if w[i] >= w[i - 1] * 0.95 {
                w[i] = w[i - 1] * 0.6;
            }
        }
        let s: f64 = w.iter().sum();
        w.iter().map(|v| v / s).collect()
    })
}

fn db(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_map(|d| 10f64.powf(d / 10.0))
}

/// Valid configurations over the whole parameter space the model admits.
pub fn any_config() -> impl Strategy<Value = SystemConfig> {
    (2usize..=3).prop_flat_map(|n| {
        let impair = (
            allocation(n),
            allocation(n),
            prop::collection::vec(0.0f64..0.05, n - 1),
            0.0f64..0.2,
            prop::collection::vec(0.0f64..0.2, n),
            0.0f64..0.2,
            prop_oneof![Just(0.0), 0.0f64..0.2, 1.0f64..20.0],
            0.0f64..2.0,
        );
        let power = (
            db(0.0, 40.0),
            prop_oneof![Just(0.0), db(0.0, 30.0)],
            prop_oneof![Just(f64::INFINITY), db(0.0, 30.0)],
        );
        let geometry = (
            prop::collection::vec(0.5f64..3.0, 4),
            prop::collection::vec(0.5f64..3.0, n),
            prop::collection::vec(0.5f64..5.0, n),
            2.0f64..4.0,
            prop::collection::vec(0.1f64..1.5, n),
            prop::bool::ANY,
        );
        (impair, power, geometry).prop_map(move |(i, p, g)| {
            let mut c = two_user_reference();
            c.num_users = n;
            (c.alpha, c.beta, c.sic_residue) = (i.0, i.1, i.2);
            (c.hi_source, c.hi_user, c.hi_primary) = (i.3, i.4, i.5);
            (c.csi_theta, c.csi_kappa) = (i.6, i.7);
            c.pbar_s = p.0;
            c.pbar_r = p.0;
            (c.p_t, c.i_itc) = (p.1, p.2);
            (c.d_sr, c.d_sd, c.d_rd, c.d_tr) = (g.0[0], g.0[1] + 0.5, g.0[2] + 0.5, g.0[3] + 0.5);
            (c.d_ru, c.d_tu, c.pathloss) = (g.1, g.2, g.3);
            c.rate_thresholds = g.4;
            c.noise_user = vec![1.0; n];
            c.mode = if g.5 { AccessMode::Noma } else { AccessMode::Oma };
            assert!(c.validate().is_ok(), "{}", c.validate());
            c
        })
    })
}
