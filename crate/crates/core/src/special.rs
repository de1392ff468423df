//! Exponential integral for negative arguments.
//!
//! `Ei(-a) = -E1(a)` for `a > 0`. Small arguments use the convergent series
//! `E1(a) = -gamma - ln a - sum (-a)^k / (k k!)`; for `a > 1` the series
//! cancels badly, so the continued fraction of `e^a E1(a)` is evaluated with
//! the modified Lentz method instead.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 1.0;
const MAX_ITER: usize = 500;

fn e1_series(a: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        term *= -a / kf;
        let add = term / kf;
        sum += add;
        if add.abs() < sum.abs() * f64::EPSILON {
            break;
        }
    }
    -EULER_GAMMA - a.ln() - sum
}

/// `e^a E1(a)` for `a > 0` by continued fraction (modified Lentz).
fn scaled_e1_continued_fraction(a: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = a + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    h
}

/// `E1(a)` for `a > 0`.
fn e1(a: f64) -> f64 {
    if a <= SERIES_LIMIT {
        e1_series(a)
    } else {
        scaled_e1_continued_fraction(a) * (-a).exp()
    }
}

/// Exponential integral `Ei(x)` for `x < 0`.
///
/// Underflows to `-0.0` below roughly `x = -700`; use [`scaled_ei`] for
/// products of the form `e^a Ei(-a)`.
pub fn expint_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::EiDomain(x));
    }
    Ok(-e1(-x))
}

/// `e^a Ei(-a)` for `a > 0`, without forming `e^a` for large `a`.
pub fn scaled_ei(a: f64) -> f64 {
    debug_assert!(a > 0.0);
    if a <= SERIES_LIMIT {
        -a.exp() * e1_series(a)
    } else {
        -scaled_e1_continued_fraction(a)
    }
}
