//! Generalized exponential integrals `E_n(s) = ∫_1^∞ e^{-st} t^{-n} dt`.
//!
//! Every integral of the density family reduces to one of these after the
//! substitution `u = log x`. Small arguments use the power series, larger ones
//! the modified-Lentz continued fraction.

use serde::Serialize;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_EPS: f64 = 1e-16;
const FRACTION_EPS: f64 = f64::EPSILON;
const MAX_ITER: usize = 500;
const SERIES_CUTOVER: f64 = 1.0;

/// `E_n(s)` together with the arguments that produced it. A divergent value
/// (only `n = 1, s = 0`) is stored as `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpIntegralValue {
    pub order: u32,
    pub arg: f64,
    pub value: f64,
}

impl ExpIntegralValue {
    pub fn is_divergent(&self) -> bool {
        self.value.is_infinite()
    }
}

/// Evaluates `E_n(s)` to about 1e-14 relative accuracy.
pub fn exp_integral(order: u32, s: f64) -> Result<ExpIntegralValue> {
    check_args(order, s)?;
    Ok(ExpIntegralValue {
        order,
        arg: s,
        value: en(order, s),
    })
}

/// `ln E_n(s)`, finite even where `E_n(s)` itself underflows.
pub fn ln_exp_integral(order: u32, s: f64) -> Result<f64> {
    check_args(order, s)?;
    Ok(ln_en(order, s))
}

/// Plain `E_n(s)` for internal callers whose arguments are already checked.
pub(crate) fn en(order: u32, s: f64) -> f64 {
    debug_assert!(order >= 1 && s >= 0.0);
    if s == 0.0 {
        zero_arg(order)
    } else if s > SERIES_CUTOVER {
        continued_fraction(order, s) * (-s).exp()
    } else {
        series(order, s)
    }
}

pub(crate) fn ln_en(order: u32, s: f64) -> f64 {
    if s == 0.0 {
        zero_arg(order).ln()
    } else if s > SERIES_CUTOVER {
        continued_fraction(order, s).ln() - s
    } else {
        series(order, s).ln()
    }
}

/// `e^s E_n(s)`; stays O(1/s) where both factors would over- or underflow.
pub(crate) fn en_scaled(order: u32, s: f64) -> f64 {
    if s > SERIES_CUTOVER {
        continued_fraction(order, s)
    } else {
        en(order, s) * s.exp()
    }
}

fn check_args(order: u32, s: f64) -> Result<()> {
    if order < 1 {
        return Err(Error::domain(
            "order",
            order as f64,
            "exponential integral order must be >= 1",
        ));
    }
    if !(s >= 0.0) || s.is_infinite() {
        return Err(Error::domain("s", s, "argument must be finite and >= 0"));
    }
    Ok(())
}

fn zero_arg(order: u32) -> f64 {
    if order == 1 {
        f64::INFINITY
    } else {
        1.0 / (order - 1) as f64
    }
}

/// `e^s E_n(s)` by the continued fraction, valid for `s > 1`.
fn continued_fraction(order: u32, s: f64) -> f64 {
    let nm1 = (order - 1) as f64;
    let tiny = 1e-300;
    let mut b = s + order as f64;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let i = i as f64;
        let an = -i * (nm1 + i);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() <= FRACTION_EPS {
            break;
        }
    }
    h
}

fn series(order: u32, s: f64) -> f64 {
    let nm1 = (order - 1) as i64;
    let mut sum = if nm1 != 0 {
        1.0 / nm1 as f64
    } else {
        -s.ln() - EULER_GAMMA
    };
    let mut fact = 1.0;
    for i in 1..=MAX_ITER as i64 {
        fact *= -s / i as f64;
        let term = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let digamma = -EULER_GAMMA + (1..=nm1).map(|k| 1.0 / k as f64).sum::<f64>();
            fact * (-s.ln() + digamma)
        };
        sum += term;
        if term.abs() < sum.abs() * SERIES_EPS {
            break;
        }
    }
    sum
}
