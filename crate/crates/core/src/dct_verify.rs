//! Numerical checks of the dominating bound used to differentiate `1/a_θ`
//! under the integral sign at θ = 1:
//!
//! ```text
//! |(1 - x^h) / (h x^h)| ≤ e log x      for h > 0, x ≥ e,
//! lim_{h→0⁺} ∫_e^∞ (1 - x^h)/(h x^h) dx/(x log³ x) = -1.
//! ```

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_to_infinity, Tolerance};

/// The `h` values of the verification grid.
pub const GRID_H: [f64; 9] = [1e-8, 1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0];

/// `log x` for each `x` of the verification grid
/// (`e, e^1.01, e², e⁴, e¹⁰, 10⁶`).
pub const GRID_LOG_X: [f64; 6] = [1.0, 1.01, 2.0, 4.0, 10.0, 13.815_510_557_964_274];

/// Default `h` ladder for the limit integral.
pub const LIMIT_LADDER: [f64; 9] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominationCheck {
    pub h: f64,
    pub x: f64,
    pub ratio: f64,
    pub bound: f64,
    pub ok: bool,
}

/// `(1 - x^h)/(h x^h) = (e^{-h log x} - 1)/h`, formed without `x^h`.
pub fn difference_ratio(h: f64, log_x: f64) -> f64 {
    (-h * log_x).exp_m1() / h
}

pub fn domination_holds(h: f64, x: f64) -> Result<DominationCheck> {
    if !(x >= std::f64::consts::E) || x.is_infinite() {
        return Err(Error::domain("x", x, "must be finite and >= e"));
    }
    domination_holds_log(h, x.ln()).map(|c| DominationCheck { x, ..c })
}

/// Same as [`domination_holds`] with `x` given through `log x`, so grid points
/// like `x = e^1.01` carry no rounding from exponentiation.
pub fn domination_holds_log(h: f64, log_x: f64) -> Result<DominationCheck> {
    if !(h > 0.0) || h.is_infinite() {
        return Err(Error::domain("h", h, "must be finite and > 0"));
    }
    if !(log_x >= 1.0) || log_x.is_infinite() {
        return Err(Error::domain("log x", log_x, "x must be finite and >= e"));
    }
    let ratio = difference_ratio(h, log_x);
    let bound = std::f64::consts::E * log_x;
    Ok(DominationCheck {
        h,
        x: log_x.exp(),
        ratio,
        bound,
        ok: ratio.abs() <= bound,
    })
}

/// Every `(h, x)` pair of the fixed verification grid.
pub fn domination_grid() -> Vec<DominationCheck> {
    GRID_H
        .iter()
        .flat_map(|&h| {
            GRID_LOG_X
                .iter()
                .map(move |&lx| domination_holds_log(h, lx).expect("grid points are valid"))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub x: f64,
    pub limit: f64,
    pub ratios: Vec<f64>,
    pub deviations: Vec<f64>,
    /// Largest deviation over the last three points (or all, if fewer).
    pub tail_max_deviation: f64,
    /// Deviations shrink strictly over the last three points.
    pub shrinking: bool,
}

/// Tracks the difference ratio along a decreasing `h` sequence against its
/// limit `-log x`.
pub fn limit_check(x: f64, h_sequence: &[f64]) -> Result<LimitReport> {
    if !(x >= std::f64::consts::E) || x.is_infinite() {
        return Err(Error::domain("x", x, "must be finite and >= e"));
    }
    if h_sequence.is_empty() {
        return Err(Error::domain("h_sequence", 0.0, "needs at least one step"));
    }
    if let Some(&bad) = h_sequence.iter().find(|&&h| !(h > 0.0)) {
        return Err(Error::domain("h", bad, "steps must be positive"));
    }
    if h_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::domain(
            "h_sequence",
            h_sequence[0],
            "steps must strictly decrease",
        ));
    }
    let log_x = x.ln();
    let limit = -log_x;
    let ratios: Vec<f64> = h_sequence
        .iter()
        .map(|&h| difference_ratio(h, log_x))
        .collect();
    let deviations: Vec<f64> = ratios.iter().map(|r| (r - limit).abs()).collect();
    let tail = &deviations[deviations.len().saturating_sub(3)..];
    let tail_max_deviation = tail.iter().copied().fold(0.0, f64::max);
    let shrinking = tail.windows(2).all(|w| w[1] < w[0]);
    Ok(LimitReport {
        x,
        limit,
        ratios,
        deviations,
        tail_max_deviation,
        shrinking,
    })
}

/// `∫_e^∞ (1 - x^h)/(h x^h) dx/(x log³ x) = ∫_1^∞ (e^{-hu} - 1)/h · u^{-3} du`
/// by quadrature.
pub fn limit_integrand_integral(h: f64) -> Result<f64> {
    if !(h > 0.0) || h.is_infinite() {
        return Err(Error::domain("h", h, "must be finite and > 0"));
    }
    let f = |u: f64| difference_ratio(h, u) * u.powi(-3);
    integrate_to_infinity(f, 1.0, Tolerance::relative(1e-12)).map(|r| r.value)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitLadder {
    pub steps: Vec<f64>,
    pub values: Vec<f64>,
}

impl LimitLadder {
    /// Value at the smallest step.
    pub fn last(&self) -> f64 {
        *self.values.last().expect("ladder is never empty")
    }
}

pub fn limit_integral_ladder(steps: &[f64]) -> Result<LimitLadder> {
    if steps.is_empty() {
        return Err(Error::domain(
            "steps",
            0.0,
            "ladder needs at least one step",
        ));
    }
    let values = steps
        .iter()
        .map(|&h| limit_integrand_integral(h))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitLadder {
        steps: steps.to_vec(),
        values,
    })
}

/// The `h → 0⁺` limit of the dominated integral, read off the default ladder.
pub fn dominated_limit_integral() -> Result<f64> {
    limit_integral_ladder(&LIMIT_LADDER).map(|l| l.last())
}
