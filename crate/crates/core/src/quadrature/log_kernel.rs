//! The integral family `∫_e^{e^U} dx / (x^θ log^p x)`, evaluated in
//! `u = log x` space as `∫_1^U e^{-(θ-1)u} u^{-p} du`.

use serde::Serialize;

use super::expint::en;
use super::gauss_kronrod::{integrate, integrate_to_infinity, Tolerance};
use crate::error::{Error, Result};

/// One member of the log-kernel family. `upper` is the truncation point in
/// log space (`f64::INFINITY` for the full tail).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogKernelIntegral {
    pub theta: f64,
    pub log_power: u32,
    pub upper: f64,
}

/// Outcome of evaluating a log-kernel integral. Divergence is an answer, not
/// an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum KernelValue {
    Finite(f64),
    Divergent(Convergence),
}

impl KernelValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            KernelValue::Finite(v) => Some(v),
            KernelValue::Divergent(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Convergent,
    /// Truncated value grows like a constant times `ln U`.
    LogDivergent,
    /// Truncated value grows at least like a positive power of `U`.
    PowerDivergent,
}

impl LogKernelIntegral {
    pub fn new(theta: f64, log_power: u32, upper: f64) -> Result<Self> {
        if !theta.is_finite() || theta <= 0.0 {
            return Err(Error::domain("theta", theta, "must be finite and positive"));
        }
        if log_power < 1 {
            return Err(Error::domain("log_power", log_power as f64, "must be >= 1"));
        }
        if !(upper > 1.0) {
            return Err(Error::domain(
                "upper",
                upper,
                "log-space truncation must exceed 1",
            ));
        }
        Ok(LogKernelIntegral {
            theta,
            log_power,
            upper,
        })
    }

    pub fn untruncated(theta: f64, log_power: u32) -> Result<Self> {
        Self::new(theta, log_power, f64::INFINITY)
    }

    fn decay(&self) -> f64 {
        self.theta - 1.0
    }

    fn integrand(&self) -> impl Fn(f64) -> f64 {
        let s = self.decay();
        let p = self.log_power as i32;
        move |u: f64| (-s * u).exp() * u.powi(-p)
    }
}

/// Analytic convergence class of the untruncated integral.
pub fn classify_divergence(theta: f64, log_power: u32) -> Convergence {
    if theta > 1.0 || (theta == 1.0 && log_power >= 2) {
        Convergence::Convergent
    } else if theta == 1.0 {
        Convergence::LogDivergent
    } else {
        Convergence::PowerDivergent
    }
}

/// Evaluates the integral by adaptive quadrature.
pub fn integrate_log_kernel(k: &LogKernelIntegral, tol: Tolerance) -> Result<KernelValue> {
    if k.upper.is_infinite() {
        match classify_divergence(k.theta, k.log_power) {
            Convergence::Convergent => {}
            class => return Ok(KernelValue::Divergent(class)),
        }
        return integrate_to_infinity(k.integrand(), 1.0, tol)
            .map(|r| KernelValue::Finite(r.value));
    }
    integrate(k.integrand(), 1.0, k.upper, tol).map(|r| KernelValue::Finite(r.value))
}

/// Exponential-integral closed form, `E_p(s) - U^{1-p} E_p(sU)` with
/// `s = θ - 1`. Returns `None` for `θ < 1`, which has no such form.
pub fn log_kernel_closed_form(k: &LogKernelIntegral) -> Option<KernelValue> {
    let s = k.decay();
    if s < 0.0 {
        return if k.upper.is_infinite() {
            Some(KernelValue::Divergent(Convergence::PowerDivergent))
        } else {
            None
        };
    }
    let p = k.log_power;
    if k.upper.is_infinite() {
        return Some(match classify_divergence(k.theta, p) {
            Convergence::Convergent => KernelValue::Finite(en(p, s)),
            class => KernelValue::Divergent(class),
        });
    }
    let u = k.upper;
    let value = if s == 0.0 {
        if p == 1 {
            u.ln()
        } else {
            (1.0 - u.powi(1 - p as i32)) / (p - 1) as f64
        }
    } else {
        en(p, s) - tail_from(p, s, u)
    };
    Some(KernelValue::Finite(value))
}

/// `∫_u^∞ e^{-st} t^{-p} dt = u^{1-p} E_p(s u)`.
pub fn tail_from(log_power: u32, s: f64, u: f64) -> f64 {
    u.powi(1 - log_power as i32) * en(log_power, s * u)
}

/// Numerical growth profile of the truncated integral along `U, 2U, 4U, 8U`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceProfile {
    pub truncations: Vec<f64>,
    pub values: Vec<f64>,
    /// Increment per doubling, `I(2U) - I(U)`.
    pub increments: Vec<f64>,
    pub class: Convergence,
}

/// Classifies growth from the pattern of increments per doubling: shrinking
/// increments mean convergence, constant ones log-divergence, growing ones
/// power-divergence.
pub fn divergence_profile(
    theta: f64,
    log_power: u32,
    first: f64,
    tol: Tolerance,
) -> Result<DivergenceProfile> {
    let truncations: Vec<f64> = (0..4).map(|k| first * f64::from(1u32 << k)).collect();
    let values = truncations
        .iter()
        .map(|&u| {
            let k = LogKernelIntegral::new(theta, log_power, u)?;
            integrate_log_kernel(&k, tol).map(|v| v.finite().expect("truncated kernel is finite"))
        })
        .collect::<Result<Vec<_>>>()?;
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let n = increments.len();
    let ratio = increments[n - 1] / increments[n - 2];
    let class = if ratio < 0.75 {
        Convergence::Convergent
    } else if ratio <= 1.25 {
        Convergence::LogDivergent
    } else {
        Convergence::PowerDivergent
    };
    Ok(DivergenceProfile {
        truncations,
        values,
        increments,
        class,
    })
}
