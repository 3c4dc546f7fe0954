//! Fisher information of the family and the Cramér–Rao bounds built on it.
//!
//! The score is `c_θ - log x`, so the information is the variance of
//! `U = log X`:
//!
//! ```text
//! I(θ) = a_θ ∫_1^∞ (c_θ - u)² e^{-(θ-1)u} u^{-3} du
//!      = E_1(s)/E_3(s) - (E_2(s)/E_3(s))²,        s = θ - 1 > 0.
//! ```
//!
//! At θ = 1 the integrand behaves like `2/u` and the integral diverges
//! logarithmically. That case is reported as a fitted growth law for the
//! truncated information rather than as an infinity.

use serde::Serialize;

use crate::dense::least_squares;
use crate::distribution::{LogPareto, ThetaParam};
use crate::error::{Error, Result};
use crate::quadrature::{en_scaled, integrate, integrate_to_infinity, Tolerance};

/// θ within this distance of 1 is treated as exactly 1.
pub const BOUNDARY_SNAP: f64 = 1e-12;

/// First truncation point (log space) of the divergence ladder.
pub const LADDER_START: f64 = 8.0;
/// Number of doublings in the divergence ladder, including the start.
pub const LADDER_STEPS: usize = 7;

/// Agreement required between the closed form and direct quadrature.
const CROSS_CHECK_REL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InformationKind {
    Finite {
        value: f64,
    },
    /// Truncated information grows like `rate * ln U + offset`.
    Divergent {
        rate: f64,
        offset: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InformationResult {
    pub theta: f64,
    #[serde(flatten)]
    pub kind: InformationKind,
}

impl InformationResult {
    pub fn finite_value(&self) -> Option<f64> {
        match self.kind {
            InformationKind::Finite { value } => Some(value),
            InformationKind::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(&self) -> bool {
        matches!(self.kind, InformationKind::Divergent { .. })
    }
}

fn is_boundary(theta: ThetaParam) -> bool {
    theta.decay() <= BOUNDARY_SNAP
}

fn information_integrand(dist: &LogPareto) -> impl Fn(f64) -> f64 + '_ {
    let c = dist.score_offset();
    move |u: f64| {
        let d = c - u;
        d * d * dist.log_space_pdf(u)
    }
}

/// Information accumulated over `x ∈ [e, e^U]`, i.e. `u ∈ [1, U]`.
pub fn fisher_truncated(theta: ThetaParam, upper: f64) -> Result<f64> {
    fisher_truncated_with(theta, upper, Tolerance::default())
}

pub fn fisher_truncated_with(theta: ThetaParam, upper: f64, tol: Tolerance) -> Result<f64> {
    if !(upper >= 1.0) || upper.is_infinite() {
        return Err(Error::domain(
            "upper",
            upper,
            "log-space truncation must be finite and >= 1",
        ));
    }
    let dist = LogPareto::new(theta);
    integrate(information_integrand(&dist), 1.0, upper, tol).map(|r| r.value)
}

/// `E_1(s)/E_3(s) - (E_2(s)/E_3(s))²` for θ > 1; `None` at the boundary.
pub fn fisher_closed_form(theta: ThetaParam) -> Option<f64> {
    let s = theta.decay();
    if s <= BOUNDARY_SNAP {
        return None;
    }
    let e3 = en_scaled(3, s);
    let r1 = en_scaled(1, s) / e3;
    let r2 = en_scaled(2, s) / e3;
    Some(r1 - r2 * r2)
}

/// Information by direct quadrature of the expected squared score over
/// the whole support. Fails to converge at θ = 1.
pub fn fisher_quadrature(theta: ThetaParam, tol: Tolerance) -> Result<f64> {
    let dist = LogPareto::new(theta);
    integrate_to_infinity(information_integrand(&dist), 1.0, tol).map(|r| r.value)
}

/// Truncated information along `U_k = 8·2^k` with a fitted growth law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderFit {
    pub truncations: Vec<f64>,
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
    /// Coefficient of `ln U`.
    pub rate: f64,
    pub offset: f64,
    pub divergent: bool,
}

/// Evaluates the truncation ladder and fits
/// `J(U) ≈ rate·ln U + offset + b/U + c/U²`; the inverse-power terms absorb
/// the finite-U corrections so `rate` and `offset` are the asymptotic law.
///
/// The ladder is divergent when the last increment per doubling, divided by
/// `ln 2`, is within 5% of a positive fitted rate and no increment vanishes.
pub fn truncation_ladder(theta: ThetaParam) -> Result<LadderFit> {
    let truncations: Vec<f64> = (0..LADDER_STEPS)
        .map(|k| LADDER_START * f64::from(1u32 << k))
        .collect();
    let values = truncations
        .iter()
        .map(|&u| fisher_truncated(theta, u))
        .collect::<Result<Vec<_>>>()?;
    let increments: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();

    let rows: Vec<[f64; 4]> = truncations
        .iter()
        .map(|&u| [u.ln(), 1.0, 1.0 / u, 1.0 / (u * u)])
        .collect();
    let coef = least_squares(&rows, &values)?;
    let (rate, offset) = (coef[0], coef[1]);

    let last_rate = increments[increments.len() - 1] / std::f64::consts::LN_2;
    let floor = 0.05 * std::f64::consts::LN_2 * rate.abs();
    let divergent = rate > 0.0
        && ((last_rate - rate) / rate).abs() <= 0.05
        && increments.iter().all(|&d| d > floor);
    Ok(LadderFit {
        truncations,
        values,
        increments,
        rate,
        offset,
        divergent,
    })
}

/// Fisher information. θ = 1 yields the fitted divergence law; θ > 1 the
/// closed form, verified against direct quadrature.
pub fn fisher(theta: ThetaParam) -> Result<InformationResult> {
    if is_boundary(theta) {
        let fit = truncation_ladder(theta)?;
        if !fit.divergent {
            return Err(Error::no_convergence(
                "fisher",
                format!("truncation ladder at theta = 1 did not show log growth: {fit:?}"),
            ));
        }
        return Ok(InformationResult {
            theta: theta.value(),
            kind: InformationKind::Divergent {
                rate: fit.rate,
                offset: fit.offset,
            },
        });
    }
    let closed = fisher_closed_form(theta).expect("theta above boundary");
    let quad = fisher_quadrature(theta, Tolerance::relative(1e-11))?;
    if ((closed - quad) / closed).abs() > CROSS_CHECK_REL {
        return Err(Error::no_convergence(
            "fisher",
            format!("closed form {closed:e} and quadrature {quad:e} disagree"),
        ));
    }
    Ok(InformationResult {
        theta: theta.value(),
        kind: InformationKind::Finite { value: closed },
    })
}

/// Lower bound `(1 + bias_slope)² / (n I(θ))` on the variance of an
/// estimator whose bias has slope `bias_slope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CramerRaoBound {
    pub theta: f64,
    pub n: u64,
    pub bias_slope: f64,
    pub bound: f64,
    /// Set when the information diverges and the bound degenerates to 0.
    pub no_information: bool,
}

pub fn cr_bound(theta: ThetaParam, n: u64, bias_slope: f64) -> Result<CramerRaoBound> {
    cr_bound_from(&fisher(theta)?, n, bias_slope)
}

/// Same as [`cr_bound`] for an already computed information.
pub fn cr_bound_from(info: &InformationResult, n: u64, bias_slope: f64) -> Result<CramerRaoBound> {
    if n < 1 {
        return Err(Error::domain("n", n as f64, "sample size must be >= 1"));
    }
    if !bias_slope.is_finite() {
        return Err(Error::domain("bias_slope", bias_slope, "must be finite"));
    }
    let (bound, no_information) = match info.kind {
        InformationKind::Divergent { .. } => (0.0, true),
        InformationKind::Finite { value } => {
            let factor = 1.0 + bias_slope;
            (factor * factor / (n as f64 * value), false)
        }
    };
    Ok(CramerRaoBound {
        theta: info.theta,
        n,
        bias_slope,
        bound,
        no_information,
    })
}
