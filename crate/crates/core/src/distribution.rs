//! The log-perturbed Pareto family
//!
//! ```text
//! f(x; θ) = a_θ x^{-θ} (log x)^{-3}   for x ≥ e,   0 otherwise,
//! ```
//!
//! with `a_θ` chosen so the density integrates to one. In `u = log x` space
//! the density is `a_θ e^{-(θ-1)u} u^{-3}` on `[1, ∞)`, so
//! `a_θ = 1 / E_3(θ - 1)` and the survival function is
//! `S(x) = a_θ u^{-2} E_3((θ - 1) u)`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{en, en_scaled, ln_en};
use crate::roots::newton_bracketed;

/// Largest admissible θ unless a caller supplies its own bound.
pub const DEFAULT_THETA_MAX: f64 = 10.0;

/// Largest uniform variate fed to the inverse CDF; `p = 1` maps to infinity.
pub const MAX_SAMPLING_PROBABILITY: f64 = 1.0 - 1e-12;

const QUANTILE_XTOL: f64 = 1e-13;
const QUANTILE_MAX_STEPS: usize = 60;

/// Family parameter θ, restricted to `[1, θ_max]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct ThetaParam(f64);

impl ThetaParam {
    pub fn new(theta: f64) -> Result<Self> {
        Self::with_max(theta, DEFAULT_THETA_MAX)
    }

    pub fn with_max(theta: f64, theta_max: f64) -> Result<Self> {
        if theta.is_nan() {
            return Err(Error::domain("theta", theta, "not a number"));
        }
        if theta < 1.0 {
            return Err(Error::domain(
                "theta",
                theta,
                "theta below 1: normalizing integral diverges",
            ));
        }
        if theta > theta_max {
            return Err(Error::domain(
                "theta",
                theta,
                "theta above the configured maximum",
            ));
        }
        Ok(ThetaParam(theta))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Exponential decay rate `θ - 1` of the density in log space.
    pub fn decay(self) -> f64 {
        self.0 - 1.0
    }
}

/// `a_θ` and its θ-derivative (one-sided at θ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationResult {
    pub theta: f64,
    pub a_theta: f64,
    pub da_dtheta: f64,
}

/// Normalization constant `a_θ = 1/E_3(θ-1)` and `da_θ/dθ = a_θ² E_2(θ-1)`.
///
/// The derivative comes from differentiating `1/a_θ = ∫_1^∞ e^{-(θ-1)u}u^{-3}du`
/// under the integral, which gives `d(1/a_θ)/dθ = -E_2(θ-1)`. `E_2(0) = 1` is
/// finite, so the one-sided derivative at θ = 1 needs no limit.
pub fn normalization(theta: ThetaParam) -> NormalizationResult {
    let s = theta.decay();
    let a = 1.0 / en(3, s);
    NormalizationResult {
        theta: theta.value(),
        a_theta: a,
        da_dtheta: a * a * en(2, s),
    }
}

/// `d(1/a_θ)/dθ = -E_2(θ-1)`; equals -1 at θ = 1.
pub fn inverse_normalization_slope(theta: ThetaParam) -> f64 {
    -en(2, theta.decay())
}

/// A member of the family with its constants precomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogPareto {
    theta: ThetaParam,
    a: f64,
    ln_a: f64,
    da: f64,
}

impl LogPareto {
    pub fn new(theta: ThetaParam) -> Self {
        let norm = normalization(theta);
        LogPareto {
            theta,
            a: norm.a_theta,
            ln_a: norm.a_theta.ln(),
            da: norm.da_dtheta,
        }
    }

    pub fn theta(&self) -> ThetaParam {
        self.theta
    }

    pub fn normalization(&self) -> NormalizationResult {
        NormalizationResult {
            theta: self.theta.value(),
            a_theta: self.a,
            da_dtheta: self.da,
        }
    }

    /// `c_θ = (da_θ/dθ)/a_θ = E_2(θ-1)/E_3(θ-1)`, which is also `E[log X]`.
    pub fn score_offset(&self) -> f64 {
        self.da / self.a
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(x >= std::f64::consts::E) {
            return 0.0;
        }
        self.ln_pdf(x).exp()
    }

    /// Log-density; `-∞` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(x >= std::f64::consts::E) {
            return f64::NEG_INFINITY;
        }
        let u = x.ln();
        self.ln_a - self.theta.value() * u - 3.0 * u.ln()
    }

    /// Density of `U = log X`, `a_θ e^{-(θ-1)u} u^{-3}` on `[1, ∞)`.
    pub fn log_space_pdf(&self, u: f64) -> f64 {
        if !(u >= 1.0) {
            return 0.0;
        }
        self.a * (-self.theta.decay() * u).exp() * u.powi(-3)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if !(x > std::f64::consts::E) {
            return 0.0;
        }
        1.0 - self.survival(x)
    }

    pub fn survival(&self, x: f64) -> f64 {
        if !(x > std::f64::consts::E) {
            return 1.0;
        }
        self.log_space_survival(x.ln())
    }

    /// `P(log X > u)`.
    pub fn log_space_survival(&self, u: f64) -> f64 {
        if !(u > 1.0) {
            return 1.0;
        }
        if u.is_infinite() {
            return 0.0;
        }
        self.ln_log_space_survival(u).exp()
    }

    fn ln_log_space_survival(&self, u: f64) -> f64 {
        self.ln_a - 2.0 * u.ln() + ln_en(3, self.theta.decay() * u)
    }

    /// Inverse CDF. Domain error unless `0 <= p < 1`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.log_space_quantile(p).map(f64::exp)
    }

    /// Inverse CDF of `U = log X`.
    ///
    /// Newton's method on `g(v) = ln S(e^v) - ln(1 - p)` with `v = log u`.
    /// `g` is concave and decreasing (exactly linear at θ = 1), so iterates
    /// started right of the root fall monotonically onto it. The hazard of
    /// `U` exceeds `θ - 1 + 2/u`, so the root of the elementary bound
    /// `(θ-1)(u-1) + 2 ln u = -ln(1-p)` lies right of the root.
    pub fn log_space_quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::domain("p", p, "probability must lie in [0, 1)"));
        }
        if p == 0.0 {
            return Ok(1.0);
        }
        let target = (-p).ln_1p();
        let s = self.theta.decay();
        let objective = |u: f64| {
            let su = s * u;
            let scaled = en_scaled(3, su);
            let ln_surv = self.ln_a - 2.0 * u.ln() + scaled.ln() - su;
            (ln_surv - target, scaled)
        };
        let mut hi = hazard_bound_quantile(s, -target).max(1.0 + 1e-12);
        let mut v = hi.ln();
        for _ in 0..QUANTILE_MAX_STEPS {
            let (g, scaled) = objective(v.exp());
            // g'(v) = -1 / (e^{su} E_3(su)).
            let step = g * scaled;
            let next = (v + step).max(0.0);
            if !next.is_finite() {
                break;
            }
            if (next - v).abs() <= QUANTILE_XTOL * next.max(1.0) {
                return Ok(next.exp());
            }
            v = next;
        }
        while objective(hi).0 > 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::no_convergence(
                    "quantile",
                    "upper bracket overflowed",
                ));
            }
        }
        let bracketed = |u: f64| {
            let (g, scaled) = objective(u);
            (g, -1.0 / (u * scaled))
        };
        newton_bracketed(bracketed, 1.0, hi, hi, QUANTILE_XTOL)
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5).expect("0.5 is a valid probability")
    }

    /// Score `∂ log f/∂θ = c_θ - log x`. Domain error for `x < e`.
    pub fn score(&self, x: f64) -> Result<f64> {
        if !(x >= std::f64::consts::E) {
            return Err(Error::domain(
                "x",
                x,
                "score undefined below the support edge e",
            ));
        }
        Ok(self.score_offset() - x.ln())
    }
}

/// `(θ, median)` pairs for each grid point.
/// Root of `s(u-1) + 2 ln u = t`. In `v = ln u` the left side is convex and
/// increasing, so Newton started right of the root (at the `s = 0` root
/// `v = t/2`, or at `u = 1 + t/s`) decreases monotonically onto it.
fn hazard_bound_quantile(s: f64, t: f64) -> f64 {
    let mut v = 0.5 * t;
    if s > 0.0 {
        v = v.min((t / s).ln_1p());
    }
    for _ in 0..QUANTILE_MAX_STEPS {
        let ev = v.exp();
        let next = v - (s * (ev - 1.0) + 2.0 * v - t) / (s * ev + 2.0);
        if !(next < v) || v - next <= QUANTILE_XTOL * v {
            break;
        }
        v = next;
    }
    v.exp()
}

pub fn median_curve(grid: &[ThetaParam]) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::domain(
            "grid",
            0.0,
            "median curve needs at least one theta",
        ));
    }
    grid.iter()
        .map(|&t| LogPareto::new(t).quantile(0.5).map(|m| (t.value(), m)))
        .collect()
}

/// I.i.d. draws with the seed and θ that produced them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub theta: ThetaParam,
    pub seed: u64,
    pub values: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Deterministic generator for substream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A uniform variate capped at [`MAX_SAMPLING_PROBABILITY`].
pub fn uniform_variate(rng: &mut ChaCha8Rng) -> f64 {
    rng.random::<f64>().min(MAX_SAMPLING_PROBABILITY)
}

/// `n` draws by inverse-CDF sampling from substream 0 of `seed`.
pub fn sample(n: usize, theta: ThetaParam, seed: u64) -> Result<SampleBatch> {
    sample_stream(n, theta, seed, 0)
}

pub fn sample_stream(n: usize, theta: ThetaParam, seed: u64, stream: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "sample size must be >= 1"));
    }
    let dist = LogPareto::new(theta);
    let mut rng = stream_rng(seed, stream);
    let values = (0..n)
        .map(|_| dist.quantile(uniform_variate(&mut rng)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        theta,
        seed,
        values,
    })
}
