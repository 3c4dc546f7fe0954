//! Estimators of θ and the Monte Carlo harness that measures them.
//!
//! The median-inversion estimator maps the sample median through the inverse
//! `g` of the strictly decreasing population-median curve `θ ↦ μ̃_θ`. Since
//! `μ̃_1 = e^{√2}` is the largest achievable median, a sample median above it
//! has no preimage and is clamped to θ = 1.
//!
//! The maximum-likelihood comparator solves the score equation
//! `c_θ = mean(log x)`.

mod experiment;
mod stats;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use experiment::{
    estimate_bias_curve, estimate_bias_curve_with, run_experiment, run_experiment_with, BiasCurve,
    BiasPoint, BiasSlope, EstimatorReport, ExperimentConfig, SyntheticUnbiased, TrialEstimator,
};
pub use stats::RunningStats;

use crate::distribution::{LogPareto, SampleBatch, ThetaParam, DEFAULT_THETA_MAX};
use crate::error::{Error, Result};
use crate::numdiff::{backward_derivative, central_derivative, forward_derivative_log};
use crate::quadrature::en_scaled;
use crate::roots::brent;

/// Step in θ for the finite-difference slope of the median curve.
pub const MEDIAN_SLOPE_STEP: f64 = 1e-5;

const INVERT_XTOL: f64 = 1e-14;

/// Relative slack on `ln log m` when matching a median to an end of the
/// achievable range; absorbs the last-ulp error of the quantile solver.
const ENDPOINT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Median,
    Mle,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::Median => "median",
            EstimatorKind::Mle => "mle",
        })
    }
}

impl FromStr for EstimatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "median" => Ok(EstimatorKind::Median),
            "mle" => Ok(EstimatorKind::Mle),
            other => Err(format!(
                "unknown estimator '{other}' (expected median or mle)"
            )),
        }
    }
}

/// A point estimate of θ; `clamped` records that the raw statistic fell
/// outside what `[1, θ_max]` can produce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub theta: f64,
    pub clamped: bool,
}

/// Inverse of the population-median curve on `[1, θ_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MedianInverter {
    theta_max: f64,
    ln_median_at_one: f64,
    ln_median_at_max: f64,
}

impl MedianInverter {
    pub fn new(theta_max: f64) -> Result<Self> {
        let top = ThetaParam::with_max(theta_max, theta_max)?;
        if !(theta_max > 1.0) {
            return Err(Error::domain("theta_max", theta_max, "must exceed 1"));
        }
        let ln_median = |t: ThetaParam| LogPareto::new(t).log_space_quantile(0.5).map(f64::ln);
        Ok(MedianInverter {
            theta_max,
            ln_median_at_one: ln_median(ThetaParam::with_max(1.0, theta_max)?)?,
            ln_median_at_max: ln_median(top)?,
        })
    }

    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// `[μ̃_{θ_max}, μ̃_1]`, the medians that have a preimage.
    pub fn median_range(&self) -> (f64, f64) {
        (
            self.ln_median_at_max.exp().exp(),
            self.ln_median_at_one.exp().exp(),
        )
    }

    fn theta(&self, t: f64) -> ThetaParam {
        ThetaParam::with_max(t, self.theta_max).expect("solver stays inside [1, theta_max]")
    }

    /// `ln ln μ̃_θ`; monotone in θ and well scaled for root finding.
    fn ln_log_median(&self, t: f64) -> f64 {
        LogPareto::new(self.theta(t))
            .log_space_quantile(0.5)
            .expect("0.5 is a valid probability")
            .ln()
    }

    /// θ with `μ̃_θ = m`; out-of-range error if no such θ exists.
    pub fn invert(&self, m: f64) -> Result<ThetaParam> {
        let (lo, hi) = self.median_range();
        if !(m > std::f64::consts::E) {
            return Err(Error::OutOfRange {
                name: "median",
                value: m,
                lo,
                hi,
            });
        }
        let target = m.ln().ln();
        match self.locate(target) {
            Position::Above | Position::Below => {
                return Err(Error::OutOfRange {
                    name: "median",
                    value: m,
                    lo,
                    hi,
                })
            }
            Position::AtOne => return Ok(self.theta(1.0)),
            Position::AtMax => return Ok(self.theta(self.theta_max)),
            Position::Inside => {}
        }
        let t = brent(
            |t| self.ln_log_median(t) - target,
            1.0,
            self.theta_max,
            INVERT_XTOL,
        )?;
        Ok(self.theta(t.clamp(1.0, self.theta_max)))
    }

    /// [`invert`](Self::invert), with medians above `μ̃_1` mapped to 1 and
    /// below `μ̃_{θ_max}` to `θ_max`.
    pub fn invert_clamped(&self, m: f64) -> Estimate {
        let target = if m > 1.0 {
            m.ln().ln()
        } else {
            f64::NEG_INFINITY
        };
        let (theta, clamped) = match self.locate(target) {
            Position::Above => (1.0, true),
            Position::AtOne => (1.0, false),
            Position::Below => (self.theta_max, true),
            Position::AtMax => (self.theta_max, false),
            Position::Inside => match self.invert(m) {
                Ok(t) => (t.value(), false),
                Err(_) => unreachable!("median {m} checked to be in range"),
            },
        };
        Estimate { theta, clamped }
    }

    fn locate(&self, target: f64) -> Position {
        let slack = |v: f64| ENDPOINT_SLACK * v.abs().max(1e-3);
        let top = self.ln_median_at_one;
        let bottom = self.ln_median_at_max;
        if target.is_nan() || target > top + slack(top) {
            Position::Above
        } else if target >= top - slack(top) {
            Position::AtOne
        } else if target < bottom - slack(bottom) {
            Position::Below
        } else if target <= bottom + slack(bottom) {
            Position::AtMax
        } else {
            Position::Inside
        }
    }

    /// `dμ̃_θ/dθ` by Richardson-refined finite differences; one-sided at the
    /// ends of `[1, θ_max]`. At θ = 1 the curve has an `s² ln s` term, so the
    /// forward rule extrapolates in `h ln h` as well.
    pub fn median_slope(&self, theta: ThetaParam) -> f64 {
        let t = theta.value();
        let h = MEDIAN_SLOPE_STEP;
        let median = |t: f64| LogPareto::new(self.theta(t)).median();
        if t - h < 1.0 {
            forward_derivative_log(median, t, h)
        } else if t + h > self.theta_max {
            backward_derivative(median, t, h)
        } else {
            central_derivative(median, t, h)
        }
    }

    /// `g'(μ̃_θ) = 1 / (dμ̃_θ/dθ)`.
    pub fn inverse_slope(&self, theta: ThetaParam) -> f64 {
        1.0 / self.median_slope(theta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Position {
    Above,
    AtOne,
    Inside,
    AtMax,
    Below,
}

/// θ whose population median equals `m`, over `[1, DEFAULT_THETA_MAX]`.
pub fn invert_median(m: f64) -> Result<ThetaParam> {
    MedianInverter::new(DEFAULT_THETA_MAX)?.invert(m)
}

/// Middle order statistic for odd lengths, midpoint of the two middle ones
/// otherwise. Reorders `values`.
pub fn sample_median(values: &mut [f64]) -> Result<f64> {
    let n = values.len();
    if n == 0 {
        return Err(Error::domain("batch", 0.0, "median of an empty batch"));
    }
    let mid = n / 2;
    let (left, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        Ok(upper)
    } else {
        let lower = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(0.5 * (lower + upper))
    }
}

/// `g(sample median)`, clamped into `[1, θ_max]`.
pub fn median_estimator(batch: &SampleBatch) -> Result<Estimate> {
    median_estimator_with(batch, &MedianInverter::new(DEFAULT_THETA_MAX)?)
}

pub fn median_estimator_with(batch: &SampleBatch, inverter: &MedianInverter) -> Result<Estimate> {
    let mut values = batch.values.clone();
    let m = sample_median(&mut values)?;
    Ok(inverter.invert_clamped(m))
}

/// `c_θ = E_θ[log X] = E_2(θ-1)/E_3(θ-1)`, strictly decreasing from 2 at θ = 1.
pub fn mean_log(theta: ThetaParam) -> f64 {
    let s = theta.decay();
    en_scaled(2, s) / en_scaled(3, s)
}

/// Maximum-likelihood estimate from the mean of `log x`.
pub fn mle_from_mean_log(mean_log_x: f64, theta_max: f64) -> Result<Estimate> {
    if !mean_log_x.is_finite() {
        return Err(Error::domain("mean log x", mean_log_x, "must be finite"));
    }
    let at = |t: f64| mean_log(ThetaParam::with_max(t, theta_max).expect("inside [1, theta_max]"));
    let top = at(1.0);
    if mean_log_x >= top {
        return Ok(Estimate {
            theta: 1.0,
            clamped: mean_log_x > top,
        });
    }
    let bottom = at(theta_max);
    if mean_log_x <= bottom {
        return Ok(Estimate {
            theta: theta_max,
            clamped: mean_log_x < bottom,
        });
    }
    let t = brent(|t| at(t) - mean_log_x, 1.0, theta_max, INVERT_XTOL)?;
    Ok(Estimate {
        theta: t,
        clamped: false,
    })
}

/// Solves the score equation `c_θ = mean(log x)`.
pub fn mle_estimator(batch: &SampleBatch) -> Result<Estimate> {
    if batch.is_empty() {
        return Err(Error::domain("batch", 0.0, "estimate from an empty batch"));
    }
    if let Some(&x) = batch.values.iter().find(|&&x| !(x >= std::f64::consts::E)) {
        return Err(Error::domain(
            "x",
            x,
            "sample value below the support edge e",
        ));
    }
    let n = batch.values.len() as f64;
    let mean = batch.values.iter().map(|x| x.ln()).sum::<f64>() / n;
    mle_from_mean_log(mean, DEFAULT_THETA_MAX)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn theta(t: f64) -> ThetaParam {
        ThetaParam::new(t).unwrap()
    }

    fn batch(values: Vec<f64>) -> SampleBatch {
        SampleBatch {
            theta: theta(1.0),
            seed: 0,
            values,
        }
    }

    #[test]
    fn inverts_the_boundary_median() {
        assert_eq!(invert_median(SQRT_2.exp()).unwrap().value(), 1.0);
    }

    #[test]
    fn round_trip() {
        let inv = MedianInverter::new(DEFAULT_THETA_MAX).unwrap();
        for t in [1.0001, 1.2, 1.5, 3.0, 7.7, 9.9] {
            let m = LogPareto::new(theta(t)).median();
            let back = inv.invert(m).unwrap().value();
            assert!((back - t).abs() < 1e-8, "{t} -> {m} -> {back}");
            let m2 = LogPareto::new(theta(back)).median();
            assert!((m2 - m).abs() < 1e-9);
        }
    }

    #[test]
    fn out_of_range_medians() {
        assert!(matches!(invert_median(10.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(invert_median(2.8), Err(Error::OutOfRange { .. })));
        assert!(invert_median(2.9).is_ok());
        assert!(invert_median(f64::NAN).is_err());
    }

    #[test]
    fn median_estimator_cases() {
        let e = median_estimator(&batch(vec![SQRT_2.exp()])).unwrap();
        assert_eq!(
            e,
            Estimate {
                theta: 1.0,
                clamped: false
            }
        );
        let e = median_estimator(&batch(vec![3.0, 9.0, 12.0])).unwrap();
        assert_eq!(
            e,
            Estimate {
                theta: 1.0,
                clamped: true
            }
        );
        assert!(median_estimator(&batch(vec![])).is_err());
    }

    #[test]
    fn sample_median_even_and_odd() {
        assert_eq!(sample_median(&mut [5.0, 1.0, 3.0]).unwrap(), 3.0);
        assert_eq!(sample_median(&mut [4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
    }

    #[test]
    fn mean_log_is_decreasing_from_two() {
        assert_eq!(mean_log(theta(1.0)), 2.0);
        let grid: Vec<f64> = (0..=90)
            .map(|k| mean_log(theta(1.0 + 0.1 * k as f64)))
            .collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
        assert!(grid.iter().all(|&c| c > 1.0 && c <= 2.0));
        // mpmath: E_2(1)/E_3(1)
        assert!((mean_log(theta(2.0)) - 1.353_750_056_357_401_7).abs() < 1e-13);
    }

    #[test]
    fn mle_cases() {
        let e = std::f64::consts::E;
        let e = mle_estimator(&batch(vec![e, e.powi(3)])).unwrap();
        assert_eq!(
            e,
            Estimate {
                theta: 1.0,
                clamped: false
            }
        );
        let x3 = 3f64.exp();
        let est = mle_estimator(&batch(vec![x3, x3])).unwrap();
        assert_eq!(
            est,
            Estimate {
                theta: 1.0,
                clamped: true
            }
        );

        let c2 = mean_log(theta(2.0));
        let est = mle_from_mean_log(c2, DEFAULT_THETA_MAX).unwrap();
        assert!((est.theta - 2.0).abs() < 1e-6);
        assert!((mean_log(theta(est.theta)) - c2).abs() < 1e-8);

        assert!(mle_estimator(&batch(vec![])).is_err());
        assert!(mle_estimator(&batch(vec![2.0])).is_err());
    }

    /// Implicit differentiation of `ln S(u; θ) = ln(1/2)` with
    /// `ln S = -ln E_3(s) - 2 ln u + ln E_3(su)` and `E_3' = -E_2`.
    fn implicit_median_slope(t: f64) -> f64 {
        use crate::quadrature::exp_integral;
        let e = |n, x| exp_integral(n, x).unwrap().value;
        let s = t - 1.0;
        let mu = LogPareto::new(theta(t)).median();
        let u = mu.ln();
        let d_ds = e(2, s) / e(3, s) - u * e(2, s * u) / e(3, s * u);
        let d_du = -2.0 / u - s * e(2, s * u) / e(3, s * u);
        mu * (-d_ds / d_du)
    }

    #[test]
    fn median_slope_matches_implicit_derivative() {
        let inv = MedianInverter::new(DEFAULT_THETA_MAX).unwrap();
        // Exact at θ = 1: dμ/dθ = e^√2 · √2 (1 - √2).
        let exact = SQRT_2.exp() * SQRT_2 * (1.0 - SQRT_2);
        assert!((implicit_median_slope(1.0) - exact).abs() < 1e-13);
        let d = inv.median_slope(theta(1.0));
        assert!(((d - exact) / exact).abs() < 1e-6, "{d} vs {exact}");
        for (t, tol) in [(1.5, 1e-7), (2.0, 1e-7), (5.0, 1e-7), (10.0, 1e-4)] {
            let d = inv.median_slope(theta(t));
            let want = implicit_median_slope(t);
            assert!(((d - want) / want).abs() < tol, "theta={t}: {d} vs {want}");
        }
    }
}
