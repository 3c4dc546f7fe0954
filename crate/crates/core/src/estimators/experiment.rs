use rayon::prelude::*;
use serde::Serialize;

use super::{mle_from_mean_log, Estimate, EstimatorKind, MedianInverter, RunningStats};
use crate::distribution::{stream_rng, uniform_variate, LogPareto, ThetaParam, DEFAULT_THETA_MAX};
use crate::error::{Error, Result};
use crate::information::{cr_bound_from, fisher, CramerRaoBound};

/// Trials per work item. Fixed so the reduction tree does not depend on the
/// number of workers.
const CHUNK: u64 = 32;

/// An estimator driven by the uniform variates of one trial. Draw `i` of
/// the trial is `dist.quantile(uniforms[i])`.
pub trait TrialEstimator: Sync {
    fn name(&self) -> &str;

    /// May reorder `uniforms`.
    fn estimate(&self, dist: &LogPareto, uniforms: &mut [f64]) -> Result<Estimate>;
}

struct MedianTrial {
    inverter: MedianInverter,
}

impl TrialEstimator for MedianTrial {
    fn name(&self) -> &str {
        "median"
    }

    fn estimate(&self, dist: &LogPareto, uniforms: &mut [f64]) -> Result<Estimate> {
        // The quantile is increasing, so the sample median is the quantile of
        // the median uniform; one inversion instead of n.
        let n = uniforms.len();
        if n == 0 {
            return Err(Error::domain("batch", 0.0, "median of an empty batch"));
        }
        let (left, mid, _) = uniforms.select_nth_unstable_by(n / 2, f64::total_cmp);
        let upper = dist.quantile(*mid)?;
        let m = if n % 2 == 1 {
            upper
        } else {
            let below = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            0.5 * (dist.quantile(below)? + upper)
        };
        Ok(self.inverter.invert_clamped(m))
    }
}

struct MleTrial {
    theta_max: f64,
}

impl TrialEstimator for MleTrial {
    fn name(&self) -> &str {
        "mle"
    }

    fn estimate(&self, dist: &LogPareto, uniforms: &mut [f64]) -> Result<Estimate> {
        let mut sum = 0.0;
        for &p in uniforms.iter() {
            sum += dist.log_space_quantile(p)?;
        }
        mle_from_mean_log(sum / uniforms.len() as f64, self.theta_max)
    }
}

/// Control estimator: the true θ plus zero-mean uniform noise of half-width
/// `noise`. Unbiased by construction.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticUnbiased {
    pub noise: f64,
}

impl TrialEstimator for SyntheticUnbiased {
    fn name(&self) -> &str {
        "synthetic"
    }

    fn estimate(&self, dist: &LogPareto, uniforms: &mut [f64]) -> Result<Estimate> {
        let u = uniforms.first().copied().unwrap_or(0.5);
        Ok(Estimate {
            theta: dist.theta().value() + self.noise * (2.0 * u - 1.0),
            clamped: false,
        })
    }
}

fn boxed_estimator(kind: EstimatorKind, theta_max: f64) -> Result<Box<dyn TrialEstimator>> {
    Ok(match kind {
        EstimatorKind::Median => Box::new(MedianTrial {
            inverter: MedianInverter::new(theta_max)?,
        }),
        EstimatorKind::Mle => Box::new(MleTrial { theta_max }),
    })
}

fn trial_uniforms(seed: u64, trial: u64, n: usize, buf: &mut Vec<f64>) {
    let mut rng = stream_rng(seed, trial);
    buf.clear();
    buf.extend((0..n).map(|_| uniform_variate(&mut rng)));
}

/// Runs `step` for every trial index and reduces chunk accumulators in
/// index order, so the result is independent of scheduling.
fn fold_trials<A, I, S, M>(trials: u64, init: I, step: S, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    S: Fn(&mut A, u64) -> Result<()> + Sync,
    M: Fn(A, A) -> A,
{
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<Result<A>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                step(&mut acc, t)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = init();
    for p in partials {
        total = merge(total, p?);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub theta: ThetaParam,
    /// Sample size per trial, `2m + 1`.
    pub n: usize,
    pub trials: u64,
    pub estimator: EstimatorKind,
    pub seed: u64,
    /// Bias slope `dF/dθ` for the generalized bound; 0 when absent.
    pub bias_slope: Option<f64>,
    pub theta_max: f64,
}

impl ExperimentConfig {
    pub fn new(
        theta: ThetaParam,
        n: usize,
        trials: u64,
        estimator: EstimatorKind,
        seed: u64,
    ) -> Self {
        ExperimentConfig {
            theta,
            n,
            trials,
            estimator,
            seed,
            bias_slope: None,
            theta_max: DEFAULT_THETA_MAX,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n.is_multiple_of(2) {
            return Err(Error::domain(
                "n",
                self.n as f64,
                "sample size must be odd (n = 2m + 1)",
            ));
        }
        if self.trials < 2 {
            return Err(Error::domain(
                "trials",
                self.trials as f64,
                "need at least 2 trials",
            ));
        }
        Ok(())
    }
}

/// Monte Carlo summary of one estimator at one θ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorReport {
    pub estimator: String,
    pub theta_true: f64,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub mean_estimate: f64,
    pub bias: f64,
    pub bias_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub rmse: f64,
    /// Fraction of trials whose raw statistic had to be clamped.
    pub clamp_rate: f64,
    /// Median estimator: delta method on the asymptotic law of the sample
    /// median. MLE: `1/(n I(θ))` when the information is finite.
    pub asymptotic_variance: Option<f64>,
    pub cr_bound: CramerRaoBound,
}

#[derive(Clone, Copy)]
struct TrialAccumulator {
    stats: RunningStats,
    clamps: u64,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EstimatorReport> {
    cfg.validate()?;
    let est = boxed_estimator(cfg.estimator, cfg.theta_max)?;
    let mut report = run_experiment_with(est.as_ref(), cfg)?;
    report.asymptotic_variance = match cfg.estimator {
        EstimatorKind::Median => median_asymptotic_variance(cfg.theta, cfg.n, cfg.theta_max)?,
        EstimatorKind::Mle => fisher(cfg.theta)?
            .finite_value()
            .map(|info| 1.0 / (cfg.n as f64 * info)),
    };
    Ok(report)
}

/// Delta-method variance `g'(μ̃)² / (8 m f(μ̃)²)` of the median estimator,
/// with `n = 2m + 1`.
pub(crate) fn median_asymptotic_variance(
    theta: ThetaParam,
    n: usize,
    theta_max: f64,
) -> Result<Option<f64>> {
    let m = (n / 2) as f64;
    if m == 0.0 {
        return Ok(None);
    }
    let dist = LogPareto::new(theta);
    let density = dist.pdf(dist.median());
    let g_prime = MedianInverter::new(theta_max)?.inverse_slope(theta);
    Ok(Some(g_prime * g_prime / (8.0 * m * density * density)))
}

/// Runs an arbitrary [`TrialEstimator`]; `asymptotic_variance` is left empty.
pub fn run_experiment_with(
    est: &dyn TrialEstimator,
    cfg: &ExperimentConfig,
) -> Result<EstimatorReport> {
    cfg.validate()?;
    let dist = LogPareto::new(cfg.theta);
    let acc = fold_trials(
        cfg.trials,
        || TrialAccumulator {
            stats: RunningStats::new(),
            clamps: 0,
        },
        |acc, t| {
            let mut u = Vec::with_capacity(cfg.n);
            trial_uniforms(cfg.seed, t, cfg.n, &mut u);
            let e = est.estimate(&dist, &mut u)?;
            acc.stats.push(e.theta);
            acc.clamps += e.clamped as u64;
            Ok(())
        },
        |a, b| TrialAccumulator {
            stats: a.stats.merge(&b.stats),
            clamps: a.clamps + b.clamps,
        },
    )?;
    let theta_true = cfg.theta.value();
    let stats = acc.stats;
    let info = fisher(cfg.theta)?;
    let cr_bound = cr_bound_from(&info, cfg.n as u64, cfg.bias_slope.unwrap_or(0.0))?;
    Ok(EstimatorReport {
        estimator: est.name().to_string(),
        theta_true,
        n: cfg.n,
        trials: cfg.trials,
        seed: cfg.seed,
        mean_estimate: stats.mean(),
        bias: stats.mean() - theta_true,
        bias_se: stats.standard_error(),
        variance: stats.variance(),
        variance_se: stats.variance_standard_error(),
        rmse: stats.mean_squared_deviation_from(theta_true).sqrt(),
        clamp_rate: acc.clamps as f64 / cfg.trials as f64,
        asymptotic_variance: None,
        cr_bound,
    })
}

/// Estimated bias `F(θ) = E[Θ̂] - θ` at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasPoint {
    pub theta: f64,
    pub bias: f64,
    pub standard_error: f64,
}

/// Centered finite-difference slope `dF/dθ` at an interior grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasSlope {
    pub theta: f64,
    pub slope: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasCurve {
    pub estimator: String,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub points: Vec<BiasPoint>,
    pub slopes: Vec<BiasSlope>,
}

impl BiasCurve {
    pub fn slope_at(&self, theta: f64) -> Option<&BiasSlope> {
        self.slopes.iter().find(|s| s.theta == theta)
    }
}

pub fn estimate_bias_curve(
    grid: &[ThetaParam],
    n: usize,
    trials: u64,
    estimator: EstimatorKind,
    seed: u64,
) -> Result<BiasCurve> {
    let est = boxed_estimator(estimator, DEFAULT_THETA_MAX)?;
    estimate_bias_curve_with(est.as_ref(), grid, n, trials, seed)
}

/// Every grid point reuses the same uniforms in each trial (common random
/// numbers), so slope errors come from per-trial difference quotients rather
/// than from independent noise at each point.
pub fn estimate_bias_curve_with(
    est: &dyn TrialEstimator,
    grid: &[ThetaParam],
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<BiasCurve> {
    if grid.len() < 3 {
        return Err(Error::domain(
            "grid",
            grid.len() as f64,
            "bias curve needs at least 3 points",
        ));
    }
    if grid.windows(2).any(|w| w[1].value() <= w[0].value()) {
        return Err(Error::domain(
            "grid",
            grid[0].value(),
            "grid must be strictly increasing",
        ));
    }
    if n == 0 {
        return Err(Error::domain("n", 0.0, "sample size must be >= 1"));
    }
    if trials < 2 {
        return Err(Error::domain(
            "trials",
            trials as f64,
            "need at least 2 trials",
        ));
    }
    let dists: Vec<LogPareto> = grid.iter().map(|&t| LogPareto::new(t)).collect();
    let k = grid.len();
    let (bias, slope) = fold_trials(
        trials,
        || {
            (
                vec![RunningStats::new(); k],
                vec![RunningStats::new(); k - 2],
            )
        },
        |(bias, slope), t| {
            let mut u = Vec::with_capacity(n);
            trial_uniforms(seed, t, n, &mut u);
            let mut b = Vec::with_capacity(k);
            for (i, d) in dists.iter().enumerate() {
                let e = est.estimate(d, &mut u)?;
                b.push(e.theta - grid[i].value());
                bias[i].push(b[i]);
            }
            for j in 1..k - 1 {
                let width = grid[j + 1].value() - grid[j - 1].value();
                slope[j - 1].push((b[j + 1] - b[j - 1]) / width);
            }
            Ok(())
        },
        |(ba, sa), (bb, sb)| {
            (
                ba.iter().zip(&bb).map(|(x, y)| x.merge(y)).collect(),
                sa.iter().zip(&sb).map(|(x, y)| x.merge(y)).collect(),
            )
        },
    )?;
    Ok(BiasCurve {
        estimator: est.name().to_string(),
        n,
        trials,
        seed,
        points: grid
            .iter()
            .zip(&bias)
            .map(|(t, s)| BiasPoint {
                theta: t.value(),
                bias: s.mean(),
                standard_error: s.standard_error(),
            })
            .collect(),
        slopes: grid[1..k - 1]
            .iter()
            .zip(&slope)
            .map(|(t, s)| BiasSlope {
                theta: t.value(),
                slope: s.mean(),
                standard_error: s.standard_error(),
            })
            .collect(),
    })
}
