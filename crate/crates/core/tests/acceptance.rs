//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

mod common;

use std::f64::consts::SQRT_2;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use logpareto::dct_verify::{dominated_limit_integral, domination_grid};
use logpareto::distribution::{
    inverse_normalization_slope, median_curve, normalization, sample, DEFAULT_THETA_MAX,
};
use logpareto::estimators::{
    estimate_bias_curve, run_experiment, EstimatorKind, ExperimentConfig, MedianInverter,
};
use logpareto::information::{
    cr_bound, fisher, fisher_closed_form, fisher_quadrature, fisher_truncated, truncation_ladder,
};
use logpareto::numdiff::forward_derivative_log;
use logpareto::quadrature::{integrate, Tolerance};
use logpareto::LogPareto;

use common::{ks_p_value, ks_statistic, mean_and_se, rel, theta};

struct Verdict {
    pass: bool,
    detail: String,
    notes: Vec<String>,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            pass,
            detail: detail.into(),
            notes: Vec::new(),
        }
    }

    fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Verdict,
}

fn normalization_constant() -> Verdict {
    let a1 = normalization(theta(1.0)).a_theta;
    let grid = [1.0, 1.25, 1.5, 2.0, 3.0, 5.0];
    let a: Vec<f64> = grid
        .iter()
        .map(|&t| normalization(theta(t)).a_theta)
        .collect();
    let increasing = a.windows(2).all(|w| w[1] > w[0]);
    Verdict::new(
        (a1 - 2.0).abs() <= 1e-9 && increasing,
        format!("a_1 = {a1:.12}, increasing on {grid:?}: {increasing}"),
    )
}

fn derivative_constants() -> Verdict {
    let analytic = normalization(theta(1.0)).da_dtheta;
    let a = |t: f64| normalization(theta(t)).a_theta;
    let richardson = forward_derivative_log(a, 1.0, 1e-3);
    let inv_slope = inverse_normalization_slope(theta(1.0));
    Verdict::new(
        (analytic - 4.0).abs() <= 1e-6
            && (richardson - 4.0).abs() <= 1e-4
            && (inv_slope + 1.0).abs() <= 1e-9,
        format!(
            "da/dθ analytic = {analytic:.12}, one-sided Richardson = {richardson:.10}, d(1/a)/dθ = {inv_slope:.12}"
        ),
    )
}

fn median() -> Verdict {
    let m = LogPareto::new(theta(1.0)).quantile(0.5).unwrap();
    let grid: Vec<_> = (0..101).map(|i| theta(1.0 + i as f64 / 100.0)).collect();
    let curve = median_curve(&grid).unwrap();
    let decreasing = curve.windows(2).all(|w| w[1].1 < w[0].1);
    Verdict::new(
        (m - SQRT_2.exp()).abs() <= 1e-8 && (m - 4.113_250_378_8).abs() <= 1e-8 && decreasing,
        format!(
            "median(θ=1) = {m:.12}, 101-point curve on [1, 2] strictly decreasing: {decreasing}"
        ),
    )
}

fn information_divergence() -> Verdict {
    let j1 = |u: f64| 2.0 * u.ln() + 8.0 / u - 4.0 / (u * u) - 4.0;
    let worst = [2.0, 5.0, 10.0, 50.0, 100.0, 700.0]
        .iter()
        .map(|&u| rel(fisher_truncated(theta(1.0), u).unwrap(), j1(u)))
        .fold(0.0, f64::max);
    let fit = truncation_ladder(theta(1.0)).unwrap();
    let info = fisher(theta(1.0)).unwrap();
    Verdict::new(
        worst <= 1e-8 && fit.divergent && info.is_divergent() && (fit.rate - 2.0).abs() <= 0.05,
        format!(
            "max rel error vs J1 = {worst:.2e}, divergent = {}, rate = {:.6}, offset = {:.6}",
            fit.divergent, fit.rate, fit.offset
        ),
    )
}

fn finite_information() -> Verdict {
    let closed = fisher_closed_form(theta(2.0)).unwrap();
    let quad = fisher_quadrature(theta(2.0), Tolerance::relative(1e-12)).unwrap();
    let err = rel(closed, quad);
    let trivial = [1u64, 2, 100, 10_000, 1_000_000_000].iter().all(|&n| {
        let b = cr_bound(theta(1.0), n, 0.0).unwrap();
        b.bound == 0.0 && b.no_information
    });
    Verdict::new(
        err <= 1e-8 && trivial,
        format!("I(2) closed = {closed:.12}, quadrature = {quad:.12}, rel = {err:.2e}; θ=1 bound 0 and flagged: {trivial}"),
    )
}

fn sampler_fidelity() -> Verdict {
    const N: usize = 100_000;
    let mut pass = true;
    let mut parts = Vec::new();
    for (t, seed) in [(1.0, 6001u64), (2.0, 6002)] {
        let d = LogPareto::new(theta(t));
        let logs: Vec<f64> = sample(N, theta(t), seed)
            .unwrap()
            .values
            .iter()
            .map(|x| x.ln())
            .collect();
        let stat = ks_statistic(&logs, |u| 1.0 - d.log_space_survival(u));
        let p = ks_p_value(stat, N);
        pass &= p > 0.01;
        parts.push(format!("θ={t}: D = {stat:.5}, p = {p:.3}"));
        if t == 1.0 {
            let (mean, se) = mean_and_se(&logs);
            pass &= (mean - 2.0).abs() <= 3.0 * se;
            parts.push(format!("mean log X = {mean:.5} ± {se:.5}"));
        }
    }
    Verdict::new(pass, parts.join("; "))
}

/// Exact mean and variance of the clamped median estimator: the sample
/// median of `n = 2m + 1` draws is `Q(B)` with `B ~ Beta(m + 1, m + 1)`.
fn exact_median_estimator_moments(t: f64, n: usize) -> (f64, f64) {
    let m = (n / 2) as f64;
    let dist = LogPareto::new(theta(t));
    let inv = MedianInverter::new(DEFAULT_THETA_MAX).unwrap();
    let estimate = |p: f64| inv.invert_clamped(dist.quantile(p).unwrap()).theta;
    let weight = |p: f64| (m * (4.0 * p * (1.0 - p)).ln()).exp();
    let width = (14.0 * 0.5 / (n as f64 + 2.0).sqrt()).min(0.499);
    let kink = dist.cdf(SQRT_2.exp()).clamp(0.5 - width, 0.5 + width);
    let tol = Tolerance::relative(1e-10);
    let moment = |k: i32| {
        [(0.5 - width, kink), (kink, 0.5 + width)]
            .iter()
            .map(|&(a, b)| {
                integrate(|p| weight(p) * estimate(p).powi(k), a, b, tol)
                    .unwrap()
                    .value
            })
            .sum::<f64>()
    };
    let (z, m1, m2) = (moment(0), moment(1), moment(2));
    let mean = m1 / z;
    (mean, m2 / z - mean * mean)
}

fn estimator_experiment() -> Verdict {
    let report = |n: usize| {
        let cfg = ExperimentConfig::new(theta(1.0), n, 10_000, EstimatorKind::Median, 7001);
        run_experiment(&cfg).unwrap()
    };
    let main = report(2001);
    let asymptotic = main.asymptotic_variance.unwrap();
    let ratio = main.variance / asymptotic;
    let rmse = [report(501).rmse, main.rmse, report(8001).rmse];
    let decreasing = rmse.windows(2).all(|w| w[1] < w[0]);
    let (exact_mean, exact_var) = exact_median_estimator_moments(1.0, 2001);
    Verdict::new(
        (ratio - 1.0).abs() <= 0.15 && decreasing,
        format!(
            "variance = {:.6e} ± {:.1e}, delta method = {asymptotic:.6e}, ratio = {ratio:.4}; RMSE over n = 501, 2001, 8001: {:.5}, {:.5}, {:.5}",
            main.variance, main.variance_se, rmse[0], rmse[1], rmse[2]
        ),
    )
    .note(format!(
        "clamp rate = {:.4}: estimates of sample medians above e^√2 are pinned to θ = 1",
        main.clamp_rate
    ))
    .note(format!(
        "exact finite-sample law of the clamped estimator: mean = {exact_mean:.6}, variance = {exact_var:.6e} (Monte Carlo: {:.6}, {:.6e})",
        main.mean_estimate, main.variance
    ))
}

fn bound_compliance() -> Verdict {
    const N: usize = 2001;
    const TRIALS: u64 = 2000;
    let grid = [theta(1.9), theta(2.0), theta(2.1)];
    let info = fisher(theta(2.0)).unwrap().finite_value().unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (kind, seed) in [(EstimatorKind::Median, 8001u64), (EstimatorKind::Mle, 8002)] {
        let curve = estimate_bias_curve(&grid, N, TRIALS, kind, seed).unwrap();
        let slope = curve.slope_at(2.0).unwrap();
        let mut cfg = ExperimentConfig::new(theta(2.0), N, TRIALS, kind, seed);
        cfg.bias_slope = Some(slope.slope);
        let r = run_experiment(&cfg).unwrap();
        let bound = r.cr_bound.bound;
        let bound_se = (2.0 * (1.0 + slope.slope) / (N as f64 * info)).abs() * slope.standard_error;
        let se = r.variance_se.hypot(bound_se);
        pass &= r.variance - bound >= -2.0 * se;
        parts.push(format!(
            "{kind}: variance = {:.5e}, bound = {bound:.5e} (slope {:.4} ± {:.4}), margin = {:.2} SE",
            r.variance,
            slope.slope,
            slope.standard_error,
            (r.variance - bound) / se
        ));
    }
    Verdict::new(pass, parts.join("; "))
}

fn domination_bound() -> Verdict {
    let grid = domination_grid();
    let violations = grid.iter().filter(|c| !c.ok).count();
    let limit = dominated_limit_integral().unwrap();
    Verdict::new(
        grid.len() == 54 && violations == 0 && (limit + 1.0).abs() <= 1e-5,
        format!(
            "{violations} violations on {} grid points, limit integral = {limit:.9}",
            grid.len()
        ),
    )
}

fn cli_bytes(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_logpareto"))
        .args(args)
        .env_remove("LOGPARETO_SEED")
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{args:?} failed");
    out.stdout
}

fn reproducibility() -> Verdict {
    let commands: [&[&str]; 8] = [
        &["constants", "--theta", "1"],
        &["info", "--theta", "1", "--n", "100"],
        &["info", "--theta", "2", "--n", "100", "--format", "json"],
        &[
            "median-curve",
            "--from",
            "1",
            "--to",
            "2",
            "--points",
            "101",
        ],
        &["sample", "--theta", "1", "--n", "5", "--seed", "1"],
        &["dct-check"],
        &[
            "experiment",
            "--theta",
            "1",
            "--n",
            "2001",
            "--trials",
            "2000",
            "--estimator",
            "median",
            "--seed",
            "7",
        ],
        &[
            "bias-curve",
            "--from",
            "1.9",
            "--to",
            "2.1",
            "--points",
            "3",
            "--n",
            "201",
            "--trials",
            "200",
            "--estimator",
            "mle",
            "--seed",
            "3",
        ],
    ];
    let mut mismatches = Vec::new();
    for cmd in commands {
        let first = cli_bytes(cmd);
        if first.is_empty() || first != cli_bytes(cmd) {
            mismatches.push(cmd.join(" "));
        }
        if matches!(cmd[0], "experiment" | "bias-curve") {
            let one = cli_bytes(&[cmd, &["--workers", "1"]].concat());
            let four = cli_bytes(&[cmd, &["--workers", "4"]].concat());
            if one != first || four != first {
                mismatches.push(format!("{} across workers", cmd.join(" ")));
            }
        }
    }
    Verdict::new(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!(
                "{} commands byte-identical across runs and worker counts 1, 4",
                commands.len()
            )
        } else {
            format!("differing output: {}", mismatches.join("; "))
        },
    )
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "normalization constant",
            budget: Duration::from_secs(1),
            check: normalization_constant,
        },
        Criterion {
            id: 2,
            name: "derivative constants",
            budget: Duration::from_secs(1),
            check: derivative_constants,
        },
        Criterion {
            id: 3,
            name: "median",
            budget: Duration::from_secs(5),
            check: median,
        },
        Criterion {
            id: 4,
            name: "information divergence",
            budget: Duration::from_secs(10),
            check: information_divergence,
        },
        Criterion {
            id: 5,
            name: "finite information",
            budget: Duration::from_secs(5),
            check: finite_information,
        },
        Criterion {
            id: 6,
            name: "sampler fidelity",
            budget: Duration::from_secs(30),
            check: sampler_fidelity,
        },
        Criterion {
            id: 7,
            name: "estimator experiment",
            budget: Duration::from_secs(300),
            check: estimator_experiment,
        },
        Criterion {
            id: 8,
            name: "bound compliance",
            budget: Duration::from_secs(300),
            check: bound_compliance,
        },
        Criterion {
            id: 9,
            name: "domination bound",
            budget: Duration::from_secs(10),
            check: domination_bound,
        },
        Criterion {
            id: 10,
            name: "reproducibility",
            budget: Duration::from_secs(60),
            check: reproducibility,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let v = (c.check)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.budget;
        let pass = v.pass && in_time;
        failed += usize::from(!pass);
        println!(
            "criterion {:>2} {}: {} ({:.2}s of {}s){}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            c.budget.as_secs(),
            if in_time {
                String::new()
            } else {
                " over time budget".into()
            }
        );
        println!("    {}", v.detail);
        for n in &v.notes {
            println!("    note: {n}");
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
