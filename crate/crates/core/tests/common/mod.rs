#![allow(dead_code, clippy::excessive_precision)]

use logpareto::ThetaParam;

pub fn theta(t: f64) -> ThetaParam {
    ThetaParam::new(t).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// mpmath reference values at 40 digits:
/// `(θ, a_θ, da/dθ, c_θ, I(θ), median)`.
pub const REFERENCE: [(f64, f64, f64, f64, f64, f64); 6] = [
    (
        1.1,
        2.402_163_150_367_427,
        4.169_364_981_729_483,
        1.735_671_026_795_890_7,
        1.366_406_845_578_282_3,
        3.935_763_614_145_875,
    ),
    (
        1.5,
        4.512_546_507_244_074,
        6.651_473_786_928_824,
        1.473_995_620_045_376,
        0.353_341_292_041_671_96,
        3.590_712_726_893_658_6,
    ),
    (
        2.0,
        9.116_437_835_389_824,
        12.341_378_233_437_724,
        1.353_750_056_357_401_7,
        0.167_360_784_912_331_62,
        3.388_745_242_964_166_4,
    ),
    (
        3.0,
        33.185_789_536_707_77,
        41.336_355_946_396_86,
        1.245_604_113_190_482,
        0.071_272_449_798_193_82,
        3.190_795_451_770_620_5,
    ),
    (
        5.0,
        362.140_270_565_074_55,
        419.433_615_693_148,
        1.158_207_605_684_599_4,
        0.027_210_846_397_797_11,
        3.023_612_434_100_026,
    ),
    (
        10.0,
        95_432.342_203_438_12,
        103_674.373_985_293_07,
        1.086_365_183_873_251,
        0.007_690_850_710_927_318,
        2.884_152_451_402_718_8,
    ),
];

/// Two-sided one-sample Kolmogorov–Smirnov statistic `D_n` against `cdf`.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    })
}

/// Asymptotic p-value of `D_n` with Stephens' small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
