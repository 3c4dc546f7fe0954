//! Bracketed root finding for monotone scalar functions.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Brent's method on a bracket `[a, b]` whose endpoints straddle a root.
/// Stops once the bracket is narrower than `xtol + 4 eps |x|`.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::no_convergence(
            "brent",
            format!("[{a}, {b}] does not bracket a root (f = {fa:e}, {fb:e})"),
        ));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::no_convergence(
        "brent",
        format!("no convergence after {MAX_ITER} iterations"),
    ))
}

/// Newton's method kept inside a shrinking bracket; falls back to bisection
/// whenever a Newton step leaves the bracket. `f` returns `(value, slope)`
/// and must be monotone on `[lo, hi]`.
pub fn newton_bracketed<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    lo: f64,
    hi: f64,
    start: f64,
    xtol: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (f_lo, _) = f(lo);
    let (f_hi, _) = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::no_convergence(
            "newton",
            format!("[{lo}, {hi}] does not bracket a root (f = {f_lo:e}, {f_hi:e})"),
        ));
    }
    let increasing = f_hi > f_lo;
    let mut x = start.clamp(lo, hi);
    for _ in 0..MAX_ITER {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == increasing {
            hi = x;
        } else {
            lo = x;
        }
        let step = fx / dfx;
        let mut next = x - step;
        if !(next > lo && next < hi) || !step.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= xtol * x.abs().max(1.0) || hi - lo <= xtol * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::no_convergence(
        "newton",
        format!("no convergence after {MAX_ITER} iterations"),
    ))
}
