//! Richardson-extrapolated finite differences.

/// Forward difference at `x` with two levels of Richardson extrapolation;
/// only evaluates `f` on `[x, x + h]`. Error is `O(h³)`.
pub fn forward_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let d = |fx: f64, step: f64| (fx - f0) / step;
    let d1 = d(f(x + h), h);
    let d2 = d(f(x + h / 2.0), h / 2.0);
    let d4 = d(f(x + h / 4.0), h / 4.0);
    let r1 = 2.0 * d2 - d1;
    let r2 = 2.0 * d4 - d2;
    (4.0 * r2 - r1) / 3.0
}

/// One-sided derivative at `x` for functions whose expansion carries
/// logarithmic terms, `f(x + h) = f(x) + f'(x) h + c h² ln h + d h² + ...`,
/// as `1/E_n(s)` does at `s = 0`. Plain Richardson cannot cancel `h ln h` in
/// the difference quotient; this fits the quotients at `h, h/2, ..., h/16` to
/// `D + b₁ h ln h + b₂ h + b₃ h² ln h + b₄ h²` and returns `D`.
pub fn forward_derivative_log<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    let f0 = f(x);
    let steps: [f64; 5] = std::array::from_fn(|i| h / f64::from(1u32 << i));
    let basis = |t: f64| [1.0, t * t.ln(), t, t * t * t.ln(), t * t];
    let scale = basis(h).map(|b| if b == 0.0 { 1.0 } else { b.abs() });
    let m: [[f64; 5]; 5] = steps.map(|t| {
        let b = basis(t);
        std::array::from_fn(|j| b[j] / scale[j])
    });
    let rhs = steps.map(|t| (f(x + t) - f0) / t);
    crate::dense::solve(m, rhs).map_or(f64::NAN, |c| c[0])
}

/// Backward counterpart of [`forward_derivative`].
pub fn backward_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    forward_derivative(|t| -f(-t), -x, h)
}

/// Central difference with one Richardson step. Error is `O(h⁴)`.
pub fn central_derivative<F: FnMut(f64) -> f64>(mut f: F, x: f64, h: f64) -> f64 {
    let mut d = |step: f64| (f(x + step) - f(x - step)) / (2.0 * step);
    let coarse = d(h);
    let fine = d(h / 2.0);
    (4.0 * fine - coarse) / 3.0
}
