//! Integrals of the density family, reduced to `u = log x` space.

mod expint;
mod gauss_kronrod;
mod log_kernel;

pub(crate) use expint::{en, en_scaled, ln_en};
pub use expint::{exp_integral, ln_exp_integral, ExpIntegralValue};
pub use gauss_kronrod::{integrate, integrate_to_infinity, Integral, Tolerance};
pub use log_kernel::{
    classify_divergence, divergence_profile, integrate_log_kernel, log_kernel_closed_form,
    tail_from, Convergence, DivergenceProfile, KernelValue, LogKernelIntegral,
};
