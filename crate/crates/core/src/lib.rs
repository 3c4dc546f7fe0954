//! The log-perturbed Pareto family `f(x; θ) = a_θ x^{-θ} log^{-3} x` on
//! `x ≥ e`, `θ ≥ 1`: normalization, sampling, Fisher information and its
//! divergence at θ = 1, Cramér–Rao bounds, and estimators of θ.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dct_verify;
mod dense;
pub mod distribution;
pub mod error;
pub mod estimators;
pub mod information;
pub mod numdiff;
pub mod quadrature;
pub mod roots;

pub use distribution::{LogPareto, SampleBatch, ThetaParam};
pub use error::{Error, Result};
