//! Deterministic numeric primitives: special functions, zero-truncated
//! normal mixtures, adaptive quadrature, small SPD solves, and the seedable
//! sampler suite. Everything here is pure and reentrant except [`Sampler`],
//! which is single-owner; derive per-worker streams from [`RngSuite`].

pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod truncnorm;

pub use linalg::{spd_solve, trace, Cholesky};
pub use quadrature::{adaptive_quadrature, QuadratureConfig};
pub use rng::{RngSuite, Sampler};
pub use special::{
    bowling_probit_approx, digamma, digamma_unchecked, ln_gamma, ln_gamma_unchecked, log_probit_taylor,
    logistic, softplus, std_normal_cdf, std_normal_pdf, std_normal_quantile, trigamma,
    trigamma_unchecked, PROBIT_APPROX_A, PROBIT_APPROX_B,
};
pub use truncnorm::TruncatedNormalMixture;
