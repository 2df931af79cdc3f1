//! Bayesian probit multi-study non-negative matrix factorization.
//!
//! Factorizes per-study count matrices M_s ≈ P E_s W_s with one shared
//! signature matrix P, study-specific simplex exposures E_s, and per-subject
//! weights, with a probit layer that ties subject-level signature inclusion
//! to covariates. Estimation is coordinate-ascent variational inference;
//! see [`cavi::fit`] for the sweep, [`init`] for the NMF-backed starting
//! points, and [`sim`] for the synthetic-data and evaluation harness.

pub mod cavi;
pub mod error;
pub mod init;
pub mod io;
pub mod kernels;
pub mod model;
pub mod parallel;
pub mod sim;

pub use error::{Error, Result};
