//! Numeric variational factor for the per-study weight-shape
//! hyperparameter.
//!
//! The optimal factor has unnormalized log-density
//!
//! ```text
//! h(α) = t·α - N·lnΓ(α),   t = -λ + N·E[ln β] + Σ_j E[ln w_j]
//! ```
//!
//! on (0, ∞); terms constant in α are dropped before exponentiation since
//! they cancel in the normalized density. All integrals run in log space
//! with the maximum subtracted, truncated where the log-density has fallen
//! [`TAIL_DROP_NATS`] below its peak (the exponential prior factor
//! guarantees at-least-exponential decay, so the discarded tail mass is
//! negligible).

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kernels::quadrature::{adaptive_quadrature, QuadratureConfig};
use crate::kernels::special::{digamma_unchecked, ln_gamma_unchecked};

pub const TAIL_DROP_NATS: f64 = 40.0;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeightShapeFactor {
    /// Linear coefficient t of the log-density.
    pub lin: f64,
    /// Number of subjects N in the study.
    pub n_subjects: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct WeightShapeMoments {
    pub mean: f64,
    /// ln ∫ exp(h): the factor's log normalizing constant.
    pub log_norm: f64,
    pub e_ln_gamma: f64,
    /// -E[ln q(α)], for the objective.
    pub entropy: f64,
    /// Truncation point actually used.
    pub upper: f64,
}

impl WeightShapeFactor {
    pub fn log_unnorm(&self, alpha: f64) -> f64 {
        if alpha <= 0.0 {
            return f64::NEG_INFINITY;
        }
        self.lin * alpha - self.n_subjects * ln_gamma_unchecked(alpha)
    }

    /// Argmax of the log-density; 0 when the density is monotone
    /// decreasing (N = 0, or t too negative).
    fn mode(&self) -> f64 {
        if self.n_subjects == 0.0 {
            return 0.0;
        }
        let target = self.lin / self.n_subjects;
        // h'(α) = t - N ψ(α); ψ is increasing, so bracket and bisect.
        if digamma_unchecked(1e-12) >= target {
            return 0.0;
        }
        let mut lo = 1e-12;
        let mut hi = 1.0;
        while digamma_unchecked(hi) < target {
            hi *= 2.0;
            if hi > 1e14 {
                break;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if digamma_unchecked(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Point where the log-density has dropped `TAIL_DROP_NATS` below its
    /// maximum: coarse doubling, then bisection.
    fn upper_truncation(&self, mode: f64, h_max: f64) -> f64 {
        let floor = h_max - TAIL_DROP_NATS;
        let mut hi = 2.0 * mode.max(1e-6) + 1.0;
        while self.log_unnorm(hi) > floor {
            hi *= 2.0;
            if hi > 1e15 {
                return hi;
            }
        }
        let mut lo = mode.max(1e-12);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.log_unnorm(mid) > floor {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    /// Mean, normalizer, E[lnΓ(α)], and entropy by adaptive quadrature.
    pub fn moments(&self, quad: &QuadratureConfig) -> Result<WeightShapeMoments> {
        let mode = self.mode();
        let h_max = self.log_unnorm(mode.max(1e-12)).max(self.log_unnorm(1e-12));
        let upper = self.upper_truncation(mode, h_max);
        let cfg = quad.with_upper(upper)?;
        let weight = |a: f64| (self.log_unnorm(a) - h_max).exp();
        let z = adaptive_quadrature(weight, &cfg)?;
        let m1 = adaptive_quadrature(|a| a * weight(a), &cfg)?;
        let elg = adaptive_quadrature(|a| ln_gamma_unchecked(a.max(1e-300)) * weight(a), &cfg)?;
        let mean = m1 / z;
        let e_ln_gamma = elg / z;
        let log_norm = h_max + z.ln();
        // E[h(α)] = t·E[α] - N·E[lnΓ(α)], so the entropy is ln C - E[h].
        let entropy = log_norm - (self.lin * mean - self.n_subjects * e_ln_gamma);
        Ok(WeightShapeMoments {
            mean,
            log_norm,
            e_ln_gamma,
            entropy,
            upper,
        })
    }
}
