//! Mixture of unit-variance normals truncated at zero.
//!
//! The inclusion factor for each (study, signature, subject) is a two-part
//! mixture: weight θ on N(m, 1) restricted to [0, ∞) and weight 1-θ on
//! N(m, 1) restricted to (-∞, 0].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::special::{erfc, SQRT_2PI_INV};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormalMixture {
    /// Location m of both unit-variance components.
    pub location: f64,
    /// Mixture weight on the positive component, in [0, 1].
    pub inclusion_weight: f64,
}

impl TruncatedNormalMixture {
    pub fn new(location: f64, inclusion_weight: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::domain(
                "TruncatedNormalMixture",
                format!("location must be finite, got {location}"),
            ));
        }
        if !(0.0..=1.0).contains(&inclusion_weight) {
            return Err(Error::domain(
                "TruncatedNormalMixture",
                format!("inclusion weight must lie in [0,1], got {inclusion_weight}"),
            ));
        }
        Ok(Self {
            location,
            inclusion_weight,
        })
    }

    /// Mixture mean θ·(m + φ(m)/Φ(m)) + (1-θ)·(m - φ(m)/(1-Φ(m))).
    pub fn mean(&self) -> f64 {
        let m = self.location;
        let theta = self.inclusion_weight;
        // Hazard h(t) = φ(t)/Φ(-t) evaluated at t = -m gives φ(m)/Φ(m).
        let pos = m + hazard(-m);
        let neg = m - hazard(m);
        theta * pos + (1.0 - theta) * neg
    }
}

/// Normal hazard φ(t)/Φ(-t) = φ(t)/(1-Φ(t)), stable across the whole line.
///
/// Direct erfc evaluation is fine until the tail underflows; past t = 20 the
/// asymptotic series t + 1/t - 2/t³ + 10/t⁵ - 74/t⁷ takes over (its error is
/// below 1e-12 there).
pub fn hazard(t: f64) -> f64 {
    if t > 20.0 {
        let r = 1.0 / t;
        let r2 = r * r;
        return t + r * (1.0 - r2 * (2.0 - r2 * (10.0 - 74.0 * r2)));
    }
    let pdf = SQRT_2PI_INV * (-0.5 * t * t).exp();
    let tail = 0.5 * erfc(t * std::f64::consts::FRAC_1_SQRT_2);
    pdf / tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_mixture_has_zero_mean() {
        let mix = TruncatedNormalMixture::new(0.0, 0.5).unwrap();
        assert_abs_diff_eq!(mix.mean(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn half_normal_mean() {
        // θ = 1, m = 0: mean of the standard half-normal, √(2/π).
        let mix = TruncatedNormalMixture::new(0.0, 1.0).unwrap();
        assert_abs_diff_eq!(mix.mean(), 0.7978845608028654, epsilon = 1e-12);
    }

    #[test]
    fn monotone_in_weight() {
        for &m in &[-3.0, -0.5, 0.0, 1.2, 4.0] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=20 {
                let theta = i as f64 / 20.0;
                let mean = TruncatedNormalMixture::new(m, theta).unwrap().mean();
                assert!(mean > prev, "not increasing at m={m}, θ={theta}");
                prev = mean;
            }
        }
    }

    #[test]
    fn stable_far_in_the_tails() {
        // Positive component mean approaches m for large m; negative
        // component approaches the reciprocal-hazard bound near zero.
        let mix = TruncatedNormalMixture::new(40.0, 1.0).unwrap();
        assert_abs_diff_eq!(mix.mean(), 40.0, epsilon = 1e-9);
        let mix = TruncatedNormalMixture::new(-40.0, 0.0).unwrap();
        assert_abs_diff_eq!(mix.mean(), -40.0, epsilon = 1e-9);
        // θ = 0 with a large positive location: the mass sits just below 0.
        let mix = TruncatedNormalMixture::new(35.0, 0.0).unwrap();
        assert!(mix.mean() <= 0.0);
        assert!(mix.mean() > -1e-1);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(TruncatedNormalMixture::new(f64::NAN, 0.5).is_err());
        assert!(TruncatedNormalMixture::new(0.0, 1.5).is_err());
        assert!(TruncatedNormalMixture::new(0.0, -0.1).is_err());
    }
}
