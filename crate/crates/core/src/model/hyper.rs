//! Fixed hyperparameters of the generative model.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::data::StudyData;

/// Default spike/slab exposure concentrations: two orders of magnitude apart
/// so an excluded signature is pushed toward zero exposure without ever
/// zeroing a Dirichlet parameter.
pub const DEFAULT_ALPHA_E1: f64 = 5.0;
pub const DEFAULT_ALPHA_E0: f64 = 0.05;
pub const DEFAULT_LAMBDA_W: f64 = 0.1;
pub const DEFAULT_A_W: f64 = 0.01;
pub const DEFAULT_B_W: f64 = 0.01;
pub const DEFAULT_GAMMA1: f64 = 1.0;
pub const DEFAULT_GAMMA2: f64 = 1.0;
pub const DEFAULT_RECOVERY_CONCENTRATION: f64 = 1000.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Dirichlet concentration over motifs for discovered signatures (K).
    pub alpha_p: Array1<f64>,
    /// Slab exposure concentration, one per study.
    pub alpha_e1: Vec<f64>,
    /// Spike exposure concentration, one per study.
    pub alpha_e0: Vec<f64>,
    /// Exponential rate of the weight-shape hyperprior, one per study.
    pub lambda_w: Vec<f64>,
    /// Gamma shape of the weight-rate hyperprior, one per study.
    pub a_w: Vec<f64>,
    /// Gamma rate of the weight-rate hyperprior, one per study.
    pub b_w: Vec<f64>,
    /// Coefficient prior means, one R×Q matrix per study.
    pub beta0: Vec<Array2<f64>>,
    /// Gamma shape of the coefficient-precision prior.
    pub gamma1: f64,
    /// Gamma rate of the coefficient-precision prior.
    pub gamma2: f64,
    /// Concentration multiplier per recovered signature (broadcast if one
    /// value is given).
    pub recovery_concentration: Vec<f64>,
}

impl Hyperparameters {
    /// Conjugate-vague defaults sized for `data` at rank `r`.
    pub fn defaults(data: &[StudyData], r: usize) -> Self {
        let k = data.first().map_or(0, |d| d.n_motifs());
        let s = data.len();
        Self {
            alpha_p: Array1::ones(k),
            alpha_e1: vec![DEFAULT_ALPHA_E1; s],
            alpha_e0: vec![DEFAULT_ALPHA_E0; s],
            lambda_w: vec![DEFAULT_LAMBDA_W; s],
            a_w: vec![DEFAULT_A_W; s],
            b_w: vec![DEFAULT_B_W; s],
            beta0: data
                .iter()
                .map(|d| Array2::zeros((r, d.n_covariates())))
                .collect(),
            gamma1: DEFAULT_GAMMA1,
            gamma2: DEFAULT_GAMMA2,
            recovery_concentration: vec![DEFAULT_RECOVERY_CONCENTRATION],
        }
    }

    pub fn validate(&self, data: &[StudyData], r: usize) -> Result<()> {
        let s = data.len();
        let k = data.first().map_or(0, |d| d.n_motifs());
        if self.alpha_p.len() != k {
            return Err(Error::Structure(format!(
                "alpha_p has {} entries for {} motifs",
                self.alpha_p.len(),
                k
            )));
        }
        for (name, v) in [
            ("alpha_e1", &self.alpha_e1),
            ("alpha_e0", &self.alpha_e0),
            ("lambda_w", &self.lambda_w),
            ("a_w", &self.a_w),
            ("b_w", &self.b_w),
        ] {
            if v.len() != s {
                return Err(Error::Structure(format!(
                    "{name} has {} entries for {s} studies",
                    v.len()
                )));
            }
            if v.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::Structure(format!("{name} must be strictly positive")));
            }
        }
        if self.alpha_p.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Structure("alpha_p must be strictly positive".into()));
        }
        for s_idx in 0..s {
            if self.alpha_e1[s_idx] <= self.alpha_e0[s_idx] {
                return Err(Error::Structure(format!(
                    "study {s_idx}: slab concentration ({}) must exceed spike ({})",
                    self.alpha_e1[s_idx], self.alpha_e0[s_idx]
                )));
            }
        }
        if self.beta0.len() != s {
            return Err(Error::Structure("beta0 must have one matrix per study".into()));
        }
        for (s_idx, (b0, d)) in self.beta0.iter().zip(data).enumerate() {
            if b0.dim() != (r, d.n_covariates()) {
                return Err(Error::Structure(format!(
                    "study {s_idx}: beta0 is {:?}, expected ({r}, {})",
                    b0.dim(),
                    d.n_covariates()
                )));
            }
        }
        if !(self.gamma1 > 0.0 && self.gamma2 > 0.0) {
            return Err(Error::Structure("gamma1 and gamma2 must be positive".into()));
        }
        if self.recovery_concentration.is_empty()
            || self.recovery_concentration.iter().any(|&c| c < 100.0)
        {
            return Err(Error::Structure(
                "recovery concentrations must be at least 100".into(),
            ));
        }
        Ok(())
    }

    /// Concentration multiplier for recovered column `r` (broadcasting a
    /// single entry).
    pub fn recovery_concentration_for(&self, r: usize) -> f64 {
        if self.recovery_concentration.len() == 1 {
            self.recovery_concentration[0]
        } else {
            self.recovery_concentration[r]
        }
    }
}
