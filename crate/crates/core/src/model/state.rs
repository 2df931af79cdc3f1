//! The full variational state: one factor block per model parameter, plus
//! the two sufficient-statistic caches that stand in for the latent count
//! array (K×R motif-by-signature sums and per-subject signature sums; the
//! full K×R×N array is never materialized).

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::model::data::StudyData;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyVariational {
    /// Dirichlet exposure parameters, R×N.
    pub theta_e: Array2<f64>,
    /// Bernoulli inclusion means, R×N.
    pub theta_a: Array2<f64>,
    /// Locations of the truncated-normal mixtures, R×N.
    pub theta_a_star: Array2<f64>,
    /// Coefficient posterior means, R×Q.
    pub beta_mean: Array2<f64>,
    /// Coefficient posterior covariances, one Q×Q matrix per signature.
    pub beta_cov: Vec<Array2<f64>>,
    /// Gamma precision factors, R each.
    pub tau_shape: Array1<f64>,
    pub tau_rate: Array1<f64>,
    /// Gamma weight factors, N each.
    pub w_shape: Array1<f64>,
    pub w_rate: Array1<f64>,
    /// Posterior mean of the weight-shape hyperparameter.
    pub w_alpha_mean: f64,
    /// Log normalizing constant of its numeric factor.
    pub w_alpha_log_norm: f64,
    /// Linear coefficient t of the stored numeric factor
    /// q(α) ∝ exp(t·α - N·lnΓ(α)).
    pub w_alpha_lin: f64,
    /// Gamma factor of the weight-rate hyperparameter.
    pub w_beta_shape: f64,
    pub w_beta_rate: f64,
    /// Per-subject signature sums of the latent counts, R×N.
    pub z_sig_subject: Array2<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationalState {
    /// Dirichlet signature parameters, K×R.
    pub theta_p: Array2<f64>,
    /// Effective Dirichlet prior for P: recovered columns carry the scaled
    /// catalog profile, discovered columns the base concentration.
    pub alpha_p: Array2<f64>,
    /// Number of leading recovered signature columns.
    pub recovered: usize,
    pub studies: Vec<StudyVariational>,
    /// Motif-by-signature sums of the latent counts over all studies, K×R.
    pub z_motif_sig: Array2<f64>,
    pub iteration: u64,
    pub seed: u64,
}

impl VariationalState {
    pub fn rank(&self) -> usize {
        self.theta_p.ncols()
    }

    pub fn n_motifs(&self) -> usize {
        self.theta_p.nrows()
    }

    pub fn n_studies(&self) -> usize {
        self.studies.len()
    }

    /// Dirichlet mean of a parameter matrix, column-normalized.
    pub fn column_means(theta: &Array2<f64>) -> Array2<f64> {
        let mut out = theta.clone();
        for mut col in out.columns_mut() {
            let sum: f64 = col.iter().sum();
            col.mapv_inplace(|v| v / sum);
        }
        out
    }

    /// Posterior-mean summaries of every factor.
    pub fn point_estimates(&self) -> PointEstimates {
        let p_hat = Self::column_means(&self.theta_p);
        let mut exposures = Vec::with_capacity(self.studies.len());
        let mut weights = Vec::with_capacity(self.studies.len());
        let mut inclusion = Vec::with_capacity(self.studies.len());
        for st in &self.studies {
            exposures.push(Self::column_means(&st.theta_e));
            weights.push(&st.w_shape / &st.w_rate);
            inclusion.push(st.theta_a.clone());
        }
        PointEstimates {
            p_hat,
            exposures,
            weights,
            inclusion,
        }
    }
}

/// Posterior means: P̂ and Ê columns on the simplex, ŵ = shape/rate,
/// â = inclusion means.
#[derive(Debug, Clone)]
pub struct PointEstimates {
    pub p_hat: Array2<f64>,
    pub exposures: Vec<Array2<f64>>,
    pub weights: Vec<Array1<f64>>,
    pub inclusion: Vec<Array2<f64>>,
}

/// Prior-mean state: the starting point every initializer refines.
///
/// Signature and exposure Dirichlet parameters are set to the prior
/// concentrations; the probit layer starts at its prior (inclusion 1/2 under
/// a zero coefficient mean), and the weight layer at the hyperprior means.
pub fn prior_state(
    data: &[StudyData],
    hp: &crate::model::hyper::Hyperparameters,
    alpha_p: Array2<f64>,
    recovered: usize,
    seed: u64,
) -> VariationalState {
    let r = alpha_p.ncols();
    let studies = data
        .iter()
        .enumerate()
        .map(|(s, d)| {
            let n = d.n_subjects();
            let q = d.n_covariates();
            let prior_tau = hp.gamma1 / hp.gamma2;
            StudyVariational {
                theta_e: Array2::from_elem((r, n), 1.0),
                theta_a: Array2::from_elem((r, n), 0.5),
                theta_a_star: Array2::zeros((r, n)),
                beta_mean: hp.beta0[s].clone(),
                beta_cov: (0..r)
                    .map(|_| Array2::eye(q) / prior_tau)
                    .collect(),
                tau_shape: Array1::from_elem(r, hp.gamma1),
                tau_rate: Array1::from_elem(r, hp.gamma2),
                w_shape: Array1::from_elem(n, 1.0),
                w_rate: Array1::from_elem(n, 1.0),
                w_alpha_mean: 1.0 / hp.lambda_w[s],
                w_alpha_log_norm: 0.0,
                w_alpha_lin: -hp.lambda_w[s],
                w_beta_shape: hp.a_w[s],
                w_beta_rate: hp.b_w[s],
                z_sig_subject: Array2::zeros((r, n)),
            }
        })
        .collect();
    let k = alpha_p.nrows();
    VariationalState {
        theta_p: alpha_p.clone(),
        alpha_p,
        recovered,
        studies,
        z_motif_sig: Array2::zeros((k, r)),
        iteration: 0,
        seed,
    }
}
