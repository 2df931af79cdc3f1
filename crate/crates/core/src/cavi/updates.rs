//! The ten coordinate updates of one CAVI sweep, in sweep order:
//! latent counts, weights, weight shape, weight rate, signatures, exposures,
//! inclusion, latent inclusion scores, coefficients, precisions.
//!
//! Index convention throughout: motif i ∈ 0..K, signature r ∈ 0..R,
//! subject j ∈ 0..N_s, study s ∈ 0..S.

use ndarray::{Array1, Array2};

use crate::error::Result;
use crate::kernels::linalg::{trace, Cholesky};
use crate::kernels::quadrature::QuadratureConfig;
use crate::kernels::special::{
    digamma_unchecked, ln_gamma_unchecked, log_probit_taylor, logistic, trigamma_unchecked,
};
use crate::kernels::truncnorm::TruncatedNormalMixture;
use crate::model::data::StudyData;
use crate::model::hyper::Hyperparameters;
use crate::model::state::VariationalState;
use crate::parallel::{block_reduce, map_indexed};

use super::walpha::WeightShapeFactor;

/// Inclusion means are clamped to [ε, 1-ε] so the Taylor variance terms
/// never collapse to an absorbing 0/1 state.
pub const THETA_A_EPS: f64 = 1e-12;
/// Logits are clipped before the logistic map.
pub const LOGIT_CLAMP: f64 = 30.0;

/// Step 1: refresh both latent-count caches from the current Dirichlet
/// means.
///
/// Allocation shares are p̂_ir ê_rj / Σ_t p̂_it ê_tj; a motif whose products
/// all underflow (below 1e-300) with a nonzero count is split uniformly.
pub fn update_latent_counts(data: &[StudyData], state: &mut VariationalState) -> Result<()> {
    let k = state.n_motifs();
    let r = state.rank();
    let p_hat = VariationalState::column_means(&state.theta_p);
    state.z_motif_sig.fill(0.0);

    for (st, d) in state.studies.iter_mut().zip(data) {
        let e_hat = VariationalState::column_means(&st.theta_e);
        let n = d.n_subjects();
        // Per-block partial K×R sums merged in block order keep the f64
        // reduction independent of the worker count.
        let (kr_sum, cols) = block_reduce(
            n,
            || (Array2::<f64>::zeros((k, r)), Vec::<(usize, Array1<f64>)>::new()),
            |acc, j| {
                let mut z_col = Array1::<f64>::zeros(r);
                let mut rates = vec![0.0; r];
                for i in 0..k {
                    let m = d.counts[[i, j]] as f64;
                    if m == 0.0 {
                        continue;
                    }
                    let mut denom = 0.0;
                    for t in 0..r {
                        let rate = p_hat[[i, t]] * e_hat[[t, j]];
                        rates[t] = rate;
                        denom += rate;
                    }
                    if denom < 1e-300 {
                        let share = m / r as f64;
                        for t in 0..r {
                            acc.0[[i, t]] += share;
                            z_col[t] += share;
                        }
                    } else {
                        for t in 0..r {
                            let z = m * rates[t] / denom;
                            acc.0[[i, t]] += z;
                            z_col[t] += z;
                        }
                    }
                }
                acc.1.push((j, z_col));
            },
            |acc, part| {
                acc.0 += &part.0;
                acc.1.extend(part.1);
            },
        );
        state.z_motif_sig += &kr_sum;
        for (j, col) in cols {
            st.z_sig_subject.column_mut(j).assign(&col);
        }
    }
    Ok(())
}

/// Step 2: weight factors from the column totals.
pub fn update_weights(data: &[StudyData], state: &mut VariationalState) -> Result<()> {
    for (st, d) in state.studies.iter_mut().zip(data) {
        let e_alpha = st.w_alpha_mean;
        let e_beta = st.w_beta_shape / st.w_beta_rate;
        for (j, &total) in d.column_totals().iter().enumerate() {
            st.w_shape[j] = e_alpha + total;
            st.w_rate[j] = e_beta + 1.0;
        }
    }
    Ok(())
}

/// Step 3: numeric factor for the weight-shape hyperparameter; posterior
/// mean and normalizer by quadrature.
pub fn update_w_shape(
    data: &[StudyData],
    hp: &Hyperparameters,
    state: &mut VariationalState,
    quad: &QuadratureConfig,
) -> Result<()> {
    for (s, (st, d)) in state.studies.iter_mut().zip(data).enumerate() {
        let n = d.n_subjects() as f64;
        let e_ln_beta = digamma_unchecked(st.w_beta_shape) - st.w_beta_rate.ln();
        let sum_e_ln_w: f64 = (0..d.n_subjects())
            .map(|j| digamma_unchecked(st.w_shape[j]) - st.w_rate[j].ln())
            .sum();
        let factor = WeightShapeFactor {
            lin: -hp.lambda_w[s] + n * e_ln_beta + sum_e_ln_w,
            n_subjects: n,
        };
        let m = factor.moments(quad)?;
        st.w_alpha_mean = m.mean;
        st.w_alpha_log_norm = m.log_norm;
        st.w_alpha_lin = factor.lin;
    }
    Ok(())
}

/// Step 4: Gamma factor for the weight-rate hyperparameter.
pub fn update_w_rate(data: &[StudyData], hp: &Hyperparameters, state: &mut VariationalState) -> Result<()> {
    for (s, (st, d)) in state.studies.iter_mut().zip(data).enumerate() {
        let n = d.n_subjects() as f64;
        let sum_e_w: f64 = (0..d.n_subjects()).map(|j| st.w_shape[j] / st.w_rate[j]).sum();
        st.w_beta_shape = n * st.w_alpha_mean + hp.a_w[s];
        st.w_beta_rate = sum_e_w + hp.b_w[s];
    }
    Ok(())
}

/// Step 5: signature Dirichlet parameters, prior plus motif-by-signature
/// latent sums.
pub fn update_signatures(state: &mut VariationalState) -> Result<()> {
    state.theta_p = &state.alpha_p + &state.z_motif_sig;
    Ok(())
}

/// Step 6: exposure Dirichlet parameters, spike/slab mixture pseudo-count
/// plus per-subject latent sums.
pub fn update_exposures(hp: &Hyperparameters, state: &mut VariationalState) -> Result<()> {
    for (s, st) in state.studies.iter_mut().enumerate() {
        let (a1, a0) = (hp.alpha_e1[s], hp.alpha_e0[s]);
        ndarray::Zip::from(&mut st.theta_e)
            .and(&st.theta_a)
            .and(&st.z_sig_subject)
            .for_each(|e, &a, &z| *e = a * a1 + (1.0 - a) * a0 + z);
    }
    Ok(())
}

/// Linear predictors μ_rj = β_r·x_j (R×N) and the quadratic forms
/// v_rj = x_jᵀ Σ_r x_j.
fn probit_moments(st: &crate::model::state::StudyVariational, d: &StudyData) -> (Array2<f64>, Array2<f64>) {
    let mu = st.beta_mean.dot(&d.covariates.t());
    let r = st.beta_mean.nrows();
    let n = d.n_subjects();
    let mut var = Array2::<f64>::zeros((r, n));
    for t in 0..r {
        // diag(X Σ Xᵀ) row by row
        let xs = d.covariates.dot(&st.beta_cov[t]);
        for j in 0..n {
            var[[t, j]] = xs.row(j).dot(&d.covariates.row(j));
        }
    }
    (mu, var)
}

/// Step 7: Bernoulli inclusion means.
///
/// The log-odds combine the spike/slab Dirichlet normalizer difference
/// (log-gamma at the expected pseudo-count total, with a trigamma variance
/// correction of opposite sign per branch), the exposure log-mean term, and
/// the probit log-odds under the logistic approximation with its own
/// second-order correction. All R entries of a subject update synchronously
/// from the previous sweep's means, so relabeling signatures commutes with
/// the update.
pub fn update_inclusion(data: &[StudyData], hp: &Hyperparameters, state: &mut VariationalState) -> Result<()> {
    for (s, st) in state.studies.iter_mut().enumerate() {
        let d = &data[s];
        let (a1, a0) = (hp.alpha_e1[s], hp.alpha_e0[s]);
        let gap = a1 - a0;
        let lg_a1 = ln_gamma_unchecked(a1);
        let lg_a0 = ln_gamma_unchecked(a0);
        let r = st.theta_a.nrows();
        let (mu, var) = probit_moments(st, d);
        let theta_a = &st.theta_a;
        let theta_e = &st.theta_e;

        let cols = map_indexed(d.n_subjects(), |j| {
            let mut mix_total = 0.0;
            let mut bern_var_total = 0.0;
            let mut theta_e_total = 0.0;
            for t in 0..r {
                let a = theta_a[[t, j]];
                mix_total += a * a1 + (1.0 - a) * a0;
                bern_var_total += a * (1.0 - a);
                theta_e_total += theta_e[[t, j]];
            }
            let psi_total = digamma_unchecked(theta_e_total);
            let mut col = Array1::<f64>::zeros(r);
            for t in 0..r {
                let a = theta_a[[t, j]];
                let s_minus = mix_total - (a * a1 + (1.0 - a) * a0);
                let v_minus = gap * gap * (bern_var_total - a * (1.0 - a));
                let e_log_e = digamma_unchecked(theta_e[[t, j]]) - psi_total;
                let (lp_pos, lp_neg) = log_probit_taylor(mu[[t, j]], var[[t, j]]);
                let logit = ln_gamma_unchecked(a1 + s_minus) - ln_gamma_unchecked(a0 + s_minus)
                    + 0.5
                        * v_minus
                        * (trigamma_unchecked(a1 + s_minus) - trigamma_unchecked(a0 + s_minus))
                    - lg_a1
                    + lg_a0
                    + gap * e_log_e
                    + (lp_pos - lp_neg);
                let clipped = logit.clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
                col[t] = logistic(clipped).clamp(THETA_A_EPS, 1.0 - THETA_A_EPS);
            }
            col
        });
        for (j, col) in cols.into_iter().enumerate() {
            st.theta_a.column_mut(j).assign(&col);
        }
    }
    Ok(())
}

/// Step 8: mixture locations for the latent inclusion scores.
pub fn update_a_star(data: &[StudyData], state: &mut VariationalState) -> Result<()> {
    for (st, d) in state.studies.iter_mut().zip(data) {
        st.theta_a_star = st.beta_mean.dot(&d.covariates.t());
    }
    Ok(())
}

/// Mixture means E[a*], the regression targets for the coefficient update.
pub fn a_star_means(st: &crate::model::state::StudyVariational) -> Array2<f64> {
    let mut out = st.theta_a_star.clone();
    ndarray::Zip::from(&mut out).and(&st.theta_a).for_each(|loc, &w| {
        *loc = TruncatedNormalMixture {
            location: *loc,
            inclusion_weight: w,
        }
        .mean();
    });
    out
}

/// Step 9: Gaussian coefficient factors, one ridge system per signature.
pub fn update_beta(data: &[StudyData], hp: &Hyperparameters, state: &mut VariationalState) -> Result<()> {
    for (s, st) in state.studies.iter_mut().enumerate() {
        let d = &data[s];
        let q = d.n_covariates();
        let ea_star = a_star_means(st);
        let xt_astar = d.covariates.t().dot(&ea_star.t()); // Q×R
        for t in 0..st.beta_mean.nrows() {
            let e_tau = st.tau_shape[t] / st.tau_rate[t];
            let mut a = d.xtx().clone();
            for i in 0..q {
                a[[i, i]] += e_tau;
            }
            let ch = Cholesky::new(a.view())?;
            let cov = ch.inverse();
            let rhs = &hp.beta0[s].row(t).to_owned() * e_tau + &xt_astar.column(t);
            let mean = cov.dot(&rhs);
            st.beta_mean.row_mut(t).assign(&mean);
            st.beta_cov[t] = cov;
        }
    }
    Ok(())
}

/// Step 10: Gamma precision factors.
pub fn update_tau(data: &[StudyData], hp: &Hyperparameters, state: &mut VariationalState) -> Result<()> {
    for (s, st) in state.studies.iter_mut().enumerate() {
        let q = data[s].n_covariates() as f64;
        for t in 0..st.beta_mean.nrows() {
            let diff = &st.beta_mean.row(t) - &hp.beta0[s].row(t);
            let sq: f64 = diff.iter().map(|v| v * v).sum();
            st.tau_shape[t] = hp.gamma1 + 0.5 * q;
            st.tau_rate[t] = hp.gamma2 + 0.5 * (trace(st.beta_cov[t].view()) + sq);
        }
    }
    Ok(())
}
