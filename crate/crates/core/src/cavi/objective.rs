//! Surrogate evidence lower bound.
//!
//! E_q[log p(θ, data)] - E_q[log q(θ)] with closed-form cross-entropy and
//! entropy terms for every conjugate factor, the Poisson likelihood
//! evaluated at the expected latent allocations (whose multinomial entropy
//! cancels the factorial terms), probit terms under the logistic
//! approximation with second-order corrections, and the weight-shape terms
//! by quadrature. The latent scores enter collapsed: the inclusion prior is
//! scored directly against the probit probability.

use ndarray::Array2;

use crate::error::Result;
use crate::kernels::linalg::Cholesky;
use crate::kernels::quadrature::QuadratureConfig;
use crate::kernels::special::{digamma_unchecked, ln_gamma_unchecked, log_probit_taylor, trigamma_unchecked};
use crate::model::data::StudyData;
use crate::model::hyper::Hyperparameters;
use crate::model::state::VariationalState;
use crate::parallel::block_sum;

use super::updates::THETA_A_EPS;
use super::walpha::WeightShapeFactor;

const LN_2PI: f64 = 1.8378770664093453;

/// Entropy of a Dirichlet with the given parameters.
fn dirichlet_entropy(theta: &[f64]) -> f64 {
    let total: f64 = theta.iter().sum();
    let k = theta.len() as f64;
    let mut h = -ln_gamma_unchecked(total) + (total - k) * digamma_unchecked(total);
    for &t in theta {
        h += ln_gamma_unchecked(t) - (t - 1.0) * digamma_unchecked(t);
    }
    h
}

/// Entropy of a Gamma(shape, rate).
fn gamma_entropy(shape: f64, rate: f64) -> f64 {
    shape - rate.ln() + ln_gamma_unchecked(shape) + (1.0 - shape) * digamma_unchecked(shape)
}

/// Deterministic lower-bound evaluation for the current state.
pub fn surrogate_objective(
    data: &[StudyData],
    hp: &Hyperparameters,
    state: &VariationalState,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let k = state.n_motifs();
    let r = state.rank();
    let p_hat = VariationalState::column_means(&state.theta_p);
    let e_log_p = {
        let mut m = Array2::<f64>::zeros((k, r));
        for (t, col) in state.theta_p.columns().into_iter().enumerate() {
            let psi_tot = digamma_unchecked(col.sum());
            for i in 0..k {
                m[[i, t]] = digamma_unchecked(col[i]) - psi_tot;
            }
        }
        m
    };

    let mut elbo = 0.0;

    // Signature factors: prior cross-entropy plus entropy.
    for t in 0..r {
        let alpha = state.alpha_p.column(t);
        let alpha_tot: f64 = alpha.sum();
        let mut cross = ln_gamma_unchecked(alpha_tot);
        for i in 0..k {
            cross += -ln_gamma_unchecked(alpha[i]) + (alpha[i] - 1.0) * e_log_p[[i, t]];
        }
        let theta: Vec<f64> = state.theta_p.column(t).iter().copied().collect();
        elbo += cross + dirichlet_entropy(&theta);
    }

    for (s, (st, d)) in state.studies.iter().zip(data).enumerate() {
        let n = d.n_subjects();
        let q = d.n_covariates() as f64;
        let (a1, a0) = (hp.alpha_e1[s], hp.alpha_e0[s]);
        let gap = a1 - a0;
        let lg_a1 = ln_gamma_unchecked(a1);
        let lg_a0 = ln_gamma_unchecked(a0);
        let e_hat = VariationalState::column_means(&st.theta_e);
        let e_beta_w = st.w_beta_shape / st.w_beta_rate;
        let e_ln_beta_w = digamma_unchecked(st.w_beta_shape) - st.w_beta_rate.ln();

        // Weight-shape factor expectations by quadrature on the stored
        // numeric density.
        let factor = WeightShapeFactor {
            lin: st.w_alpha_lin,
            n_subjects: n as f64,
        };
        let moments = factor.moments(quad)?;
        let e_alpha_w = moments.mean;
        let e_lgamma_alpha_w = moments.e_ln_gamma;

        // Probit linear predictors and quadratic forms.
        let mu = st.beta_mean.dot(&d.covariates.t());
        let mut var = Array2::<f64>::zeros((r, n));
        for t in 0..r {
            let xs = d.covariates.dot(&st.beta_cov[t]);
            for j in 0..n {
                var[[t, j]] = xs.row(j).dot(&d.covariates.row(j));
            }
        }

        // Per-subject terms: Poisson likelihood at expected allocations,
        // exposure factor, weight factor, inclusion factor.
        elbo += block_sum(n, |j| {
            let mut acc = 0.0;
            let e_ln_w = digamma_unchecked(st.w_shape[j]) - st.w_rate[j].ln();
            let e_w = st.w_shape[j] / st.w_rate[j];
            let mut theta_e_total = 0.0;
            for t in 0..r {
                theta_e_total += st.theta_e[[t, j]];
            }
            let psi_e_tot = digamma_unchecked(theta_e_total);

            // Poisson piece. Allocation shares are recomputed from the
            // current means; their multinomial entropy cancels all E[ln z!]
            // terms, leaving -ln m! per cell.
            let mut total = 0.0;
            let mut rates = vec![0.0; r];
            for i in 0..k {
                let m = d.counts[[i, j]] as f64;
                if m == 0.0 {
                    continue;
                }
                total += m;
                let mut denom = 0.0;
                for t in 0..r {
                    let rate = p_hat[[i, t]] * e_hat[[t, j]];
                    rates[t] = rate;
                    denom += rate;
                }
                for t in 0..r {
                    let share = if denom < 1e-300 { 1.0 / r as f64 } else { rates[t] / denom };
                    if share > 0.0 {
                        let z = m * share;
                        let e_log_e = digamma_unchecked(st.theta_e[[t, j]]) - psi_e_tot;
                        acc += z * (e_log_p[[i, t]] + e_log_e - share.ln());
                    }
                }
                acc -= ln_gamma_unchecked(m + 1.0);
            }
            // Σ_ir E[p]E[e] = 1 exactly (both sets of columns normalize),
            // so the rate integral contributes -E[w].
            acc += total * e_ln_w - e_w;

            // Exposure factor: mixture prior cross-entropy (log-gamma of
            // the pseudo-count total Taylor-corrected by the Bernoulli
            // variance) plus Dirichlet entropy.
            let mut mix_total = 0.0;
            let mut bern_var = 0.0;
            for t in 0..r {
                let a = st.theta_a[[t, j]];
                mix_total += a * a1 + (1.0 - a) * a0;
                bern_var += a * (1.0 - a);
            }
            acc += ln_gamma_unchecked(mix_total)
                + 0.5 * gap * gap * bern_var * trigamma_unchecked(mix_total);
            for t in 0..r {
                let a = st.theta_a[[t, j]];
                let e_log_e = digamma_unchecked(st.theta_e[[t, j]]) - psi_e_tot;
                acc += -(a * lg_a1 + (1.0 - a) * lg_a0);
                acc += (a * a1 + (1.0 - a) * a0 - 1.0) * e_log_e;
            }
            let theta: Vec<f64> = st.theta_e.column(j).iter().copied().collect();
            acc += dirichlet_entropy(&theta);

            // Weight factor.
            acc += e_alpha_w * e_ln_beta_w - e_lgamma_alpha_w + (e_alpha_w - 1.0) * e_ln_w
                - e_beta_w * e_w;
            acc += gamma_entropy(st.w_shape[j], st.w_rate[j]);

            // Inclusion factor against the probit prior.
            for t in 0..r {
                let a = st.theta_a[[t, j]].clamp(THETA_A_EPS, 1.0 - THETA_A_EPS);
                let (lp_pos, lp_neg) = log_probit_taylor(mu[[t, j]], var[[t, j]]);
                acc += a * lp_pos + (1.0 - a) * lp_neg;
                acc += -(a * a.ln() + (1.0 - a) * (1.0 - a).ln());
            }
            acc
        });

        // Coefficient and precision factors.
        for t in 0..r {
            let e_tau = st.tau_shape[t] / st.tau_rate[t];
            let e_ln_tau = digamma_unchecked(st.tau_shape[t]) - st.tau_rate[t].ln();
            let diff = &st.beta_mean.row(t) - &hp.beta0[s].row(t);
            let sq: f64 = diff.iter().map(|v| v * v).sum();
            let tr_cov = crate::kernels::linalg::trace(st.beta_cov[t].view());
            elbo += -0.5 * q * LN_2PI + 0.5 * q * e_ln_tau - 0.5 * e_tau * (tr_cov + sq);
            let ch = Cholesky::new(st.beta_cov[t].view())?;
            elbo += 0.5 * q * (1.0 + LN_2PI) + 0.5 * ch.log_det();

            elbo += hp.gamma1 * hp.gamma2.ln() - ln_gamma_unchecked(hp.gamma1)
                + (hp.gamma1 - 1.0) * e_ln_tau
                - hp.gamma2 * e_tau;
            elbo += gamma_entropy(st.tau_shape[t], st.tau_rate[t]);
        }

        // Weight-shape hyperparameter: exponential prior plus the numeric
        // factor's entropy.
        elbo += hp.lambda_w[s].ln() - hp.lambda_w[s] * e_alpha_w;
        elbo += moments.entropy;

        // Weight-rate hyperparameter.
        elbo += hp.a_w[s] * hp.b_w[s].ln() - ln_gamma_unchecked(hp.a_w[s])
            + (hp.a_w[s] - 1.0) * e_ln_beta_w
            - hp.b_w[s] * e_beta_w;
        elbo += gamma_entropy(st.w_beta_shape, st.w_beta_rate);
    }

    Ok(elbo)
}
