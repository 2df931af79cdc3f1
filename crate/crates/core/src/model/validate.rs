//! Structural invariant checks over a full variational state.

use crate::error::{Error, Result};
use crate::kernels::Cholesky;
use crate::model::data::StudyData;
use crate::model::state::VariationalState;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Which invariant failed.
    pub what: String,
    /// Coordinates of the first offending entry.
    pub location: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }

    fn push(&mut self, what: impl Into<String>, location: impl Into<String>) {
        self.violations.push(Violation {
            what: what.into(),
            location: location.into(),
        });
    }
}

/// Asserts every structural invariant of the state against the data it was
/// built for. Dimension mismatches are hard errors; value-level violations
/// are collected into the report with their coordinates.
pub fn validate_state(state: &VariationalState, data: &[StudyData]) -> Result<ValidationReport> {
    let r = state.rank();
    let k = state.n_motifs();
    if state.studies.len() != data.len() {
        return Err(Error::Structure(format!(
            "state has {} studies, data has {}",
            state.studies.len(),
            data.len()
        )));
    }
    if state.alpha_p.dim() != (k, r) || state.z_motif_sig.dim() != (k, r) {
        return Err(Error::Structure("prior/cache dimensions differ from theta_p".into()));
    }
    if state.recovered > r {
        return Err(Error::Structure(format!(
            "{} recovered columns exceed rank {r}",
            state.recovered
        )));
    }
    for (s, (st, d)) in state.studies.iter().zip(data).enumerate() {
        let n = d.n_subjects();
        let q = d.n_covariates();
        if d.n_motifs() != k {
            return Err(Error::Structure(format!("study {s}: motif count mismatch")));
        }
        if st.theta_e.dim() != (r, n)
            || st.theta_a.dim() != (r, n)
            || st.theta_a_star.dim() != (r, n)
            || st.z_sig_subject.dim() != (r, n)
        {
            return Err(Error::Structure(format!("study {s}: factor shape mismatch")));
        }
        if st.beta_mean.dim() != (r, q) || st.beta_cov.len() != r {
            return Err(Error::Structure(format!("study {s}: coefficient shape mismatch")));
        }
        if st.tau_shape.len() != r
            || st.tau_rate.len() != r
            || st.w_shape.len() != n
            || st.w_rate.len() != n
        {
            return Err(Error::Structure(format!("study {s}: gamma factor length mismatch")));
        }
    }

    let mut report = ValidationReport::default();
    for ((i, j), &v) in state.theta_p.indexed_iter() {
        if !(v > 0.0) || !v.is_finite() {
            report.push("non-positive Dirichlet signature parameter", format!("theta_p[{i},{j}] = {v}"));
        }
    }
    for ((i, j), &v) in state.alpha_p.indexed_iter() {
        if !(v > 0.0) || !v.is_finite() {
            report.push("non-positive signature prior", format!("alpha_p[{i},{j}] = {v}"));
        }
    }
    for (s, (st, d)) in state.studies.iter().zip(data).enumerate() {
        for ((r_idx, j), &v) in st.theta_e.indexed_iter() {
            if !(v > 0.0) || !v.is_finite() {
                report.push(
                    "non-positive Dirichlet exposure parameter",
                    format!("study {s}: theta_e[{r_idx},{j}] = {v}"),
                );
            }
        }
        for ((r_idx, j), &v) in st.theta_a.indexed_iter() {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                report.push(
                    "inclusion mean outside [0,1]",
                    format!("study {s}: theta_a[{r_idx},{j}] = {v}"),
                );
            }
        }
        for (name, vals) in [("tau_shape", &st.tau_shape), ("tau_rate", &st.tau_rate)] {
            for (r_idx, &v) in vals.iter().enumerate() {
                if !(v > 0.0) || !v.is_finite() {
                    report.push("non-positive Gamma parameter", format!("study {s}: {name}[{r_idx}] = {v}"));
                }
            }
        }
        for (name, vals) in [("w_shape", &st.w_shape), ("w_rate", &st.w_rate)] {
            for (j, &v) in vals.iter().enumerate() {
                if !(v > 0.0) || !v.is_finite() {
                    report.push("non-positive Gamma parameter", format!("study {s}: {name}[{j}] = {v}"));
                }
            }
        }
        for (name, v) in [
            ("w_alpha_mean", st.w_alpha_mean),
            ("w_beta_shape", st.w_beta_shape),
            ("w_beta_rate", st.w_beta_rate),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                report.push("non-positive weight hyperparameter factor", format!("study {s}: {name} = {v}"));
            }
        }
        for (r_idx, cov) in st.beta_cov.iter().enumerate() {
            if Cholesky::new(cov.view()).is_err() {
                report.push(
                    "coefficient covariance not symmetric positive-definite",
                    format!("study {s}: beta_cov[{r_idx}]"),
                );
            }
        }
        // Per-subject signature sums must reproduce the observed column
        // totals (the latent expectations close the multinomial exactly).
        for (j, &total) in d.column_totals().iter().enumerate() {
            let zsum: f64 = st.z_sig_subject.column(j).sum();
            if (zsum - total).abs() > 1e-9 * (1.0 + total) {
                report.push(
                    "latent-count cache does not match column total",
                    format!(
                        "study {s}: subject '{}' has z-sum {zsum}, counts {total}",
                        d.subject_ids[j]
                    ),
                );
            }
        }
    }
    Ok(report)
}
