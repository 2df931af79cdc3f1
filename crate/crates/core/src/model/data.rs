//! Observed per-study data, immutable after ingestion.

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One study: a K×N counts matrix plus an N×Q covariate design whose first
/// column is the mandatory intercept. Subjects with missing covariates are
/// excluded before construction (complete cases only).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyData {
    pub study_id: String,
    /// K×N non-negative mutation-motif counts.
    pub counts: Array2<u64>,
    /// N×Q design matrix; column 0 is all ones.
    pub covariates: Array2<f64>,
    pub motif_labels: Vec<String>,
    pub subject_ids: Vec<String>,
    col_totals: Vec<f64>,
    xtx: Array2<f64>,
}

impl StudyData {
    pub fn new(
        study_id: impl Into<String>,
        counts: Array2<u64>,
        covariates: Array2<f64>,
        motif_labels: Vec<String>,
        subject_ids: Vec<String>,
    ) -> Result<Self> {
        let (k, n) = counts.dim();
        if k == 0 || n == 0 {
            return Err(Error::Structure("counts matrix must be non-empty".into()));
        }
        if motif_labels.len() != k {
            return Err(Error::Structure(format!(
                "{} motif labels for {} count rows",
                motif_labels.len(),
                k
            )));
        }
        if subject_ids.len() != n {
            return Err(Error::Structure(format!(
                "{} subject ids for {} count columns",
                subject_ids.len(),
                n
            )));
        }
        if covariates.nrows() != n {
            return Err(Error::Structure(format!(
                "covariate rows ({}) do not match subject count ({})",
                covariates.nrows(),
                n
            )));
        }
        if covariates.ncols() == 0 {
            return Err(Error::Structure("design matrix needs at least the intercept".into()));
        }
        if covariates.column(0).iter().any(|&v| v != 1.0) {
            return Err(Error::Structure(
                "first covariate column must be the all-ones intercept".into(),
            ));
        }
        if covariates.iter().any(|v| !v.is_finite()) {
            return Err(Error::Structure(
                "covariates contain non-finite entries; drop incomplete subjects at ingestion".into(),
            ));
        }
        let col_totals = (0..n)
            .map(|j| counts.column(j).iter().map(|&c| c as f64).sum())
            .collect();
        let xtx = covariates.t().dot(&covariates);
        Ok(Self {
            study_id: study_id.into(),
            counts,
            covariates,
            motif_labels,
            subject_ids,
            col_totals,
            xtx,
        })
    }

    /// Intercept-only design for studies without measured covariates.
    pub fn without_covariates(
        study_id: impl Into<String>,
        counts: Array2<u64>,
        motif_labels: Vec<String>,
        subject_ids: Vec<String>,
    ) -> Result<Self> {
        let n = counts.ncols();
        Self::new(
            study_id,
            counts,
            Array2::ones((n, 1)),
            motif_labels,
            subject_ids,
        )
    }

    pub fn n_motifs(&self) -> usize {
        self.counts.nrows()
    }

    pub fn n_subjects(&self) -> usize {
        self.counts.ncols()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.ncols()
    }

    /// Σ_i m_ij for each subject.
    pub fn column_totals(&self) -> &[f64] {
        &self.col_totals
    }

    /// Cached XᵀX for the coefficient update.
    pub fn xtx(&self) -> &Array2<f64> {
        &self.xtx
    }

    pub fn covariate_row(&self, j: usize) -> Array1<f64> {
        self.covariates.row(j).to_owned()
    }
}

/// Checks that every study shares one motif axis, in the same order.
pub fn check_motif_alignment(data: &[StudyData]) -> Result<usize> {
    let first = data
        .first()
        .ok_or_else(|| Error::Structure("at least one study is required".into()))?;
    for s in &data[1..] {
        if s.motif_labels != first.motif_labels {
            return Err(Error::Structure(format!(
                "study '{}' motif labels differ from study '{}'",
                s.study_id, first.study_id
            )));
        }
    }
    Ok(first.n_motifs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn labels(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("m{i}")).collect()
    }

    fn subjects(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("s{i}")).collect()
    }

    #[test]
    fn construction_and_caches() {
        let counts = array![[1u64, 2], [3, 4], [0, 5]];
        let d = StudyData::without_covariates("a", counts, labels(3), subjects(2)).unwrap();
        assert_eq!(d.column_totals(), &[4.0, 11.0]);
        assert_eq!(d.n_covariates(), 1);
        assert_eq!(d.xtx()[[0, 0]], 2.0);
    }

    #[test]
    fn rejects_bad_intercept_and_nan() {
        let counts = array![[1u64], [2]];
        let x = array![[0.5]];
        assert!(StudyData::new("a", counts.clone(), x, labels(2), subjects(1)).is_err());
        let x = array![[1.0, f64::NAN]];
        assert!(StudyData::new("a", counts, x, labels(2), subjects(1)).is_err());
    }

    #[test]
    fn motif_alignment() {
        let a = StudyData::without_covariates("a", array![[1u64], [2]], labels(2), subjects(1))
            .unwrap();
        let mut other = labels(2);
        other.reverse();
        let b =
            StudyData::without_covariates("b", array![[1u64], [2]], other, subjects(1)).unwrap();
        assert!(check_motif_alignment(&[a.clone(), a.clone()]).is_ok());
        assert!(check_motif_alignment(&[a, b]).is_err());
    }
}
