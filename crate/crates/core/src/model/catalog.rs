//! Reference signature catalogs for the recovery-discovery prior.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const COLUMN_SUM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignatureCatalog {
    pub names: Vec<String>,
    pub motif_labels: Vec<String>,
    /// K×R_recov column-simplex profiles.
    pub profiles: Array2<f64>,
}

impl SignatureCatalog {
    pub fn new(names: Vec<String>, motif_labels: Vec<String>, profiles: Array2<f64>) -> Result<Self> {
        let (k, r) = profiles.dim();
        if names.len() != r {
            return Err(Error::Structure(format!(
                "{} signature names for {r} profile columns",
                names.len()
            )));
        }
        if motif_labels.len() != k {
            return Err(Error::Structure(format!(
                "{} motif labels for {k} profile rows",
                motif_labels.len()
            )));
        }
        if profiles.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Structure("catalog profiles must be non-negative".into()));
        }
        for (j, col) in profiles.columns().into_iter().enumerate() {
            let sum: f64 = col.iter().sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::Structure(format!(
                    "catalog column '{}' sums to {sum}, not 1",
                    names[j]
                )));
            }
        }
        Ok(Self {
            names,
            motif_labels,
            profiles,
        })
    }

    pub fn len(&self) -> usize {
        self.profiles.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.ncols() == 0
    }

    /// Reorders rows to the given motif order; errors if the label sets
    /// differ.
    pub fn align_to(&self, motif_labels: &[String]) -> Result<Self> {
        if self.motif_labels == motif_labels {
            return Ok(self.clone());
        }
        let mut rows = Vec::with_capacity(motif_labels.len());
        for label in motif_labels {
            let idx = self
                .motif_labels
                .iter()
                .position(|l| l == label)
                .ok_or_else(|| {
                    Error::Structure(format!("motif '{label}' missing from catalog"))
                })?;
            rows.push(idx);
        }
        if rows.len() != self.motif_labels.len() {
            return Err(Error::Structure(
                "catalog has motifs absent from the counts data".into(),
            ));
        }
        let profiles = Array2::from_shape_fn((rows.len(), self.len()), |(i, j)| {
            self.profiles[[rows[i], j]]
        });
        Self::new(self.names.clone(), motif_labels.to_vec(), profiles)
    }
}
