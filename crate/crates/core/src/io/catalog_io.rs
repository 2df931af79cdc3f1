//! Reference-catalog codec.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::catalog::SignatureCatalog;

use super::tables::read_labeled_matrix;

/// Column sums may deviate from 1 by at most this before the file is
/// rejected; anything closer is renormalized.
const RENORMALIZE_TOL: f64 = 1e-3;

pub fn load_catalog(path: &Path) -> Result<SignatureCatalog> {
    let m = read_labeled_matrix(path)?;
    let display = path.display().to_string();
    let mut profiles = m.values;
    for (j, mut col) in profiles.columns_mut().into_iter().enumerate() {
        if col.iter().any(|&v| v < 0.0) {
            return Err(Error::Data(format!(
                "{display}: catalog column '{}' has a negative entry",
                m.col_labels[j]
            )));
        }
        let sum: f64 = col.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOL {
            return Err(Error::Data(format!(
                "{display}: catalog column '{}' sums to {sum:.6}, not 1",
                m.col_labels[j]
            )));
        }
        col.mapv_inplace(|v| v / sum);
    }
    SignatureCatalog::new(m.col_labels, m.row_labels, profiles)
}
