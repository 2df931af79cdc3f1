//! Covariate ingestion: subject matching, complete-case filtering,
//! intercept, and standardization.

use std::collections::HashMap;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::data::StudyData;

use super::counts::CountsTable;
use super::tables::read_text;

fn is_missing(cell: &str) -> bool {
    let t = cell.trim();
    t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan")
}

#[derive(Debug, Clone)]
pub struct CovariateTable {
    pub names: Vec<String>,
    /// subject id -> covariate row (None where any value is missing).
    pub rows: HashMap<String, Option<Vec<f64>>>,
}

pub fn load_covariate_table(path: &Path) -> Result<CovariateTable> {
    let text = read_text(path)?;
    let display = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: display.clone(),
        line: 1,
        msg: "empty covariate file".into(),
    })?;
    let names: Vec<String> = header.split('\t').skip(1).map(str::to_string).collect();
    if names.is_empty() {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "covariate file has no covariate columns".into(),
        });
    }
    let mut rows = HashMap::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut cells = line.split('\t');
        let id = cells.next().unwrap_or("").trim().to_string();
        let raw: Vec<&str> = cells.collect();
        if raw.len() != names.len() {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("row '{id}' has {} cells, header has {}", raw.len(), names.len()),
            });
        }
        let parsed: Option<Vec<f64>> = if raw.iter().any(|c| is_missing(c)) {
            None
        } else {
            let mut vals = Vec::with_capacity(raw.len());
            for (c, cell) in raw.iter().enumerate() {
                let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                    path: display.clone(),
                    line: lineno,
                    msg: format!("cell '{}' in column '{}' is not numeric", cell.trim(), names[c]),
                })?;
                vals.push(v);
            }
            Some(vals)
        };
        rows.insert(id, parsed);
    }
    Ok(CovariateTable { names, rows })
}

/// Outcome of joining a counts table with an optional covariate table.
pub struct IngestedStudy {
    pub data: StudyData,
    pub covariate_names: Vec<String>,
    pub warnings: Vec<String>,
    pub dropped_subjects: Vec<String>,
}

/// Builds a study from a counts table and an optional covariate file:
/// rows are reordered to the counts order, subjects with missing covariates
/// are dropped from both tables, an intercept column is prepended, and
/// continuous (non-binary) columns are standardized to mean 0, sd 1.
pub fn build_study(
    study_id: &str,
    counts: &CountsTable,
    covariates: Option<&CovariateTable>,
) -> Result<IngestedStudy> {
    let Some(cov) = covariates else {
        let data = StudyData::without_covariates(
            study_id,
            counts.counts.clone(),
            counts.motif_labels.clone(),
            counts.subject_ids.clone(),
        )?;
        return Ok(IngestedStudy {
            data,
            covariate_names: vec!["intercept".into()],
            warnings: Vec::new(),
            dropped_subjects: Vec::new(),
        });
    };

    let mut warnings = Vec::new();
    let mut dropped = Vec::new();
    let mut kept_idx: Vec<usize> = Vec::new();
    let mut kept_rows: Vec<Vec<f64>> = Vec::new();
    for (j, id) in counts.subject_ids.iter().enumerate() {
        match cov.rows.get(id) {
            Some(Some(vals)) => {
                kept_idx.push(j);
                kept_rows.push(vals.clone());
            }
            Some(None) => {
                warnings.push(format!("subject '{id}' dropped: missing covariate value"));
                dropped.push(id.clone());
            }
            None => {
                warnings.push(format!("subject '{id}' dropped: absent from covariate file"));
                dropped.push(id.clone());
            }
        }
    }
    for id in cov.rows.keys() {
        if !counts.subject_ids.contains(id) {
            warnings.push(format!("covariate row '{id}' has no counts column; ignored"));
        }
    }
    if kept_idx.is_empty() {
        return Err(Error::Data(format!(
            "study '{study_id}': no subject appears in both the counts and covariate files"
        )));
    }

    let q_raw = cov.names.len();
    let n = kept_idx.len();
    let mut x = Array2::<f64>::zeros((n, q_raw + 1));
    for (row, vals) in kept_rows.iter().enumerate() {
        x[[row, 0]] = 1.0;
        for (c, &v) in vals.iter().enumerate() {
            x[[row, c + 1]] = v;
        }
    }
    // Standardize continuous columns; binary 0/1 columns pass through.
    for c in 1..=q_raw {
        let col: Vec<f64> = (0..n).map(|i| x[[i, c]]).collect();
        let binary = col.iter().all(|&v| v == 0.0 || v == 1.0);
        if binary {
            continue;
        }
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        if sd > 0.0 {
            for i in 0..n {
                x[[i, c]] = (x[[i, c]] - mean) / sd;
            }
        } else {
            warnings.push(format!(
                "covariate '{}' is constant after filtering; left uncentered",
                cov.names[c - 1]
            ));
        }
    }

    let k = counts.motif_labels.len();
    let filtered = Array2::from_shape_fn((k, n), |(i, j)| counts.counts[[i, kept_idx[j]]]);
    let subject_ids: Vec<String> = kept_idx
        .iter()
        .map(|&j| counts.subject_ids[j].clone())
        .collect();
    let data = StudyData::new(
        study_id,
        filtered,
        x,
        counts.motif_labels.clone(),
        subject_ids,
    )?;
    let mut names = vec!["intercept".to_string()];
    names.extend(cov.names.iter().cloned());
    Ok(IngestedStudy {
        data,
        covariate_names: names,
        warnings,
        dropped_subjects: dropped,
    })
}
