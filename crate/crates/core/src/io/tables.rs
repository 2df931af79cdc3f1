//! Tab-separated table primitives shared by every codec.
//!
//! Emitted tables are UTF-8, deterministic in column order, and format
//! floats with 12 significant digits.

use std::fs;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// 12-significant-digit scientific formatting for table cells.
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent.display().to_string(), e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes a labeled matrix: header `corner \t col0 \t col1 ...`, then one
/// row per label.
pub fn write_labeled_matrix(
    path: &Path,
    corner: &str,
    row_labels: &[String],
    col_labels: &[String],
    m: ArrayView2<f64>,
) -> Result<()> {
    let mut out = String::new();
    out.push_str(corner);
    for c in col_labels {
        out.push('\t');
        out.push_str(c);
    }
    out.push('\n');
    for (i, label) in row_labels.iter().enumerate() {
        out.push_str(label);
        for j in 0..col_labels.len() {
            out.push('\t');
            out.push_str(&fmt_sig12(m[[i, j]]));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

#[derive(Debug, Clone)]
pub struct LabeledMatrix {
    pub corner: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Array2<f64>,
}

/// Parses a labeled TSV matrix of floats; errors carry the line number.
pub fn read_labeled_matrix(path: &Path) -> Result<LabeledMatrix> {
    let text = read_text(path)?;
    let display = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: display.clone(),
        line: 1,
        msg: "empty file".into(),
    })?;
    let mut header_cells = header.split('\t');
    let corner = header_cells.next().unwrap_or("").to_string();
    let col_labels: Vec<String> = header_cells.map(str::to_string).collect();
    if col_labels.is_empty() {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "header has no data columns".into(),
        });
    }
    let mut row_labels = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut cells = line.split('\t');
        let label = cells.next().unwrap_or("").to_string();
        let mut row = Vec::with_capacity(col_labels.len());
        for (c, cell) in cells.enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("cell '{cell}' in column {} is not numeric", c + 2),
            })?;
            row.push(v);
        }
        if row.len() != col_labels.len() {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("row has {} cells, header has {}", row.len(), col_labels.len()),
            });
        }
        row_labels.push(label);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "matrix has no rows".into(),
        });
    }
    let values = Array2::from_shape_fn((rows.len(), col_labels.len()), |(i, j)| rows[i][j]);
    Ok(LabeledMatrix {
        corner,
        row_labels,
        col_labels,
        values,
    })
}
