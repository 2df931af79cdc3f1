//! Counts-matrix codec: header row of subject ids, first column of motif
//! labels, non-negative integer cells.

use std::collections::HashSet;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

use super::tables::{read_text, write_text};

#[derive(Debug, Clone)]
pub struct CountsTable {
    pub motif_labels: Vec<String>,
    pub subject_ids: Vec<String>,
    pub counts: Array2<u64>,
}

pub fn load_counts(path: &Path) -> Result<CountsTable> {
    let text = read_text(path)?;
    let display = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        path: display.clone(),
        line: 1,
        msg: "empty counts file".into(),
    })?;
    let subject_ids: Vec<String> = header.split('\t').skip(1).map(str::to_string).collect();
    if subject_ids.is_empty() {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "counts header has no subjects".into(),
        });
    }
    let mut motif_labels: Vec<String> = Vec::new();
    let mut seen = HashSet::new();
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let mut cells = line.split('\t');
        let label = cells.next().unwrap_or("").to_string();
        if label.is_empty() {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: "missing motif label".into(),
            });
        }
        if !seen.insert(label.clone()) {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!("duplicate motif label '{label}'"),
            });
        }
        let mut row = Vec::with_capacity(subject_ids.len());
        for (c, cell) in cells.enumerate() {
            let v: u64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!(
                    "cell '{}' for subject '{}' is not a non-negative integer",
                    cell.trim(),
                    subject_ids.get(c).map(String::as_str).unwrap_or("?")
                ),
            })?;
            row.push(v);
        }
        if row.len() != subject_ids.len() {
            return Err(Error::Parse {
                path: display.clone(),
                line: lineno,
                msg: format!(
                    "row '{label}' has {} cells, header has {}",
                    row.len(),
                    subject_ids.len()
                ),
            });
        }
        motif_labels.push(label);
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: display,
            line: 1,
            msg: "counts file has no motif rows".into(),
        });
    }
    let counts = Array2::from_shape_fn((rows.len(), subject_ids.len()), |(i, j)| rows[i][j]);
    Ok(CountsTable {
        motif_labels,
        subject_ids,
        counts,
    })
}

pub fn write_counts(path: &Path, table: &CountsTable) -> Result<()> {
    let mut out = String::from("motif");
    for s in &table.subject_ids {
        out.push('\t');
        out.push_str(s);
    }
    out.push('\n');
    for (i, label) in table.motif_labels.iter().enumerate() {
        out.push_str(label);
        for j in 0..table.subject_ids.len() {
            out.push('\t');
            out.push_str(&table.counts[[i, j]].to_string());
        }
        out.push('\n');
    }
    write_text(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn round_trip_preserves_counts() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        let table = CountsTable {
            motif_labels: vec!["A[C>A]A".into(), "A[C>G]T".into()],
            subject_ids: vec!["p1".into(), "p2".into(), "p3".into()],
            counts: array![[0u64, 5, 12], [7, 0, 199]],
        };
        write_counts(&path, &table).unwrap();
        let back = load_counts(&path).unwrap();
        assert_eq!(back.counts, table.counts);
        assert_eq!(back.motif_labels, table.motif_labels);
        assert_eq!(back.subject_ids, table.subject_ids);
    }

    #[test]
    fn negative_cell_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "motif\tp1\nm1\t-1\n").unwrap();
        match load_counts(&path) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("p1"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_motif_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "motif\tp1\nm1\t1\nm1\t2\n").unwrap();
        assert!(load_counts(&path).is_err());
    }

    #[test]
    fn ragged_row_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.tsv");
        std::fs::write(&path, "motif\tp1\tp2\nm1\t1\n").unwrap();
        match load_counts(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
