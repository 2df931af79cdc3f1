//! Scenario-file loading, resolving plug-in matrices from side files.

use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::scenario::ScenarioSpec;

use super::tables::{read_labeled_matrix, read_text};

pub fn load_scenario(path: &Path) -> Result<ScenarioSpec> {
    let text = read_text(path)?;
    let mut spec: ScenarioSpec = toml::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: 0,
        msg: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    if let Some(file) = spec.plug_in_signatures_file.take() {
        let m = read_labeled_matrix(&base.join(&file))?;
        let rows = (0..m.values.nrows())
            .map(|i| m.values.row(i).to_vec())
            .collect();
        spec.plug_in_signatures = Some(rows);
    }
    if let Some(files) = spec.plug_in_exposures_files.take() {
        let mut blocks = Vec::with_capacity(files.len());
        for file in files {
            let m = read_labeled_matrix(&base.join(&file))?;
            let block: Vec<Vec<f64>> = (0..m.values.nrows())
                .map(|i| m.values.row(i).to_vec())
                .collect();
            blocks.push(block);
        }
        spec.plug_in_exposures = Some(blocks);
    }
    spec.validate()?;
    Ok(spec)
}
