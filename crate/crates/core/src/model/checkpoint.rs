//! Checkpoint archive: a versioned header line followed by a JSON body.
//!
//! JSON floats are written in shortest round-trip form, so save → load is
//! bit-exact on every parameter.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::hyper::Hyperparameters;
use crate::model::state::VariationalState;

pub const CHECKPOINT_HEADER: &str = "BAPMNMF-STATE-v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub hyperparameters: Hyperparameters,
    pub state: VariationalState,
}

impl Checkpoint {
    pub fn new(hyperparameters: Hyperparameters, state: VariationalState) -> Self {
        Self {
            hyperparameters,
            state,
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let body = serde_json::to_string(self)
            .map_err(|e| Error::Checkpoint(format!("serialization failed: {e}")))?;
        Ok(format!("{CHECKPOINT_HEADER}\n{body}\n").into_bytes())
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let text = std::str::from_utf8(bytes)
            .map_err(|_| Error::Checkpoint("archive is not valid UTF-8".into()))?;
        let (header, body) = text
            .split_once('\n')
            .ok_or_else(|| Error::Checkpoint("missing header line".into()))?;
        if header.trim_end() != CHECKPOINT_HEADER {
            return Err(Error::Checkpoint(format!(
                "unsupported archive version '{}', expected '{CHECKPOINT_HEADER}'",
                header.trim_end()
            )));
        }
        serde_json::from_str(body).map_err(|e| Error::Checkpoint(format!("malformed body: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()?).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_bytes(&bytes)
    }
}
