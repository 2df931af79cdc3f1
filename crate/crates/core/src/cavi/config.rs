//! Fit configuration and diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::quadrature::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Discovery,
    RecoveryDiscovery,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Relative parameter-change threshold for convergence.
    pub tolerance: f64,
    /// Rank cap: total rank in discovery mode, discovered-rank cap in
    /// recovery-discovery mode.
    pub rank: usize,
    pub mode: Mode,
    pub track_objective: bool,
    pub seed: u64,
    pub quadrature: QuadratureConfig,
}

impl FitConfig {
    pub fn new(rank: usize, mode: Mode, seed: u64) -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 1e-5,
            rank,
            mode,
            track_objective: false,
            seed,
            quadrature: QuadratureConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Structure("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Structure("tolerance must be positive".into()));
        }
        if self.rank < 1 {
            return Err(Error::Structure("rank cap must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    MaxIterations,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Termination::Converged => write!(f, "converged"),
            Termination::MaxIterations => write!(f, "max-iterations"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Surrogate objective per sweep (empty unless tracking is enabled).
    pub objective: Vec<f64>,
    /// Max relative parameter change per sweep.
    pub max_rel_change: Vec<f64>,
    /// Wall time per sweep, seconds.
    pub sweep_seconds: Vec<f64>,
    pub termination: Termination,
}

impl FitDiagnostics {
    pub fn iterations(&self) -> usize {
        self.max_rel_change.len()
    }
}
