//! Flat key-value run configuration with typed validation.
//!
//! Every hyperparameter and fit-configuration field is addressable. Scalar
//! values broadcast across studies; comma-separated lists give per-study
//! values. Lines are `key = value`, `#` starts a comment.

use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;

use crate::cavi::config::{FitConfig, Mode};
use crate::error::{Error, Result};
use crate::init::strategies::InitOptions;
use crate::kernels::quadrature::QuadratureConfig;
use crate::model::data::StudyData;
use crate::model::hyper::Hyperparameters;

use super::tables::read_text;

const KNOWN_KEYS: &[&str] = &[
    "max_iterations",
    "tolerance",
    "rank",
    "mode",
    "track_objective",
    "checkpoint_interval",
    "quadrature_rel_tol",
    "quadrature_max_subdivisions",
    "alpha_p",
    "alpha_e1",
    "alpha_e0",
    "lambda_w",
    "a_w",
    "b_w",
    "beta0",
    "gamma1",
    "gamma2",
    "recovery_concentration",
    "dedup_threshold",
    "pseudocount_scale",
    "nmf_max_iter",
    "nmf_tol",
];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: origin.to_string(),
                line: idx + 1,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse {
                    path: origin.to_string(),
                    line: idx + 1,
                    msg: format!("unknown configuration key '{key}'"),
                });
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?, &path.display().to_string())
    }

    fn typed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                Error::Data(format!("configuration key '{key}': cannot parse '{v}'"))
            }),
        }
    }

    fn per_study(&self, key: &str, n_studies: usize, default: f64) -> Result<Vec<f64>> {
        match self.values.get(key) {
            None => Ok(vec![default; n_studies]),
            Some(v) => {
                let parts: Result<Vec<f64>> = v
                    .split(',')
                    .map(|p| {
                        p.trim().parse::<f64>().map_err(|_| {
                            Error::Data(format!("configuration key '{key}': bad value '{p}'"))
                        })
                    })
                    .collect();
                let parts = parts?;
                match parts.len() {
                    1 => Ok(vec![parts[0]; n_studies]),
                    n if n == n_studies => Ok(parts),
                    n => Err(Error::Data(format!(
                        "configuration key '{key}': {n} values for {n_studies} studies"
                    ))),
                }
            }
        }
    }

    pub fn rank(&self) -> Result<Option<usize>> {
        self.typed("rank")
    }

    pub fn mode(&self) -> Result<Option<Mode>> {
        match self.values.get("mode").map(String::as_str) {
            None => Ok(None),
            Some("discovery") => Ok(Some(Mode::Discovery)),
            Some("recovery-discovery") => Ok(Some(Mode::RecoveryDiscovery)),
            Some(other) => Err(Error::Data(format!(
                "mode must be 'discovery' or 'recovery-discovery', got '{other}'"
            ))),
        }
    }

    pub fn checkpoint_interval(&self) -> Result<usize> {
        Ok(self.typed("checkpoint_interval")?.unwrap_or(0))
    }

    pub fn build_fit_config(&self, rank: usize, mode: Mode, seed: u64) -> Result<FitConfig> {
        let mut cfg = FitConfig::new(rank, mode, seed);
        if let Some(v) = self.typed("max_iterations")? {
            cfg.max_iterations = v;
        }
        if let Some(v) = self.typed("tolerance")? {
            cfg.tolerance = v;
        }
        if let Some(v) = self.typed("track_objective")? {
            cfg.track_objective = v;
        }
        let rel_tol = self
            .typed("quadrature_rel_tol")?
            .unwrap_or(cfg.quadrature.relative_tolerance);
        let max_sub = self
            .typed("quadrature_max_subdivisions")?
            .unwrap_or(cfg.quadrature.max_subdivisions);
        cfg.quadrature = QuadratureConfig::new(0.0, 1.0, rel_tol, max_sub)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn build_hyperparameters(&self, data: &[StudyData], rank: usize) -> Result<Hyperparameters> {
        let mut hp = Hyperparameters::defaults(data, rank);
        let s = data.len();
        if let Some(v) = self.typed::<f64>("alpha_p")? {
            hp.alpha_p.fill(v);
        }
        hp.alpha_e1 = self.per_study("alpha_e1", s, crate::model::hyper::DEFAULT_ALPHA_E1)?;
        hp.alpha_e0 = self.per_study("alpha_e0", s, crate::model::hyper::DEFAULT_ALPHA_E0)?;
        hp.lambda_w = self.per_study("lambda_w", s, crate::model::hyper::DEFAULT_LAMBDA_W)?;
        hp.a_w = self.per_study("a_w", s, crate::model::hyper::DEFAULT_A_W)?;
        hp.b_w = self.per_study("b_w", s, crate::model::hyper::DEFAULT_B_W)?;
        if let Some(v) = self.typed::<f64>("beta0")? {
            hp.beta0 = data
                .iter()
                .map(|d| Array2::from_elem((rank, d.n_covariates()), v))
                .collect();
        }
        if let Some(v) = self.typed("gamma1")? {
            hp.gamma1 = v;
        }
        if let Some(v) = self.typed("gamma2")? {
            hp.gamma2 = v;
        }
        if let Some(raw) = self.values.get("recovery_concentration") {
            let parts: Result<Vec<f64>> = raw
                .split(',')
                .map(|p| {
                    p.trim().parse::<f64>().map_err(|_| {
                        Error::Data(format!("recovery_concentration: bad value '{p}'"))
                    })
                })
                .collect();
            hp.recovery_concentration = parts?;
        }
        hp.validate(data, rank)?;
        Ok(hp)
    }

    pub fn build_init_options(&self) -> Result<InitOptions> {
        let mut opts = InitOptions::default();
        if let Some(v) = self.typed("dedup_threshold")? {
            opts.dedup_threshold = v;
        }
        if let Some(v) = self.typed("pseudocount_scale")? {
            opts.pseudocount_scale = v;
        }
        if let Some(v) = self.typed("nmf_max_iter")? {
            opts.nmf_max_iter = v;
        }
        if let Some(v) = self.typed("nmf_tol")? {
            opts.nmf_tol = v;
        }
        Ok(opts)
    }
}
