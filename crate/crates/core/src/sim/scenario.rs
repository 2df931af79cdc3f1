//! Declarative synthetic-scenario specifications.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One generated covariate column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovariateSpec {
    Intercept,
    Bernoulli { p: f64 },
    StandardNormal,
}

impl CovariateSpec {
    /// Parses "intercept", "bernoulli:<p>", or "normal".
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("intercept") {
            return Ok(Self::Intercept);
        }
        if s.eq_ignore_ascii_case("normal") || s.eq_ignore_ascii_case("standard-normal") {
            return Ok(Self::StandardNormal);
        }
        if let Some(rest) = s.strip_prefix("bernoulli:") {
            let p: f64 = rest
                .parse()
                .map_err(|_| Error::Data(format!("bad bernoulli probability '{rest}'")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Data(format!("bernoulli probability {p} outside [0,1]")));
            }
            return Ok(Self::Bernoulli { p });
        }
        Err(Error::Data(format!("unknown covariate spec '{s}'")))
    }
}

/// How subject-level inclusion indicators are generated.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InclusionDesign {
    /// Fixed per-study binary sharing pattern, S×R.
    Binary { patterns: Vec<Vec<u8>> },
    /// Probit model on the covariates: betas[s][r] is a Q-vector.
    Probit { betas: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ScenarioSpec {
    pub n_studies: usize,
    pub motifs: usize,
    pub signatures: usize,
    /// Subjects per study.
    pub subjects: Vec<usize>,
    /// Symmetric Dirichlet concentration for signature columns.
    pub dirichlet_concentration: f64,
    pub exposure_shape: f64,
    pub exposure_rate: f64,
    /// Expected total mutation count per subject.
    pub weight: f64,
    /// Covariate columns, first entry must be the intercept. Strings in the
    /// file form: "intercept", "bernoulli:0.2", "normal".
    pub covariates: Vec<String>,
    pub inclusion: InclusionDesign,
    /// Optional plug-in ground-truth signatures (rows of length
    /// `signatures`, one row per motif); overrides the Dirichlet draws.
    #[serde(default)]
    pub plug_in_signatures: Option<Vec<Vec<f64>>>,
    /// Optional plug-in unnormalized exposures, one R×N row-major block per
    /// study; overrides the Gamma draws and the inclusion mask.
    #[serde(default)]
    pub plug_in_exposures: Option<Vec<Vec<Vec<f64>>>>,
    /// File alternatives to the inline plug-ins, resolved relative to the
    /// spec file by the loader.
    #[serde(default)]
    pub plug_in_signatures_file: Option<String>,
    #[serde(default)]
    pub plug_in_exposures_files: Option<Vec<String>>,
}

impl ScenarioSpec {
    pub fn covariate_kinds(&self) -> Result<Vec<CovariateSpec>> {
        let kinds: Result<Vec<_>> = self.covariates.iter().map(|s| CovariateSpec::parse(s)).collect();
        let kinds = kinds?;
        if kinds.first() != Some(&CovariateSpec::Intercept) {
            return Err(Error::Data("first covariate must be the intercept".into()));
        }
        Ok(kinds)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_studies == 0 || self.motifs == 0 || self.signatures == 0 {
            return Err(Error::Data("scenario dimensions must be positive".into()));
        }
        if self.subjects.len() != self.n_studies {
            return Err(Error::Data(format!(
                "{} subject counts for {} studies",
                self.subjects.len(),
                self.n_studies
            )));
        }
        if self.subjects.iter().any(|&n| n == 0) {
            return Err(Error::Data("every study needs at least one subject".into()));
        }
        for (name, v) in [
            ("dirichlet-concentration", self.dirichlet_concentration),
            ("exposure-shape", self.exposure_shape),
            ("exposure-rate", self.exposure_rate),
            ("weight", self.weight),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Data(format!("{name} must be positive, got {v}")));
            }
        }
        let kinds = self.covariate_kinds()?;
        let q = kinds.len();
        match &self.inclusion {
            InclusionDesign::Binary { patterns } => {
                if patterns.len() != self.n_studies
                    || patterns.iter().any(|p| p.len() != self.signatures)
                {
                    return Err(Error::Data("binary patterns must be S×R".into()));
                }
                if patterns.iter().flatten().any(|&b| b > 1) {
                    return Err(Error::Data("binary patterns must contain 0/1 only".into()));
                }
            }
            InclusionDesign::Probit { betas } => {
                if betas.len() != self.n_studies
                    || betas.iter().any(|b| b.len() != self.signatures)
                    || betas.iter().flatten().any(|v| v.len() != q)
                {
                    return Err(Error::Data(format!(
                        "probit betas must be S×R vectors of length {q}"
                    )));
                }
            }
        }
        if let Some(p) = &self.plug_in_signatures {
            if p.len() != self.motifs || p.iter().any(|row| row.len() != self.signatures) {
                return Err(Error::Data("plug-in signatures must be motifs×signatures".into()));
            }
            if p.iter().flatten().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::Data("plug-in signatures must be non-negative".into()));
            }
        }
        if let Some(e) = &self.plug_in_exposures {
            if e.len() != self.n_studies {
                return Err(Error::Data("plug-in exposures need one block per study".into()));
            }
            for (s, block) in e.iter().enumerate() {
                if block.len() != self.signatures
                    || block.iter().any(|row| row.len() != self.subjects[s])
                {
                    return Err(Error::Data(format!(
                        "plug-in exposure block {s} must be signatures×subjects"
                    )));
                }
            }
        }
        Ok(())
    }
}
