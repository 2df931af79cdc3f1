//! Evaluation metrics and post-fit summaries.

use ndarray::{Array1, ArrayView2};

use crate::cavi::updates::a_star_means;
use crate::error::{Error, Result};
use crate::init::strategies::cosine;
use crate::kernels::special::{std_normal_cdf, std_normal_quantile};
use crate::model::data::StudyData;
use crate::model::state::VariationalState;

pub const DEFAULT_CAPTURE_THRESHOLD: f64 = 0.8;

/// Best match for one ground-truth signature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthMatch {
    pub best_cosine: f64,
    /// Column index of the best estimated signature.
    pub matched: usize,
    pub captured: bool,
}

/// Greedy per-truth-column matching; two truth columns may match the same
/// estimate.
#[derive(Debug, Clone)]
pub struct MatchReport {
    pub threshold: f64,
    pub matches: Vec<TruthMatch>,
}

impl MatchReport {
    pub fn mean_cosine(&self) -> f64 {
        self.matches.iter().map(|m| m.best_cosine).sum::<f64>() / self.matches.len() as f64
    }

    pub fn all_captured(&self) -> bool {
        self.matches.iter().all(|m| m.captured)
    }
}

/// For each truth column, the best cosine over the estimate's columns.
pub fn cosine_match(
    estimated: ArrayView2<f64>,
    truth: ArrayView2<f64>,
    threshold: f64,
) -> Result<MatchReport> {
    if estimated.nrows() != truth.nrows() {
        return Err(Error::Structure(format!(
            "estimate has {} motifs, truth has {}",
            estimated.nrows(),
            truth.nrows()
        )));
    }
    for (name, m) in [("estimate", &estimated), ("truth", &truth)] {
        for (j, col) in m.columns().into_iter().enumerate() {
            if col.dot(&col) == 0.0 {
                return Err(Error::domain(
                    "cosine_match",
                    format!("{name} column {j} has zero norm"),
                ));
            }
        }
    }
    let matches = truth
        .columns()
        .into_iter()
        .map(|t| {
            let mut best = f64::NEG_INFINITY;
            let mut best_idx = 0;
            for (j, e) in estimated.columns().into_iter().enumerate() {
                let c = cosine(e, t);
                if c > best {
                    best = c;
                    best_idx = j;
                }
            }
            TruthMatch {
                best_cosine: best,
                matched: best_idx,
                captured: best >= threshold,
            }
        })
        .collect();
    Ok(MatchReport { threshold, matches })
}

/// Fraction of replicates that captured each truth signature.
pub fn detection_rate(reports: &[MatchReport]) -> Result<Vec<f64>> {
    let first = reports
        .first()
        .ok_or_else(|| Error::domain("detection_rate", "needs at least one report"))?;
    let r = first.matches.len();
    if reports.iter().any(|rep| rep.matches.len() != r) {
        return Err(Error::Structure("reports cover different signature counts".into()));
    }
    Ok((0..r)
        .map(|t| {
            reports.iter().filter(|rep| rep.matches[t].captured).count() as f64
                / reports.len() as f64
        })
        .collect())
}

/// Study-level inclusion prevalence: (1/N) Σ_j Φ(β̂_r·x_j) with the exact
/// normal CDF.
pub fn inclusion_prevalence(state: &VariationalState, data: &[StudyData]) -> Result<Vec<Array1<f64>>> {
    let r = state.rank();
    let mut out = Vec::with_capacity(state.studies.len());
    for (st, d) in state.studies.iter().zip(data) {
        let n = d.n_subjects();
        let mu = st.beta_mean.dot(&d.covariates.t());
        let mut prev = Array1::<f64>::zeros(r);
        for t in 0..r {
            let mut acc = 0.0;
            for j in 0..n {
                acc += std_normal_cdf(mu[[t, j]])?;
            }
            prev[t] = acc / n as f64;
        }
        out.push(prev);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CredibleInterval {
    pub low: f64,
    pub mean: f64,
    pub high: f64,
}

/// Normal-quantile credible intervals from the marginal coefficient
/// posteriors, indexed `[study][signature][covariate]`.
pub fn beta_credible_intervals(
    state: &VariationalState,
    level: f64,
) -> Result<Vec<Vec<Vec<CredibleInterval>>>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(
            "beta_credible_intervals",
            format!("level must lie in (0,1), got {level}"),
        ));
    }
    let z = std_normal_quantile(0.5 + level / 2.0)?;
    let mut out = Vec::with_capacity(state.studies.len());
    for st in &state.studies {
        let r = st.beta_mean.nrows();
        let q = st.beta_mean.ncols();
        let mut per_sig = Vec::with_capacity(r);
        for t in 0..r {
            let mut per_cov = Vec::with_capacity(q);
            for c in 0..q {
                let mean = st.beta_mean[[t, c]];
                let sd = st.beta_cov[t][[c, c]].max(0.0).sqrt();
                per_cov.push(CredibleInterval {
                    low: mean - z * sd,
                    mean,
                    high: mean + z * sd,
                });
            }
            per_sig.push(per_cov);
        }
        out.push(per_sig);
    }
    Ok(out)
}

/// Signatures whose pooled latent-score mixture means clear `cut` at the
/// given percentile (nearest-rank order statistic over all subjects of all
/// studies).
pub fn signature_filter(state: &VariationalState, percentile: f64, cut: f64) -> Result<Vec<usize>> {
    if !(percentile > 0.0 && percentile < 1.0) {
        return Err(Error::domain(
            "signature_filter",
            format!("percentile must lie in (0,1), got {percentile}"),
        ));
    }
    let r = state.rank();
    let mut pools: Vec<Vec<f64>> = vec![Vec::new(); r];
    for st in &state.studies {
        let means = a_star_means(st);
        for t in 0..r {
            pools[t].extend(means.row(t).iter());
        }
    }
    let mut retained = Vec::new();
    for (t, pool) in pools.iter_mut().enumerate() {
        pool.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = pool.len();
        let idx = ((percentile * n as f64).ceil() as usize).clamp(1, n) - 1;
        if pool[idx] >= cut {
            retained.push(t);
        }
    }
    Ok(retained)
}
