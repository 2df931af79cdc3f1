//! Synthetic multi-study generator.
//!
//! Signature columns are Dirichlet draws (or plug-ins), unnormalized
//! exposures are Gamma draws masked by the inclusion indicators, and counts
//! are Poisson at rate w·P·e with e on the simplex, so each subject's
//! expected column total is exactly its weight.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::kernels::rng::RngSuite;
use crate::kernels::special::std_normal_cdf;
use crate::model::data::StudyData;

use super::scenario::{CovariateSpec, InclusionDesign, ScenarioSpec};

// Stream ids for the generator.
const STREAM_SIGNATURES: u64 = 10;
const STREAM_COVARIATES: u64 = 100;
const STREAM_INCLUSION: u64 = 200;
const STREAM_EXPOSURES: u64 = 300;
const STREAM_COUNTS: u64 = 400;

/// Everything the generator drew, for evaluation against fits.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// K×R column-simplex signatures.
    pub signatures: Array2<f64>,
    /// Per-study R×N simplex exposures (zero column when a subject has no
    /// active signature).
    pub exposures: Vec<Array2<f64>>,
    /// Per-study subject weights.
    pub weights: Vec<Array1<f64>>,
    /// Per-study R×N binary inclusion indicators.
    pub inclusion: Vec<Array2<u8>>,
    /// Probit coefficients when the scenario used them, R×Q per study.
    pub betas: Option<Vec<Array2<f64>>>,
}

impl GroundTruth {
    /// Study-level prevalence of each signature: mean probit probability
    /// under the true coefficients, or the binary pattern itself.
    pub fn prevalence(&self, data: &[StudyData]) -> Result<Vec<Array1<f64>>> {
        let r = self.signatures.ncols();
        let mut out = Vec::with_capacity(self.inclusion.len());
        for (s, inc) in self.inclusion.iter().enumerate() {
            let n = inc.ncols();
            let mut prev = Array1::<f64>::zeros(r);
            match &self.betas {
                Some(betas) => {
                    for t in 0..r {
                        let mut acc = 0.0;
                        for j in 0..n {
                            let mu = betas[s].row(t).dot(&data[s].covariates.row(j));
                            acc += std_normal_cdf(mu)?;
                        }
                        prev[t] = acc / n as f64;
                    }
                }
                None => {
                    for t in 0..r {
                        let acc: f64 = (0..n).map(|j| inc[[t, j]] as f64).sum();
                        prev[t] = acc / n as f64;
                    }
                }
            }
            out.push(prev);
        }
        Ok(out)
    }
}

/// Seed for replicate `rep` split off a master seed.
pub fn replicate_seed(master: u64, rep: u64) -> u64 {
    // SplitMix64 finalizer over the replicate index.
    let mut z = master ^ rep.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn simulate(spec: &ScenarioSpec, seed: u64) -> Result<(Vec<StudyData>, GroundTruth)> {
    spec.validate()?;
    let kinds = spec.covariate_kinds()?;
    let suite = RngSuite::new(seed);
    let k = spec.motifs;
    let r = spec.signatures;

    // Signatures.
    let mut signatures = Array2::<f64>::zeros((k, r));
    match &spec.plug_in_signatures {
        Some(rows) => {
            for i in 0..k {
                for t in 0..r {
                    signatures[[i, t]] = rows[i][t];
                }
            }
            for mut col in signatures.columns_mut() {
                let sum: f64 = col.iter().sum();
                if !(sum > 0.0) {
                    return Err(Error::Data("plug-in signature column is all zero".into()));
                }
                col.mapv_inplace(|v| v / sum);
            }
        }
        None => {
            let mut s = suite.stream(STREAM_SIGNATURES);
            let alpha = vec![spec.dirichlet_concentration; k];
            for t in 0..r {
                let draw = s.dirichlet(&alpha)?;
                for i in 0..k {
                    signatures[[i, t]] = draw[i];
                }
            }
        }
    }

    let motif_labels: Vec<String> = (0..k).map(|i| format!("motif{i:03}")).collect();
    let mut data = Vec::with_capacity(spec.n_studies);
    let mut exposures = Vec::with_capacity(spec.n_studies);
    let mut weights = Vec::with_capacity(spec.n_studies);
    let mut inclusion = Vec::with_capacity(spec.n_studies);

    let betas: Option<Vec<Array2<f64>>> = match &spec.inclusion {
        InclusionDesign::Probit { betas } => Some(
            betas
                .iter()
                .map(|by_r| {
                    let q = kinds.len();
                    Array2::from_shape_fn((r, q), |(t, c)| by_r[t][c])
                })
                .collect(),
        ),
        InclusionDesign::Binary { .. } => None,
    };

    for s_idx in 0..spec.n_studies {
        let n = spec.subjects[s_idx];
        let q = kinds.len();

        // Covariates.
        let mut x = Array2::<f64>::zeros((n, q));
        {
            let mut rng = suite.stream(STREAM_COVARIATES + s_idx as u64);
            for j in 0..n {
                for (c, kind) in kinds.iter().enumerate() {
                    x[[j, c]] = match kind {
                        CovariateSpec::Intercept => 1.0,
                        CovariateSpec::Bernoulli { p } => {
                            if rng.bernoulli(*p)? {
                                1.0
                            } else {
                                0.0
                            }
                        }
                        CovariateSpec::StandardNormal => rng.standard_normal(),
                    };
                }
            }
        }

        // Inclusion indicators.
        let mut a = Array2::<u8>::zeros((r, n));
        {
            let mut rng = suite.stream(STREAM_INCLUSION + s_idx as u64);
            match &spec.inclusion {
                InclusionDesign::Binary { patterns } => {
                    for t in 0..r {
                        for j in 0..n {
                            a[[t, j]] = patterns[s_idx][t];
                        }
                    }
                }
                InclusionDesign::Probit { .. } => {
                    let b = &betas.as_ref().unwrap()[s_idx];
                    for t in 0..r {
                        for j in 0..n {
                            let mu = b.row(t).dot(&x.row(j));
                            let p = std_normal_cdf(mu)?;
                            a[[t, j]] = u8::from(rng.bernoulli(p)?);
                        }
                    }
                }
            }
        }

        // Unnormalized exposures, masked; plug-ins override the mask.
        let mut raw = Array2::<f64>::zeros((r, n));
        match &spec.plug_in_exposures {
            Some(blocks) => {
                for t in 0..r {
                    for j in 0..n {
                        raw[[t, j]] = blocks[s_idx][t][j];
                        a[[t, j]] = u8::from(raw[[t, j]] > 0.0);
                    }
                }
            }
            None => {
                let mut rng = suite.stream(STREAM_EXPOSURES + s_idx as u64);
                for j in 0..n {
                    for t in 0..r {
                        // One draw per cell keeps the stream layout fixed
                        // whether or not the signature is active.
                        let g = rng.gamma(spec.exposure_shape, spec.exposure_rate)?;
                        raw[[t, j]] = if a[[t, j]] == 1 { g } else { 0.0 };
                    }
                }
            }
        }
        let mut e = raw;
        for mut col in e.columns_mut() {
            let sum: f64 = col.iter().sum();
            if sum > 0.0 {
                col.mapv_inplace(|v| v / sum);
            }
        }

        // Counts.
        let w = Array1::<f64>::from_elem(n, spec.weight);
        let mut counts = Array2::<u64>::zeros((k, n));
        {
            let mut rng = suite.stream(STREAM_COUNTS + s_idx as u64);
            for j in 0..n {
                for i in 0..k {
                    let mut rate = 0.0;
                    for t in 0..r {
                        rate += signatures[[i, t]] * e[[t, j]];
                    }
                    counts[[i, j]] = rng.poisson(w[j] * rate)?;
                }
            }
        }

        let subject_ids: Vec<String> = (0..n).map(|j| format!("study{s_idx}_subj{j:04}")).collect();
        data.push(StudyData::new(
            format!("study{s_idx}"),
            counts,
            x,
            motif_labels.clone(),
            subject_ids,
        )?);
        exposures.push(e);
        weights.push(w);
        inclusion.push(a);
    }

    Ok((
        data,
        GroundTruth {
            signatures,
            exposures,
            weights,
            inclusion,
            betas,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scenario::InclusionDesign;

    fn base_spec() -> ScenarioSpec {
        ScenarioSpec {
            n_studies: 2,
            motifs: 12,
            signatures: 3,
            subjects: vec![40, 40],
            dirichlet_concentration: 0.1,
            exposure_shape: 2.0,
            exposure_rate: 10.0,
            weight: 1000.0,
            covariates: vec!["intercept".into()],
            inclusion: InclusionDesign::Binary {
                patterns: vec![vec![1, 1, 1], vec![1, 1, 0]],
            },
            plug_in_signatures: None,
            plug_in_exposures: None,
            plug_in_signatures_file: None,
            plug_in_exposures_files: None,
        }
    }

    #[test]
    fn column_totals_match_weight_by_clt() {
        let (data, _) = simulate(&base_spec(), 99).unwrap();
        for d in &data {
            let n = d.n_subjects() as f64;
            let mean: f64 = d.column_totals().iter().sum::<f64>() / n;
            let band = 4.0 * (1000.0f64 / n).sqrt();
            assert!((mean - 1000.0).abs() <= band, "mean {mean}");
        }
    }

    #[test]
    fn masked_signature_has_zero_exposure() {
        let (_, truth) = simulate(&base_spec(), 7).unwrap();
        // Study 1 masks signature 2 everywhere.
        for j in 0..40 {
            assert_eq!(truth.exposures[1][[2, j]], 0.0);
            assert_eq!(truth.inclusion[1][[2, j]], 0);
        }
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let (a, ta) = simulate(&base_spec(), 5).unwrap();
        let (b, tb) = simulate(&base_spec(), 5).unwrap();
        assert_eq!(a[0].counts, b[0].counts);
        assert_eq!(ta.signatures, tb.signatures);
        let (c, _) = simulate(&base_spec(), 6).unwrap();
        assert_ne!(a[0].counts, c[0].counts);
    }

    #[test]
    fn probit_design_draws_covariates_and_masks() {
        let mut spec = base_spec();
        spec.covariates = vec!["intercept".into(), "bernoulli:0.2".into(), "normal".into()];
        spec.inclusion = InclusionDesign::Probit {
            betas: vec![
                vec![vec![3.0, 0.0, 0.0], vec![-1.0, 1.0, 1.0], vec![-8.0, 0.0, 0.0]],
                vec![vec![3.0, 0.0, 0.0], vec![0.0, 0.5, -0.5], vec![3.0, 0.0, 0.0]],
            ],
        };
        let (data, truth) = simulate(&spec, 11).unwrap();
        assert_eq!(data[0].n_covariates(), 3);
        // Intercept +3: essentially always included; -8: essentially never.
        let inc0: u32 = (0..40).map(|j| truth.inclusion[0][[0, j]] as u32).sum();
        let inc2: u32 = (0..40).map(|j| truth.inclusion[0][[2, j]] as u32).sum();
        assert!(inc0 >= 39);
        assert_eq!(inc2, 0);
        let prev = truth.prevalence(&data).unwrap();
        assert!(prev[0][0] > 0.97);
        assert!(prev[0][2] < 0.01);
    }

    #[test]
    fn plug_in_signatures_are_used_verbatim() {
        let mut spec = base_spec();
        spec.motifs = 3;
        spec.signatures = 2;
        spec.inclusion = InclusionDesign::Binary {
            patterns: vec![vec![1, 1], vec![1, 1]],
        };
        spec.plug_in_signatures = Some(vec![
            vec![0.5, 0.2],
            vec![0.25, 0.2],
            vec![0.25, 0.6],
        ]);
        let (_, truth) = simulate(&spec, 1).unwrap();
        assert!((truth.signatures[[0, 0]] - 0.5).abs() < 1e-12);
        assert!((truth.signatures[[2, 1]] - 0.6).abs() < 1e-12);
    }

    #[test]
    fn replicate_seeds_differ() {
        let seeds: Vec<u64> = (0..10).map(|r| replicate_seed(42, r)).collect();
        let mut unique = seeds.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), seeds.len());
    }
}
