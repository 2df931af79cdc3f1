//! Discovery and recovery-discovery initialization.
//!
//! Both strategies run a frequentist NMF over the column-concatenated
//! studies (the model shares one signature matrix), encode the resulting
//! means as Dirichlet parameters at a pseudo-count scale, and leave every
//! other factor at its prior mean.

use ndarray::{Array2, ArrayView2};

use crate::cavi::updates::update_latent_counts;
use crate::error::{Error, Result};
use crate::kernels::rng::RngSuite;
use crate::model::catalog::SignatureCatalog;
use crate::model::data::{check_motif_alignment, StudyData};
use crate::model::hyper::Hyperparameters;
use crate::model::state::{prior_state, VariationalState};

use super::nmf::{frequentist_nmf, frequentist_nmf_fixed_basis};

// Stream ids carved out of the master seed.
const STREAM_NMF: u64 = 1;
const STREAM_NMF_REFIT: u64 = 2;
const STREAM_RANDOM_FILL: u64 = 3;
const STREAM_RECOVERED_EXPOSURES: u64 = 4;

/// Floor applied to encoded Dirichlet parameters; keeps every factor
/// strictly positive even when a catalog profile carries exact zeros.
const PARAM_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct InitOptions {
    /// Dirichlet parameters encode initial means as `scale · mean`.
    pub pseudocount_scale: f64,
    /// Max cosine similarity an NMF column may have with an earlier column
    /// before it is discarded.
    pub dedup_threshold: f64,
    pub nmf_max_iter: usize,
    pub nmf_tol: f64,
}

impl Default for InitOptions {
    fn default() -> Self {
        Self {
            pseudocount_scale: 100.0,
            dedup_threshold: 0.5,
            nmf_max_iter: 1000,
            nmf_tol: 1e-8,
        }
    }
}

pub fn cosine(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    let dot = a.dot(&b);
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb)
}

/// Left-to-right scan keeping the first occurrence: a column is dropped
/// when its best cosine against an already-retained column exceeds the
/// threshold.
pub fn cosine_dedup(p0: ArrayView2<f64>, threshold: f64) -> Result<Vec<usize>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::domain(
            "cosine_dedup",
            format!("threshold must lie in (0,1], got {threshold}"),
        ));
    }
    let mut retained: Vec<usize> = Vec::new();
    for j in 0..p0.ncols() {
        let col = p0.column(j);
        let dup = retained
            .iter()
            .any(|&prev| cosine(p0.column(prev), col) > threshold);
        if !dup {
            retained.push(j);
        }
    }
    Ok(retained)
}

fn concatenated_counts(data: &[StudyData]) -> Array2<f64> {
    let k = data[0].n_motifs();
    let total_n: usize = data.iter().map(|d| d.n_subjects()).sum();
    let mut v = Array2::<f64>::zeros((k, total_n));
    let mut offset = 0;
    for d in data {
        for j in 0..d.n_subjects() {
            for i in 0..k {
                v[[i, offset + j]] = d.counts[[i, j]] as f64;
            }
        }
        offset += d.n_subjects();
    }
    v
}

fn normalize_columns_in_place(m: &mut Array2<f64>) {
    for mut col in m.columns_mut() {
        let sum: f64 = col.iter().sum();
        if sum > 0.0 {
            col.mapv_inplace(|v| v / sum);
        } else {
            let uniform = 1.0 / col.len() as f64;
            col.fill(uniform);
        }
    }
}

/// Writes initial P/E means into a prior-mean state at the pseudo-count
/// scale, seeds the weight factors from the column totals, and fills the
/// latent caches.
fn encode_state(
    data: &[StudyData],
    hp: &Hyperparameters,
    alpha_p: Array2<f64>,
    recovered: usize,
    p0: &Array2<f64>,
    e0: &Array2<f64>,
    opts: &InitOptions,
    seed: u64,
) -> Result<VariationalState> {
    let scale = opts.pseudocount_scale;
    let mut state = prior_state(data, hp, alpha_p, recovered, seed);
    state.theta_p = p0.mapv(|v| (scale * v).max(PARAM_FLOOR));
    let mut offset = 0;
    for (st, d) in state.studies.iter_mut().zip(data) {
        let n = d.n_subjects();
        let block = e0.slice(ndarray::s![.., offset..offset + n]);
        st.theta_e = block.mapv(|v| (scale * v).max(PARAM_FLOOR));
        for (j, &total) in d.column_totals().iter().enumerate() {
            st.w_shape[j] = total.max(1.0);
            st.w_rate[j] = 1.0;
        }
        offset += n;
    }
    update_latent_counts(data, &mut state)?;
    Ok(state)
}

/// Discovery-only initialization: NMF at the rank cap, cosine dedup,
/// refit at the reduced rank, then random prior draws for the remaining
/// columns.
pub fn init_discovery(
    data: &[StudyData],
    hp: &Hyperparameters,
    rank: usize,
    seed: u64,
    opts: &InitOptions,
) -> Result<VariationalState> {
    let k = check_motif_alignment(data)?;
    hp.validate(data, rank)?;
    if rank < 1 {
        return Err(Error::Structure("rank must be at least 1".into()));
    }
    let suite = RngSuite::new(seed);
    let v = concatenated_counts(data);

    let first = frequentist_nmf(
        v.view(),
        rank,
        &mut suite.stream(STREAM_NMF),
        opts.nmf_max_iter,
        opts.nmf_tol,
    )?;
    let mut p_first = first.basis.clone();
    normalize_columns_in_place(&mut p_first);
    let retained = cosine_dedup(p_first.view(), opts.dedup_threshold)?;
    let reduced_rank = retained.len();

    let solution = if reduced_rank == rank {
        first
    } else {
        frequentist_nmf(
            v.view(),
            reduced_rank,
            &mut suite.stream(STREAM_NMF_REFIT),
            opts.nmf_max_iter,
            opts.nmf_tol,
        )?
    };

    // Exposure rows carry the basis column mass so P(0)·E(0) still
    // reconstructs the counts after the columns of P are normalized.
    let mut p0 = Array2::<f64>::zeros((k, rank));
    let total_n = v.ncols();
    let mut e0 = Array2::<f64>::zeros((rank, total_n));
    for r in 0..reduced_rank {
        let col_sum: f64 = solution.basis.column(r).sum();
        for i in 0..k {
            p0[[i, r]] = solution.basis[[i, r]] / col_sum.max(f64::MIN_POSITIVE);
        }
        for j in 0..total_n {
            e0[[r, j]] = solution.coefficients[[r, j]] * col_sum;
        }
    }
    let mut fill = suite.stream(STREAM_RANDOM_FILL);
    let alpha_vec: Vec<f64> = hp.alpha_p.iter().copied().collect();
    for r in reduced_rank..rank {
        let draw = fill.dirichlet(&alpha_vec)?;
        for i in 0..k {
            p0[[i, r]] = draw[i];
        }
        // Spike-concentration gamma draws: appended signatures start with
        // negligible exposure share.
        for j in 0..total_n {
            e0[[r, j]] = fill.gamma(hp.alpha_e0[0], 1.0)?;
        }
    }
    normalize_columns_in_place(&mut e0);

    let alpha_p_full = broadcast_alpha_p(&hp.alpha_p, rank);
    encode_state(data, hp, alpha_p_full, 0, &p0, &e0, opts, seed)
}

fn broadcast_alpha_p(alpha_p: &ndarray::Array1<f64>, rank: usize) -> Array2<f64> {
    let k = alpha_p.len();
    Array2::from_shape_fn((k, rank), |(i, _)| alpha_p[i])
}

/// Recovery-discovery initialization: catalog columns anchored by the
/// scaled-concentration prior, recovered exposures from a fixed-basis NMF,
/// discovered columns from prior draws.
pub fn init_recovery_discovery(
    data: &[StudyData],
    hp: &Hyperparameters,
    catalog: &SignatureCatalog,
    rank_discovered: usize,
    seed: u64,
    opts: &InitOptions,
) -> Result<VariationalState> {
    let k = check_motif_alignment(data)?;
    if catalog.profiles.nrows() != k {
        return Err(Error::Structure(format!(
            "catalog has {} motifs, counts have {k}",
            catalog.profiles.nrows()
        )));
    }
    if catalog.motif_labels != data[0].motif_labels {
        return Err(Error::Structure(
            "catalog motif labels differ from the counts data; align the catalog first".into(),
        ));
    }
    let recovered = catalog.len();
    let rank = recovered + rank_discovered;
    hp.validate(data, rank)?;
    if recovered == 0 {
        return Err(Error::Structure("catalog has no signatures".into()));
    }
    let suite = RngSuite::new(seed);
    let v = concatenated_counts(data);
    let total_n = v.ncols();

    let fixed = frequentist_nmf_fixed_basis(
        v.view(),
        catalog.profiles.view(),
        &mut suite.stream(STREAM_RECOVERED_EXPOSURES),
        opts.nmf_max_iter,
        opts.nmf_tol,
    )?;

    let mut p0 = Array2::<f64>::zeros((k, rank));
    let mut e0 = Array2::<f64>::zeros((rank, total_n));
    for r in 0..recovered {
        for i in 0..k {
            p0[[i, r]] = catalog.profiles[[i, r]];
        }
        for j in 0..total_n {
            e0[[r, j]] = fixed.coefficients[[r, j]];
        }
    }
    let mut fill = suite.stream(STREAM_RANDOM_FILL);
    let alpha_vec: Vec<f64> = hp.alpha_p.iter().copied().collect();
    for r in recovered..rank {
        let draw = fill.dirichlet(&alpha_vec)?;
        for i in 0..k {
            p0[[i, r]] = draw[i];
        }
        for j in 0..total_n {
            e0[[r, j]] = fill.gamma(hp.alpha_e0[0], 1.0)?;
        }
    }
    normalize_columns_in_place(&mut e0);

    // Effective P prior: scaled catalog for recovered columns, the base
    // concentration elsewhere.
    let mut alpha_p_full = broadcast_alpha_p(&hp.alpha_p, rank);
    for r in 0..recovered {
        let c = hp.recovery_concentration_for(r);
        for i in 0..k {
            alpha_p_full[[i, r]] = (c * catalog.profiles[[i, r]]).max(PARAM_FLOOR);
        }
    }

    let mut state = encode_state(data, hp, alpha_p_full, recovered, &p0, &e0, opts, seed)?;
    // Recovered columns start at the prior itself rather than the
    // pseudo-count encoding; its concentration dwarfs the scale anyway.
    for r in 0..recovered {
        for i in 0..k {
            state.theta_p[[i, r]] = state.alpha_p[[i, r]];
        }
    }
    // Overwriting theta_p shifts the latent allocation, so refresh caches.
    update_latent_counts(data, &mut state)?;
    Ok(state)
}
