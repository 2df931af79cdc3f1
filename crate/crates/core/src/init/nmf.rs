//! Frequentist NMF under generalized KL divergence, multiplicative updates.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::kernels::rng::Sampler;

/// Division floor inside the multiplicative updates.
const NMF_EPS: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct NmfSolution {
    /// K×R basis.
    pub basis: Array2<f64>,
    /// R×N coefficients.
    pub coefficients: Array2<f64>,
    /// Final generalized KL divergence D(V ‖ WH).
    pub divergence: f64,
    pub iterations: usize,
}

/// D(V ‖ WH) = Σ v ln(v/ŵ) - v + ŵ with the v = 0 terms reducing to ŵ.
pub fn kl_divergence(v: ArrayView2<f64>, wh: ArrayView2<f64>) -> f64 {
    let mut d = 0.0;
    for (&x, &y) in v.iter().zip(wh.iter()) {
        let y = y.max(NMF_EPS);
        if x > 0.0 {
            d += x * (x / y).ln() - x + y;
        } else {
            d += y;
        }
    }
    d
}

fn random_factors(k: usize, n: usize, rank: usize, mean: f64, sampler: &mut Sampler) -> (Array2<f64>, Array2<f64>) {
    let scale = (mean / rank as f64).sqrt().max(NMF_EPS);
    let w = Array2::from_shape_fn((k, rank), |_| scale * (sampler.uniform() + 0.1));
    let h = Array2::from_shape_fn((rank, n), |_| scale * (sampler.uniform() + 0.1));
    (w, h)
}

fn check_input(v: &ArrayView2<f64>, rank: usize) -> Result<()> {
    if rank < 1 {
        return Err(Error::domain("frequentist_nmf", "rank must be at least 1"));
    }
    if v.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::domain("frequentist_nmf", "input must be non-negative"));
    }
    if v.iter().all(|&x| x == 0.0) {
        return Err(Error::domain("frequentist_nmf", "input matrix is all zero"));
    }
    Ok(())
}

struct MultiplicativeUpdater<'a> {
    v: ArrayView2<'a, f64>,
    update_basis: bool,
}

impl MultiplicativeUpdater<'_> {
    /// One round of Lee–Seung KL updates; divergence is non-increasing.
    fn step(&self, w: &mut Array2<f64>, h: &mut Array2<f64>) {
        let (k, n) = self.v.dim();
        let rank = w.ncols();
        if self.update_basis {
            // W ← W ∘ ((V ⊘ WH) Hᵀ) ⊘ (1 Hᵀ)
            let wh = w.dot(h);
            let ratio = Array2::from_shape_fn((k, n), |(i, j)| {
                self.v[[i, j]] / wh[[i, j]].max(NMF_EPS)
            });
            let numer = ratio.dot(&h.t());
            let h_row_sums: Vec<f64> = (0..rank).map(|r| h.row(r).sum()).collect();
            for ((i, r), x) in w.indexed_iter_mut() {
                *x = (*x * numer[[i, r]] / h_row_sums[r].max(NMF_EPS)).max(NMF_EPS);
            }
        }
        // H ← H ∘ (Wᵀ (V ⊘ WH)) ⊘ (Wᵀ 1)
        let wh = w.dot(h);
        let ratio = Array2::from_shape_fn((k, n), |(i, j)| {
            self.v[[i, j]] / wh[[i, j]].max(NMF_EPS)
        });
        let numer = w.t().dot(&ratio);
        let w_col_sums: Vec<f64> = (0..rank).map(|r| w.column(r).sum()).collect();
        for ((r, j), x) in h.indexed_iter_mut() {
            *x = (*x * numer[[r, j]] / w_col_sums[r].max(NMF_EPS)).max(NMF_EPS);
        }
    }

    fn run(
        &self,
        mut w: Array2<f64>,
        mut h: Array2<f64>,
        max_iter: usize,
        tol: f64,
    ) -> NmfSolution {
        let mut prev = kl_divergence(self.v, w.dot(&h).view());
        let mut iterations = 0;
        for it in 1..=max_iter {
            self.step(&mut w, &mut h);
            iterations = it;
            let d = kl_divergence(self.v, w.dot(&h).view());
            if (prev - d).abs() <= tol * prev.abs().max(1.0) {
                prev = d;
                break;
            }
            prev = d;
        }
        NmfSolution {
            basis: w,
            coefficients: h,
            divergence: prev,
            iterations,
        }
    }
}

/// KL-divergence NMF with multiplicative updates from a seeded random
/// start.
pub fn frequentist_nmf(
    v: ArrayView2<f64>,
    rank: usize,
    sampler: &mut Sampler,
    max_iter: usize,
    tol: f64,
) -> Result<NmfSolution> {
    check_input(&v, rank)?;
    let (k, n) = v.dim();
    let mean = v.sum() / (k * n) as f64;
    let (w, h) = random_factors(k, n, rank, mean, sampler);
    Ok(MultiplicativeUpdater {
        v,
        update_basis: true,
    }
    .run(w, h, max_iter, tol))
}

/// Coefficient-only NMF against a fixed basis.
pub fn frequentist_nmf_fixed_basis(
    v: ArrayView2<f64>,
    basis: ArrayView2<f64>,
    sampler: &mut Sampler,
    max_iter: usize,
    tol: f64,
) -> Result<NmfSolution> {
    let rank = basis.ncols();
    check_input(&v, rank)?;
    if basis.nrows() != v.nrows() {
        return Err(Error::Structure(format!(
            "basis has {} rows, counts have {}",
            basis.nrows(),
            v.nrows()
        )));
    }
    for (r, col) in basis.columns().into_iter().enumerate() {
        if col.iter().any(|&x| x < 0.0) || col.iter().all(|&x| x == 0.0) {
            return Err(Error::domain(
                "frequentist_nmf_fixed_basis",
                format!("basis column {r} must be non-negative and not all zero"),
            ));
        }
    }
    let n = v.ncols();
    let mean = v.sum() / (v.nrows() * n) as f64;
    let (_, h) = random_factors(v.nrows(), n, rank, mean, sampler);
    Ok(MultiplicativeUpdater {
        v,
        update_basis: false,
    }
    .run(basis.to_owned(), h, max_iter, tol))
}
