//! Independent oracles for individual operations: series evaluations,
//! enumeration, direct linear algebra, sampling estimators, and the
//! weight-layer Gibbs sampler. Each oracle lives in test code and never
//! calls the computational path it checks.

mod common;

use bapmnmf::cavi::updates::{update_a_star, update_beta, update_inclusion, update_tau};
use bapmnmf::kernels::{ln_gamma_unchecked, QuadratureConfig};
use bapmnmf::model::{prior_state, Hyperparameters, StudyData};
use ndarray::{array, Array1, Array2};
use rand::prelude::*;
use rand_distr::StandardNormal;

#[test]
fn normal_cdf_matches_maclaurin_series() {
    // The library CDF is a rational erfc approximation; the oracle is the
    // erf Maclaurin series, a wholly different route.
    for &x in &[-3.0, -1.96, -0.5, 0.0, 0.3, 1.0, 1.96, 2.8] {
        let lib = bapmnmf::kernels::std_normal_cdf(x).unwrap();
        let oracle = common::phi_series(x);
        assert!(
            (lib - oracle).abs() <= 1e-12,
            "x = {x}: {lib} vs series {oracle}"
        );
    }
    // Frozen value computed with the series oracle.
    assert!((common::phi_series(1.96) - 0.9750021048517795).abs() < 1e-13);
}

#[test]
fn ln_gamma_matches_factorial_enumeration() {
    // For integer arguments, ln Γ(n) = Σ ln k is exact enumeration.
    for n in 2..30u64 {
        let oracle: f64 = (1..n).map(|k| (k as f64).ln()).sum();
        let lib = ln_gamma_unchecked(n as f64);
        assert!(
            (lib - oracle).abs() <= 1e-11 * oracle.max(1.0),
            "n = {n}: {lib} vs {oracle}"
        );
    }
}

#[test]
fn coefficient_update_matches_direct_normal_equations() {
    // Independent route: Gauss-Jordan elimination on the ridge system.
    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..20 {
        let n = 12usize;
        let q = 3usize;
        let mut x = Array2::<f64>::zeros((n, q));
        for j in 0..n {
            x[[j, 0]] = 1.0;
            for c in 1..q {
                x[[j, c]] = rng.sample::<f64, _>(StandardNormal);
            }
        }
        let targets = Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
        let e_tau: f64 = 0.3 + rng.random::<f64>() * 5.0;

        // Library route via the update on a crafted state.
        let counts = Array2::<u64>::ones((2, n));
        let data = vec![StudyData::new(
            "a",
            counts,
            x.clone(),
            vec!["m0".into(), "m1".into()],
            (0..n).map(|j| format!("s{j}")).collect(),
        )
        .unwrap()];
        let hp = Hyperparameters::defaults(&data, 1);
        let mut st = prior_state(&data, &hp, Array2::ones((2, 1)), 0, 0);
        st.studies[0].tau_shape[0] = e_tau;
        st.studies[0].tau_rate[0] = 1.0;
        // Saturated inclusion and a location already at the target make the
        // mixture mean reproduce an arbitrary regression target:
        // with θ = 1 the mean is loc + hazard(-loc), so instead drive the
        // update directly through theta_a_star by setting θ = 1 and
        // comparing against the oracle with the same transformed targets.
        st.studies[0].theta_a.fill(1.0);
        update_a_star(&data, &mut st).unwrap();
        // Overwrite locations with the raw targets, then read the mixture
        // means the update will consume.
        st.studies[0].theta_a_star = targets.clone().insert_axis(ndarray::Axis(0));
        let ea = bapmnmf::cavi::updates::a_star_means(&st.studies[0]);
        update_beta(&data, &hp, &mut st).unwrap();
        let lib_mean = st.studies[0].beta_mean.row(0).to_owned();
        let lib_cov = st.studies[0].beta_cov[0].clone();

        // Oracle: A = τI + XᵀX, b = Xᵀ(EA*); solve by Gauss-Jordan.
        let mut a = x.t().dot(&x);
        for i in 0..q {
            a[[i, i]] += e_tau;
        }
        let b = x.t().dot(&ea.row(0).t());
        let oracle = gauss_jordan_solve(a.clone(), b.clone());
        for c in 0..q {
            assert!(
                (lib_mean[c] - oracle[c]).abs() <= 1e-8 * oracle[c].abs().max(1.0),
                "mean component {c}: {} vs {}",
                lib_mean[c],
                oracle[c]
            );
        }
        // Covariance residual: A Σ = I.
        let prod = a.dot(&lib_cov);
        for i in 0..q {
            for j in 0..q {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod[[i, j]] - expect).abs() <= 1e-8);
            }
        }
    }
}

fn gauss_jordan_solve(mut a: Array2<f64>, mut b: Array1<f64>) -> Array1<f64> {
    let n = a.nrows();
    for col in 0..n {
        // Partial pivot.
        let mut pivot = col;
        for row in (col + 1)..n {
            if a[[row, col]].abs() > a[[pivot, col]].abs() {
                pivot = row;
            }
        }
        if pivot != col {
            for k in 0..n {
                let tmp = a[[col, k]];
                a[[col, k]] = a[[pivot, k]];
                a[[pivot, k]] = tmp;
            }
            b.swap(col, pivot);
        }
        let d = a[[col, col]];
        for k in 0..n {
            a[[col, k]] /= d;
        }
        b[col] /= d;
        for row in 0..n {
            if row != col {
                let f = a[[row, col]];
                for k in 0..n {
                    a[[row, k]] -= f * a[[col, k]];
                }
                b[row] -= f * b[col];
            }
        }
    }
    b
}

#[test]
fn precision_rate_matches_hand_expansion_and_mc() {
    let mut rng = StdRng::seed_from_u64(23);
    let n = 6usize;
    let q = 2usize;
    let mut x = Array2::<f64>::zeros((n, q));
    for j in 0..n {
        x[[j, 0]] = 1.0;
        x[[j, 1]] = rng.sample::<f64, _>(StandardNormal);
    }
    let counts = Array2::<u64>::ones((2, n));
    let data = vec![StudyData::new(
        "a",
        counts,
        x,
        vec!["m0".into(), "m1".into()],
        (0..n).map(|j| format!("s{j}")).collect(),
    )
    .unwrap()];
    let mut hp = Hyperparameters::defaults(&data, 1);
    hp.beta0[0] = array![[0.4, -0.2]];
    let mut st = prior_state(&data, &hp, Array2::ones((2, 1)), 0, 0);
    st.studies[0].beta_mean = array![[1.1, 0.7]];
    st.studies[0].beta_cov[0] = array![[0.5, 0.1], [0.1, 0.3]];
    update_tau(&data, &hp, &mut st).unwrap();

    // Hand expansion: E[(β-β⁰)ᵀ(β-β⁰)] = tr Σ + ||μ-β⁰||².
    let trace = 0.5 + 0.3;
    let sq = (1.1f64 - 0.4).powi(2) + (0.7f64 + 0.2).powi(2);
    let expected_rate = hp.gamma2 + 0.5 * (trace + sq);
    assert!((st.studies[0].tau_rate[0] - expected_rate).abs() <= 1e-10);
    assert!((st.studies[0].tau_shape[0] - (hp.gamma1 + 1.0)).abs() <= 1e-12);

    // MC sanity on the same moment: sample β from the factor via a
    // hand-rolled 2×2 Cholesky of the covariance.
    let (s11, s12, s22) = (0.5f64, 0.1f64, 0.3f64);
    let a = s11.sqrt();
    let b_ = s12 / a;
    let c = (s22 - b_ * b_).sqrt();
    let mut acc = 0.0;
    let draws = 1_000_000;
    for _ in 0..draws {
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        let b1 = 1.1 + a * z1;
        let b2 = 0.7 + b_ * z1 + c * z2;
        acc += (b1 - 0.4f64).powi(2) + (b2 + 0.2f64).powi(2);
    }
    let mc = acc / draws as f64;
    assert!(
        (mc - (trace + sq)).abs() <= 0.01 * (trace + sq),
        "MC {mc} vs {}",
        trace + sq
    );
}

#[test]
fn weight_layer_agrees_with_gibbs() {
    // Conjugate weight block on sixty subjects; the Gibbs oracle samples
    // w and β^w exactly and α^w by Metropolis.
    let totals: Vec<u64> = (0..60)
        .map(|j| 150 + ((j * 73) % 17) * 55 + (j % 5) * 12)
        .collect();
    let k = 2usize;
    let n = totals.len();
    let mut counts = Array2::<u64>::zeros((k, n));
    for (j, &t) in totals.iter().enumerate() {
        counts[[0, j]] = t / 2;
        counts[[1, j]] = t - t / 2;
    }
    let data = vec![StudyData::without_covariates(
        "a",
        counts,
        vec!["m0".into(), "m1".into()],
        (0..n).map(|j| format!("s{j}")).collect(),
    )
    .unwrap()];
    let hp = Hyperparameters::defaults(&data, 1);
    let quad = QuadratureConfig::new(0.0, 1.0, 1e-10, 400).unwrap();
    let mut state = prior_state(&data, &hp, Array2::ones((k, 1)), 0, 0);
    for _ in 0..400 {
        common::conjugate_sweep(&data, &hp, &quad, &mut state);
    }
    let st = &state.studies[0];

    let col_totals: Vec<f64> = totals.iter().map(|&t| t as f64).collect();
    let gibbs = common::weight_layer_gibbs(
        &col_totals,
        hp.lambda_w[0],
        hp.a_w[0],
        hp.b_w[0],
        200_000,
        20_000,
        7,
    );
    for j in 0..n {
        let cavi = st.w_shape[j] / st.w_rate[j];
        let rel = (cavi - gibbs.w_mean[j]).abs() / gibbs.w_mean[j];
        assert!(rel <= 0.02, "subject {j}: E[w] {cavi} vs Gibbs {}", gibbs.w_mean[j]);
    }
    let cavi_beta = st.w_beta_shape / st.w_beta_rate;
    let rel_beta = (cavi_beta - gibbs.beta_mean).abs() / gibbs.beta_mean;
    assert!(rel_beta <= 0.02, "E[β^w] {cavi_beta} vs Gibbs {}", gibbs.beta_mean);
    let rel_alpha = (st.w_alpha_mean - gibbs.alpha_mean).abs() / gibbs.alpha_mean;
    assert!(rel_alpha <= 0.05, "E[α^w] {} vs Gibbs {}", st.w_alpha_mean, gibbs.alpha_mean);
}

/// The second-order expansion in the inclusion update is known to leave
/// its accuracy envelope when every other signature is decidedly off: the
/// trailing pseudo-count total then sits in the steep region of the
/// trigamma. Exact enumeration over the other indicators quantifies the
/// gap so the regime is documented rather than silently trusted.
#[test]
fn inclusion_expansion_degrades_when_all_others_are_off() {
    let r = 4usize;
    let (a1, a0) = (5.0, 0.05);
    let others = [0.011, 0.019, 0.005];
    let theta_e = [7.27, 19.89, 3.61, 8.64];

    let counts = Array2::<u64>::ones((2, 1));
    let data = vec![StudyData::without_covariates(
        "a",
        counts,
        vec!["m0".into(), "m1".into()],
        vec!["s0".into()],
    )
    .unwrap()];
    let mut hp = Hyperparameters::defaults(&data, r);
    hp.alpha_e1 = vec![a1];
    hp.alpha_e0 = vec![a0];
    let mut st = prior_state(&data, &hp, Array2::ones((2, r)), 0, 0);
    for t in 0..r {
        st.studies[0].theta_e[[t, 0]] = theta_e[t];
        st.studies[0].theta_a[[t, 0]] = if t == 0 { 0.5 } else { others[t - 1] };
        st.studies[0].beta_mean[[t, 0]] = 0.0;
        st.studies[0].beta_cov[t].fill(0.0);
    }
    update_inclusion(&data, &hp, &mut st).unwrap();
    let theta_new = st.studies[0].theta_a[[0, 0]];
    let analytic = (theta_new / (1.0 - theta_new)).ln();

    // Exact enumeration over the 2^3 configurations of the other
    // indicators (probit and exposure terms are exact already and shared).
    let mut exact_lgamma_part = 0.0;
    for mask in 0..8u32 {
        let mut p = 1.0;
        let mut s = 0.0;
        for (t, &th) in others.iter().enumerate() {
            if mask >> t & 1 == 1 {
                p *= th;
                s += a1;
            } else {
                p *= 1.0 - th;
                s += a0;
            }
        }
        exact_lgamma_part += p * (ln_gamma_unchecked(a1 + s) - ln_gamma_unchecked(a0 + s));
    }
    let theta0: f64 = theta_e.iter().sum();
    let e_ln_e = bapmnmf::kernels::digamma_unchecked(theta_e[0])
        - bapmnmf::kernels::digamma_unchecked(theta0);
    let exact = exact_lgamma_part - ln_gamma_unchecked(a1) + ln_gamma_unchecked(a0)
        + (a1 - a0) * e_ln_e; // probit log-odds vanish at μ = 0, v = 0
    let gap = (analytic - exact).abs();
    assert!(
        gap > 0.15,
        "expected the expansion to be out of tolerance here, gap {gap:.3}"
    );
    assert!(gap < 5.0, "gap {gap:.3} unexpectedly large");
}
