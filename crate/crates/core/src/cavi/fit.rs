//! The fit driver: full sweeps in algorithm order with a convergence
//! monitor.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::data::StudyData;
use crate::model::hyper::Hyperparameters;
use crate::model::state::VariationalState;

use super::config::{FitConfig, FitDiagnostics, Termination};
use super::objective::surrogate_objective;
use super::updates::*;

/// Per-sweep information handed to observers (checkpointing, tracing).
#[derive(Debug, Clone, Copy)]
pub struct SweepInfo {
    pub sweep: usize,
    pub max_rel_change: f64,
    pub objective: Option<f64>,
    pub seconds: f64,
}

/// One full sweep in fixed order: latent counts, weights, weight shape,
/// weight rate, signatures, exposures, inclusion, latent scores,
/// coefficients, precisions. No step reads a partially updated peer.
pub fn sweep_once(
    data: &[StudyData],
    hp: &Hyperparameters,
    cfg: &FitConfig,
    state: &mut VariationalState,
) -> Result<()> {
    let sweep = state.iteration as usize + 1;
    let ctx = |step: &'static str| move |e: Error| Error::Sweep { sweep, step, source: Box::new(e) };
    update_latent_counts(data, state).map_err(ctx("latent-counts"))?;
    update_weights(data, state).map_err(ctx("weights"))?;
    update_w_shape(data, hp, state, &cfg.quadrature).map_err(ctx("weight-shape"))?;
    update_w_rate(data, hp, state).map_err(ctx("weight-rate"))?;
    update_signatures(state).map_err(ctx("signatures"))?;
    update_exposures(hp, state).map_err(ctx("exposures"))?;
    update_inclusion(data, hp, state).map_err(ctx("inclusion"))?;
    update_a_star(data, state).map_err(ctx("latent-scores"))?;
    update_beta(data, hp, state).map_err(ctx("coefficients"))?;
    update_tau(data, hp, state).map_err(ctx("precisions"))?;
    state.iteration += 1;
    Ok(())
}

/// Flattens every factor parameter for the convergence metric.
fn flatten_params(state: &VariationalState, out: &mut Vec<f64>) {
    out.clear();
    out.extend(state.theta_p.iter());
    for st in &state.studies {
        out.extend(st.theta_e.iter());
        out.extend(st.theta_a.iter());
        out.extend(st.theta_a_star.iter());
        out.extend(st.beta_mean.iter());
        for c in &st.beta_cov {
            out.extend(c.iter());
        }
        out.extend(st.tau_shape.iter());
        out.extend(st.tau_rate.iter());
        out.extend(st.w_shape.iter());
        out.extend(st.w_rate.iter());
        out.push(st.w_alpha_mean);
        out.push(st.w_beta_shape);
        out.push(st.w_beta_rate);
    }
}

/// Runs CAVI from an initialized state until the max relative parameter
/// change drops below the tolerance or the sweep budget is exhausted.
pub fn fit(
    data: &[StudyData],
    hp: &Hyperparameters,
    cfg: &FitConfig,
    init: VariationalState,
) -> Result<(VariationalState, FitDiagnostics)> {
    fit_with_observer(data, hp, cfg, init, |_info: &SweepInfo, _state: &VariationalState| Ok(()))
}

/// As [`fit`], invoking `observer` after every sweep.
pub fn fit_with_observer<F>(
    data: &[StudyData],
    hp: &Hyperparameters,
    cfg: &FitConfig,
    mut state: VariationalState,
    mut observer: F,
) -> Result<(VariationalState, FitDiagnostics)>
where
    F: FnMut(&SweepInfo, &VariationalState) -> Result<()>,
{
    cfg.validate()?;
    hp.validate(data, state.rank())?;
    let mut prev = Vec::new();
    let mut cur = Vec::new();
    let mut diagnostics = FitDiagnostics {
        objective: Vec::new(),
        max_rel_change: Vec::new(),
        sweep_seconds: Vec::new(),
        termination: Termination::MaxIterations,
    };

    flatten_params(&state, &mut prev);
    for sweep in 1..=cfg.max_iterations {
        let start = Instant::now();
        sweep_once(data, hp, cfg, &mut state)?;
        flatten_params(&state, &mut cur);
        let mut max_rel: f64 = 0.0;
        for (&new, &old) in cur.iter().zip(&prev) {
            let rel = (new - old).abs() / (old.abs() + 1e-8);
            if rel > max_rel {
                max_rel = rel;
            }
        }
        std::mem::swap(&mut prev, &mut cur);

        let objective = if cfg.track_objective {
            let o = surrogate_objective(data, hp, &state, &cfg.quadrature)?;
            diagnostics.objective.push(o);
            Some(o)
        } else {
            None
        };
        let seconds = start.elapsed().as_secs_f64();
        diagnostics.max_rel_change.push(max_rel);
        diagnostics.sweep_seconds.push(seconds);
        observer(
            &SweepInfo {
                sweep,
                max_rel_change: max_rel,
                objective,
                seconds,
            },
            &state,
        )?;

        if max_rel < cfg.tolerance {
            diagnostics.termination = Termination::Converged;
            break;
        }
    }
    Ok((state, diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavi::config::Mode;
    use crate::model::state::prior_state;
    use ndarray::{array, Array2};

    fn setup() -> (Vec<StudyData>, Hyperparameters, FitConfig, VariationalState) {
        let counts = array![[9u64, 1, 4], [2, 8, 1], [5, 5, 5]];
        let data = vec![StudyData::without_covariates(
            "a",
            counts,
            (0..3).map(|i| format!("m{i}")).collect(),
            (0..3).map(|j| format!("s{j}")).collect(),
        )
        .unwrap()];
        let hp = Hyperparameters::defaults(&data, 2);
        let cfg = FitConfig::new(2, Mode::Discovery, 7);
        let state = prior_state(&data, &hp, Array2::ones((3, 2)), 0, 7);
        (data, hp, cfg, state)
    }

    #[test]
    fn zero_tolerance_runs_all_sweeps() {
        let (data, hp, mut cfg, state) = setup();
        cfg.tolerance = 1e-300;
        cfg.max_iterations = 3;
        let (fitted, diag) = fit(&data, &hp, &cfg, state).unwrap();
        assert_eq!(diag.iterations(), 3);
        assert_eq!(diag.termination, Termination::MaxIterations);
        assert_eq!(fitted.iteration, 3);
        assert_eq!(diag.sweep_seconds.len(), 3);
    }

    #[test]
    fn rerun_is_bit_identical() {
        let (data, hp, mut cfg, state) = setup();
        cfg.max_iterations = 25;
        let (a, _) = fit(&data, &hp, &cfg, state.clone()).unwrap();
        let (b, _) = fit(&data, &hp, &cfg, state).unwrap();
        for (x, y) in a.theta_p.iter().zip(b.theta_p.iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (sa, sb) in a.studies.iter().zip(&b.studies) {
            for (x, y) in sa.theta_e.iter().zip(sb.theta_e.iter()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
            assert_eq!(sa.w_alpha_mean.to_bits(), sb.w_alpha_mean.to_bits());
        }
    }

    #[test]
    fn converges_on_easy_data() {
        let (data, hp, mut cfg, state) = setup();
        cfg.tolerance = 1e-6;
        cfg.max_iterations = 2000;
        let (_, diag) = fit(&data, &hp, &cfg, state).unwrap();
        assert_eq!(diag.termination, Termination::Converged);
    }
}
