use std::path::Path;

use bapmnmf::cavi::{fit_with_observer, FitConfig, Mode};
use bapmnmf::init::{init_discovery, init_recovery_discovery};
use bapmnmf::io::{
    build_study, fmt_sig12, load_catalog, load_counts, load_covariate_table, write_labeled_matrix,
    Settings,
};
use bapmnmf::model::{Checkpoint, SignatureCatalog, StudyData, VariationalState};
use bapmnmf::sim::{beta_credible_intervals, inclusion_prevalence};

use super::{ensure_out_dir, now_rfc3339, usage, write_manifest, CmdResult};
use crate::FitArgs;

const DEFAULT_SEED: u64 = 42;

struct LoadedStudy {
    data: StudyData,
    covariate_names: Vec<String>,
}

fn parse_covariate_bindings(raw: &[String], n_studies: usize) -> Result<Vec<Option<String>>, super::CommandError> {
    let mut out: Vec<Option<String>> = vec![None; n_studies];
    for binding in raw {
        let (idx, path) = binding
            .split_once('=')
            .ok_or_else(|| usage(format!("--covariates expects INDEX=PATH, got '{binding}'")))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| usage(format!("--covariates index '{idx}' is not a number")))?;
        if idx == 0 || idx > n_studies {
            return Err(usage(format!(
                "--covariates index {idx} out of range for {n_studies} studies"
            )));
        }
        if out[idx - 1].is_some() {
            return Err(usage(format!("duplicate --covariates binding for study {idx}")));
        }
        out[idx - 1] = Some(path.trim().to_string());
    }
    Ok(out)
}

fn load_studies(args: &FitArgs) -> Result<Vec<LoadedStudy>, super::CommandError> {
    let bindings = parse_covariate_bindings(&args.covariates, args.counts.len())?;
    let mut studies = Vec::with_capacity(args.counts.len());
    for (i, counts_path) in args.counts.iter().enumerate() {
        let path = Path::new(counts_path);
        let table = load_counts(path)?;
        let study_id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("study{i}"));
        let cov_table = match &bindings[i] {
            Some(p) => Some(load_covariate_table(Path::new(p))?),
            None => None,
        };
        let ingested = build_study(&study_id, &table, cov_table.as_ref())?;
        for w in &ingested.warnings {
            eprintln!("warning: study '{study_id}': {w}");
        }
        studies.push(LoadedStudy {
            data: ingested.data,
            covariate_names: ingested.covariate_names,
        });
    }
    Ok(studies)
}

fn signature_names(state: &VariationalState, catalog: Option<&SignatureCatalog>) -> Vec<String> {
    let r = state.rank();
    let mut names = Vec::with_capacity(r);
    if let Some(cat) = catalog {
        names.extend(cat.names.iter().cloned());
        for d in 1..=(r - cat.len()) {
            names.push(format!("D{d}"));
        }
    } else {
        for t in 1..=r {
            names.push(format!("S{t}"));
        }
    }
    names
}

fn write_outputs(
    out_dir: &Path,
    data: &[StudyData],
    covariate_names: &[Vec<String>],
    state: &VariationalState,
    sig_names: &[String],
) -> Result<(), bapmnmf::Error> {
    let estimates = state.point_estimates();
    write_labeled_matrix(
        &out_dir.join("signatures.tsv"),
        "motif",
        &data[0].motif_labels,
        sig_names,
        estimates.p_hat.view(),
    )?;

    for (s, d) in data.iter().enumerate() {
        let id = &d.study_id;
        write_labeled_matrix(
            &out_dir.join(format!("exposures_{id}.tsv")),
            "signature",
            sig_names,
            &d.subject_ids,
            estimates.exposures[s].view(),
        )?;
        write_labeled_matrix(
            &out_dir.join(format!("inclusion_{id}.tsv")),
            "signature",
            sig_names,
            &d.subject_ids,
            estimates.inclusion[s].view(),
        )?;
        let mut weights = String::from("subject\tweight\n");
        for (j, sid) in d.subject_ids.iter().enumerate() {
            weights.push_str(sid);
            weights.push('\t');
            weights.push_str(&fmt_sig12(estimates.weights[s][j]));
            weights.push('\n');
        }
        bapmnmf::io::tables::write_text(&out_dir.join(format!("weights_{id}.tsv")), &weights)?;
    }

    let intervals = beta_credible_intervals(state, 0.95)?;
    let mut beta = String::from("study\tsignature\tcovariate\tmean\tsd\tlow95\thigh95\n");
    for (s, d) in data.iter().enumerate() {
        let st = &state.studies[s];
        for (t, sig) in sig_names.iter().enumerate() {
            for (c, cov_name) in covariate_names[s].iter().enumerate() {
                let ci = intervals[s][t][c];
                let sd = st.beta_cov[t][[c, c]].max(0.0).sqrt();
                beta.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    d.study_id,
                    sig,
                    cov_name,
                    fmt_sig12(ci.mean),
                    fmt_sig12(sd),
                    fmt_sig12(ci.low),
                    fmt_sig12(ci.high)
                ));
            }
        }
    }
    bapmnmf::io::tables::write_text(&out_dir.join("beta.tsv"), &beta)?;

    let prevalence = inclusion_prevalence(state, data)?;
    let mut prev = String::from("study\tsignature\tprevalence\n");
    for (s, d) in data.iter().enumerate() {
        for (t, sig) in sig_names.iter().enumerate() {
            prev.push_str(&format!(
                "{}\t{}\t{}\n",
                d.study_id,
                sig,
                fmt_sig12(prevalence[s][t])
            ));
        }
    }
    bapmnmf::io::tables::write_text(&out_dir.join("prevalence.tsv"), &prev)
}

pub fn run(args: &FitArgs, argv: &[String]) -> CmdResult {
    let started = now_rfc3339();
    let out_dir = ensure_out_dir(&args.out)?;
    let settings = match &args.config {
        Some(p) => Settings::from_file(Path::new(p))?,
        None => Settings::default(),
    };

    let studies = load_studies(args)?;
    let data: Vec<StudyData> = studies.iter().map(|s| s.data.clone()).collect();
    let covariate_names: Vec<Vec<String>> = studies.iter().map(|s| s.covariate_names.clone()).collect();

    let catalog = match &args.catalog {
        Some(p) => Some(load_catalog(Path::new(p))?.align_to(&data[0].motif_labels)?),
        None => None,
    };
    let mode = match (settings.mode()?, catalog.is_some()) {
        (Some(Mode::RecoveryDiscovery), false) => {
            return Err(usage("mode recovery-discovery requires --catalog"))
        }
        (Some(Mode::Discovery), true) => {
            return Err(usage("--catalog conflicts with mode = discovery"))
        }
        (Some(m), _) => m,
        (None, true) => Mode::RecoveryDiscovery,
        (None, false) => Mode::Discovery,
    };

    let rank_flag = match args.rank {
        Some(r) => Some(r),
        None => settings.rank()?,
    };
    let seed = args.seed.unwrap_or_else(|| {
        eprintln!("note: --seed not given, defaulting to {DEFAULT_SEED}");
        DEFAULT_SEED
    });

    // Total rank and initial state.
    let (cfg_rank, total_rank) = match mode {
        Mode::Discovery => {
            let r = rank_flag.ok_or_else(|| usage("discovery mode requires --rank"))?;
            if r == 0 {
                return Err(usage("--rank must be at least 1"));
            }
            (r, r)
        }
        Mode::RecoveryDiscovery => {
            let r = rank_flag.unwrap_or(0);
            (r, r + catalog.as_ref().map_or(0, |c| c.len()))
        }
    };
    let hp = settings.build_hyperparameters(&data, total_rank)?;
    let fit_cfg: FitConfig = settings.build_fit_config(cfg_rank, mode, seed)?;
    let init_opts = settings.build_init_options()?;

    let init_state = match &args.resume {
        Some(p) => {
            let ck = Checkpoint::load(Path::new(p))?;
            eprintln!("note: resuming from sweep {}", ck.state.iteration);
            ck.state
        }
        None => match mode {
            Mode::Discovery => init_discovery(&data, &hp, cfg_rank, seed, &init_opts)?,
            Mode::RecoveryDiscovery => init_recovery_discovery(
                &data,
                &hp,
                catalog.as_ref().expect("mode implies catalog"),
                cfg_rank,
                seed,
                &init_opts,
            )?,
        },
    };

    let checkpoint_interval = settings.checkpoint_interval()?;
    let checkpoint_path = out_dir.join("checkpoint.bapmnmf");
    let mut trace = String::from("iteration\tobjective\tmax_delta\tseconds\n");
    let hp_for_ck = hp.clone();
    let (state, diagnostics) = fit_with_observer(&data, &hp, &fit_cfg, init_state, |info, st| {
        trace.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            info.sweep,
            info.objective.map_or_else(|| "nan".to_string(), fmt_sig12),
            fmt_sig12(info.max_rel_change),
            fmt_sig12(info.seconds)
        ));
        if checkpoint_interval > 0 && info.sweep % checkpoint_interval == 0 {
            Checkpoint::new(hp_for_ck.clone(), st.clone()).save(&checkpoint_path)?;
        }
        Ok(())
    })?;
    eprintln!(
        "fit finished: {} sweeps, termination: {}",
        diagnostics.iterations(),
        diagnostics.termination
    );

    bapmnmf::io::tables::write_text(&out_dir.join("trace.tsv"), &trace)?;
    Checkpoint::new(hp, state.clone()).save(&checkpoint_path)?;

    let sig_names = signature_names(&state, catalog.as_ref());
    write_outputs(&out_dir, &data, &covariate_names, &state, &sig_names)?;

    let mut inputs: Vec<String> = args.counts.clone();
    for b in &args.covariates {
        if let Some((_, p)) = b.split_once('=') {
            inputs.push(p.trim().to_string());
        }
    }
    if let Some(c) = &args.catalog {
        inputs.push(c.clone());
    }
    write_manifest(&out_dir, argv, args.config.as_deref(), &inputs, seed, started)?;
    Ok(())
}
