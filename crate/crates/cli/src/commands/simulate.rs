use std::path::Path;

use bapmnmf::io::{fmt_sig12, load_scenario, write_counts, write_labeled_matrix, CountsTable};
use bapmnmf::model::StudyData;
use bapmnmf::sim::{replicate_seed, simulate, GroundTruth};

use super::{ensure_out_dir, now_rfc3339, write_manifest, CmdResult};
use crate::SimulateArgs;

fn write_replicate(dir: &Path, data: &[StudyData], truth: &GroundTruth) -> Result<(), bapmnmf::Error> {
    std::fs::create_dir_all(dir).map_err(|e| bapmnmf::Error::io(dir.display().to_string(), e))?;
    let r = truth.signatures.ncols();
    let sig_names: Vec<String> = (1..=r).map(|t| format!("T{t}")).collect();
    write_labeled_matrix(
        &dir.join("truth_signatures.tsv"),
        "motif",
        &data[0].motif_labels,
        &sig_names,
        truth.signatures.view(),
    )?;
    let prevalence = truth.prevalence(data)?;
    let mut prev = String::from("study\tsignature\tprevalence\n");
    for (s, d) in data.iter().enumerate() {
        let id = &d.study_id;
        write_counts(
            &dir.join(format!("counts_{id}.tsv")),
            &CountsTable {
                motif_labels: d.motif_labels.clone(),
                subject_ids: d.subject_ids.clone(),
                counts: d.counts.clone(),
            },
        )?;
        // Covariates without the intercept column; ingestion re-adds it.
        if d.n_covariates() > 1 {
            let mut cov = String::from("subject");
            for c in 1..d.n_covariates() {
                cov.push_str(&format!("\tx{c}"));
            }
            cov.push('\n');
            for (j, sid) in d.subject_ids.iter().enumerate() {
                cov.push_str(sid);
                for c in 1..d.n_covariates() {
                    cov.push('\t');
                    cov.push_str(&fmt_sig12(d.covariates[[j, c]]));
                }
                cov.push('\n');
            }
            bapmnmf::io::tables::write_text(&dir.join(format!("covariates_{id}.tsv")), &cov)?;
        }
        write_labeled_matrix(
            &dir.join(format!("truth_exposures_{id}.tsv")),
            "signature",
            &sig_names,
            &d.subject_ids,
            truth.exposures[s].view(),
        )?;
        let inc = truth.inclusion[s].mapv(|v| v as f64);
        write_labeled_matrix(
            &dir.join(format!("truth_inclusion_{id}.tsv")),
            "signature",
            &sig_names,
            &d.subject_ids,
            inc.view(),
        )?;
        let mut weights = String::from("subject\tweight\n");
        for (j, sid) in d.subject_ids.iter().enumerate() {
            weights.push_str(&format!("{sid}\t{}\n", fmt_sig12(truth.weights[s][j])));
        }
        bapmnmf::io::tables::write_text(&dir.join(format!("truth_weights_{id}.tsv")), &weights)?;
        if let Some(betas) = &truth.betas {
            let q = betas[s].ncols();
            let cov_names: Vec<String> = (0..q).map(|c| format!("x{c}")).collect();
            write_labeled_matrix(
                &dir.join(format!("truth_beta_{id}.tsv")),
                "signature",
                &sig_names,
                &cov_names,
                betas[s].view(),
            )?;
        }
        for (t, sig) in sig_names.iter().enumerate() {
            prev.push_str(&format!("{id}\t{sig}\t{}\n", fmt_sig12(prevalence[s][t])));
        }
    }
    bapmnmf::io::tables::write_text(&dir.join("truth_prevalence.tsv"), &prev)
}

pub fn run(args: &SimulateArgs, argv: &[String]) -> CmdResult {
    let started = now_rfc3339();
    let out_dir = ensure_out_dir(&args.out)?;
    let spec = load_scenario(Path::new(&args.spec))?;
    for rep in 0..args.replicates {
        let seed = if args.replicates == 1 {
            args.seed
        } else {
            replicate_seed(args.seed, rep)
        };
        let (data, truth) = simulate(&spec, seed)?;
        let dir = if args.replicates == 1 {
            out_dir.clone()
        } else {
            out_dir.join(format!("rep_{rep:03}"))
        };
        write_replicate(&dir, &data, &truth)?;
    }
    write_manifest(
        &out_dir,
        argv,
        None,
        std::slice::from_ref(&args.spec),
        args.seed,
        started,
    )?;
    Ok(())
}
