use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use bapmnmf::io::{fmt_sig12, read_labeled_matrix};
use bapmnmf::sim::{cosine_match, detection_rate, MatchReport};

use super::{ensure_out_dir, now_rfc3339, usage, write_manifest, CmdResult};
use crate::EvaluateArgs;

/// prevalence.tsv / truth_prevalence.tsv rows keyed by (study, signature).
fn load_prevalence(path: &Path) -> Result<BTreeMap<(String, String), f64>, bapmnmf::Error> {
    let text = bapmnmf::io::tables::read_text(path)?;
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != 3 {
            return Err(bapmnmf::Error::Parse {
                path: path.display().to_string(),
                line: idx + 1,
                msg: format!("expected 3 columns, got {}", cells.len()),
            });
        }
        let v: f64 = cells[2].parse().map_err(|_| bapmnmf::Error::Parse {
            path: path.display().to_string(),
            line: idx + 1,
            msg: format!("bad prevalence '{}'", cells[2]),
        })?;
        out.insert((cells[0].to_string(), cells[1].to_string()), v);
    }
    Ok(out)
}

pub fn run(args: &EvaluateArgs, argv: &[String]) -> CmdResult {
    let started = now_rfc3339();
    let out_dir = ensure_out_dir(&args.out)?;
    if !(args.threshold > 0.0 && args.threshold <= 1.0) {
        return Err(usage(format!("threshold must lie in (0,1], got {}", args.threshold)));
    }
    let truths: Vec<PathBuf> = if args.truths.len() == args.fits.len() {
        args.truths.iter().map(PathBuf::from).collect()
    } else if args.truths.len() == 1 {
        vec![PathBuf::from(&args.truths[0]); args.fits.len()]
    } else {
        return Err(usage(format!(
            "{} --truth directories for {} --fit directories; give one per fit or a single shared one",
            args.truths.len(),
            args.fits.len()
        )));
    };

    let mut reports: Vec<MatchReport> = Vec::new();
    let mut match_table = String::from(
        "pair\ttruth_signature\tbest_cosine\tmatched_estimate\tcaptured\n",
    );
    let mut prevalence_table =
        String::from("pair\tstudy\ttruth_signature\ttruth_prevalence\testimated_prevalence\tabs_error\n");

    for (pair, (fit_dir, truth_dir)) in args.fits.iter().zip(&truths).enumerate() {
        let est = read_labeled_matrix(&Path::new(fit_dir).join("signatures.tsv"))?;
        let truth = read_labeled_matrix(&truth_dir.join("truth_signatures.tsv"))?;
        if est.row_labels != truth.row_labels {
            return Err(super::CommandError::Core(bapmnmf::Error::Data(format!(
                "pair {pair}: motif labels of '{fit_dir}' differ from the truth"
            ))));
        }
        let report = cosine_match(est.values.view(), truth.values.view(), args.threshold)?;
        for (t, m) in report.matches.iter().enumerate() {
            match_table.push_str(&format!(
                "{pair}\t{}\t{}\t{}\t{}\n",
                truth.col_labels[t],
                fmt_sig12(m.best_cosine),
                est.col_labels[m.matched],
                m.captured
            ));
        }

        // Prevalence error pairs the truth signature with its matched
        // estimated signature per study.
        let est_prev = load_prevalence(&Path::new(fit_dir).join("prevalence.tsv"))?;
        let truth_prev = load_prevalence(&truth_dir.join("truth_prevalence.tsv"))?;
        let studies: Vec<String> = {
            let mut s: Vec<String> = truth_prev.keys().map(|(st, _)| st.clone()).collect();
            s.dedup();
            s
        };
        for study in &studies {
            for (t, m) in report.matches.iter().enumerate() {
                let t_name = &truth.col_labels[t];
                let e_name = &est.col_labels[m.matched];
                let tv = truth_prev.get(&(study.clone(), t_name.clone()));
                let ev = est_prev.get(&(study.clone(), e_name.clone()));
                if let (Some(&tv), Some(&ev)) = (tv, ev) {
                    prevalence_table.push_str(&format!(
                        "{pair}\t{study}\t{t_name}\t{}\t{}\t{}\n",
                        fmt_sig12(tv),
                        fmt_sig12(ev),
                        fmt_sig12((tv - ev).abs())
                    ));
                }
            }
        }
        reports.push(report);
    }

    bapmnmf::io::tables::write_text(&out_dir.join("match.tsv"), &match_table)?;
    bapmnmf::io::tables::write_text(&out_dir.join("prevalence_error.tsv"), &prevalence_table)?;

    let rates = detection_rate(&reports)?;
    let mut detection = String::from("truth_signature\tdetection_rate\n");
    for (t, rate) in rates.iter().enumerate() {
        detection.push_str(&format!("T{}\t{}\n", t + 1, fmt_sig12(*rate)));
    }
    bapmnmf::io::tables::write_text(&out_dir.join("detection.tsv"), &detection)?;

    let inputs: Vec<String> = args
        .fits
        .iter()
        .map(|f| format!("{f}/signatures.tsv"))
        .collect();
    write_manifest(&out_dir, argv, None, &inputs, 0, started)?;
    Ok(())
}
