use std::path::Path;

use bapmnmf::init::cosine;
use bapmnmf::io::{fmt_sig12, read_labeled_matrix};

use super::CmdResult;
use crate::MatchArgs;

pub fn run(args: &MatchArgs) -> CmdResult {
    let a = read_labeled_matrix(Path::new(&args.a))?;
    let b = read_labeled_matrix(Path::new(&args.b))?;
    if a.row_labels != b.row_labels {
        return Err(super::CommandError::Core(bapmnmf::Error::Data(
            "matrices have different motif labels".into(),
        )));
    }
    let mut out = String::from("signature");
    for name in &b.col_labels {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for (i, name) in a.col_labels.iter().enumerate() {
        out.push_str(name);
        for j in 0..b.col_labels.len() {
            out.push('\t');
            out.push_str(&fmt_sig12(cosine(a.values.column(i), b.values.column(j))));
        }
        out.push('\n');
    }
    match &args.out {
        Some(path) => bapmnmf::io::tables::write_text(Path::new(path), &out)?,
        None => print!("{out}"),
    }
    Ok(())
}
