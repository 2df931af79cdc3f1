pub mod evaluate;
pub mod fit;
pub mod match_cmd;
pub mod simulate;

use std::collections::BTreeMap;
use std::path::Path;

use bapmnmf::io::RunManifest;

#[derive(Debug)]
pub enum CommandError {
    Usage(String),
    Core(bapmnmf::Error),
}

impl From<bapmnmf::Error> for CommandError {
    fn from(e: bapmnmf::Error) -> Self {
        CommandError::Core(e)
    }
}

pub type CmdResult = Result<(), CommandError>;

pub fn usage(msg: impl Into<String>) -> CommandError {
    CommandError::Usage(msg.into())
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339()
}

/// Collects input digests and writes `manifest.json` into the output
/// directory.
pub fn write_manifest(
    out_dir: &Path,
    argv: &[String],
    config_path: Option<&str>,
    input_paths: &[String],
    seed: u64,
    started: String,
) -> Result<(), bapmnmf::Error> {
    let config_digest = match config_path {
        Some(p) => bapmnmf::io::digest_file(Path::new(p))?,
        None => "-".to_string(),
    };
    let mut input_digests = BTreeMap::new();
    for p in input_paths {
        input_digests.insert(p.clone(), bapmnmf::io::digest_file(Path::new(p))?);
    }
    let manifest = RunManifest {
        command: argv.to_vec(),
        config_digest,
        input_digests,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started,
        finished: now_rfc3339(),
    };
    manifest.save(&out_dir.join("manifest.json"))
}

pub fn ensure_out_dir(path: &str) -> Result<std::path::PathBuf, bapmnmf::Error> {
    let dir = std::path::PathBuf::from(path);
    std::fs::create_dir_all(&dir).map_err(|e| bapmnmf::Error::io(path.to_string(), e))?;
    Ok(dir)
}
