//! Run manifests, appended one JSON object per line to `<out>/manifest.jsonl`.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// Effective arguments after config expansion, without the program name.
    pub argv: Vec<String>,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    /// File name (relative to the output directory) to SHA-256 hex digest.
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn append(out: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let line = serde_json::to_string(manifest).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(out.join(MANIFEST_FILE))?;
    writeln!(f, "{line}")?;
    Ok(())
}

pub fn read_all(path: &Path) -> Result<Vec<RunManifest>, CliError> {
    let f = std::fs::File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open manifest {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let m = serde_json::from_str(&line)
            .map_err(|e| CliError::Runtime(format!("manifest line {}: {e}", i + 1)))?;
        out.push(m);
    }
    Ok(out)
}
