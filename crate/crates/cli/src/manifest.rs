//! Run manifests: what was run, with which config, and the SHA-256 of every
//! file it produced.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::{CliError, CliResult};
use crate::runners::{execute, Command, OutputFile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub config: ScenarioConfig,
    pub version: String,
    pub seed: u64,
    pub outputs: Vec<OutputRecord>,
    pub duration_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn records(files: &[OutputFile]) -> Vec<OutputRecord> {
    files.iter().map(|f| OutputRecord { file: f.name.clone(), sha256: sha256_hex(&f.bytes) }).collect()
}

pub fn manifest_path(out_dir: &Path, command: &Command) -> PathBuf {
    out_dir.join(format!("{}.manifest.json", command.slug()))
}

/// Runs `command`, writes its files into `out_dir` and the manifest beside
/// them. Returns the manifest.
pub fn run_and_write(command: &Command, config: &ScenarioConfig, out_dir: &Path) -> CliResult<RunManifest> {
    let start = Instant::now();
    let files = execute(command, config)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    for f in &files {
        let path = out_dir.join(&f.name);
        std::fs::write(&path, &f.bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    let manifest = RunManifest {
        command: command.clone(),
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.mc.seed,
        outputs: records(&files),
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    let path = manifest_path(out_dir, command);
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checked: usize,
    /// Files whose recomputed or on-disk checksum differs from the manifest.
    pub mismatches: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-runs a manifest's command in memory and compares checksums with the
/// manifest, and with the files beside it when they exist.
pub fn verify(manifest: &Path) -> CliResult<VerifyReport> {
    let text = std::fs::read_to_string(manifest)
        .map_err(|e| CliError::Io(format!("{}: {e}", manifest.display())))?;
    let m: RunManifest = serde_json::from_str(&text)?;
    m.config.validate()?;
    let fresh = records(&execute(&m.command, &m.config)?);
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let mut mismatches = Vec::new();
    for rec in &m.outputs {
        match fresh.iter().find(|f| f.file == rec.file) {
            Some(f) if f.sha256 == rec.sha256 => {}
            Some(_) => mismatches.push(format!("{} (recomputed)", rec.file)),
            None => mismatches.push(format!("{} (not produced)", rec.file)),
        }
        if let Ok(bytes) = std::fs::read(dir.join(&rec.file)) {
            if sha256_hex(&bytes) != rec.sha256 {
                mismatches.push(format!("{} (on disk)", rec.file));
            }
        }
    }
    for f in &fresh {
        if !m.outputs.iter().any(|r| r.file == f.file) {
            mismatches.push(format!("{} (unlisted)", f.file));
        }
    }
    Ok(VerifyReport { checked: m.outputs.len(), mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
