//! Run manifests: a single plain-text file that is simultaneously
//! human-readable provenance and a replayable config file.
//!
//! Reproducible inputs are plain `key = value` lines; metadata (tool
//! version, timestamp, duration, output checksums) lives in `#` comments,
//! which the config parser skips. Re-running the same subcommand with
//! `--config manifest.txt` therefore reproduces every CSV bit for bit.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub struct ManifestWriter {
    command: String,
    kv: Vec<(String, String)>,
    outputs: Vec<(PathBuf, String)>,
}

impl ManifestWriter {
    pub fn new(command: &str, kv: Vec<(String, String)>) -> Self {
        Self {
            command: command.to_string(),
            kv,
            outputs: Vec::new(),
        }
    }

    /// Registers a finished output file; its checksum is computed now.
    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)
            .with_context(|| format!("hashing output {}", path.display()))?;
        let digest = Sha256::digest(&bytes);
        self.outputs.push((path.to_path_buf(), hex(&digest)));
        Ok(())
    }

    /// Writes `manifest.txt` into `dir` and returns its path.
    pub fn write(&self, dir: &Path, duration_s: f64) -> Result<PathBuf> {
        let mut text = String::new();
        text.push_str("# levrep run manifest\n");
        text.push_str(&format!(
            "# tool = {} {}\n",
            crate::TOOL_NAME,
            crate::TOOL_VERSION
        ));
        text.push_str(&format!(
            "# created_utc = {}\n",
            chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ")
        ));
        text.push_str(&format!("# command = {}\n", self.command));
        text.push_str(&format!("# duration_s = {duration_s:.3}\n"));
        for (path, digest) in &self.outputs {
            let name = path.file_name().map_or_else(
                || path.display().to_string(),
                |n| n.to_string_lossy().into_owned(),
            );
            text.push_str(&format!("# output {name} sha256={digest}\n"));
        }
        text.push_str("#\n");
        for (k, v) in &self.kv {
            text.push_str(&format!("{k} = {v}\n"));
        }
        let path = dir.join("manifest.txt");
        std::fs::write(&path, text)
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Checksums recorded in an existing manifest, as (file name, sha256) pairs.
pub fn read_checksums(manifest: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(manifest)
        .with_context(|| format!("reading {}", manifest.display()))?;
    let mut out = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# output ") {
            if let Some((name, sum)) = rest.rsplit_once(" sha256=") {
                out.push((name.to_string(), sum.to_string()));
            }
        }
    }
    Ok(out)
}

/// SHA-256 of a file, hex encoded.
pub fn file_sha256(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_config_and_checksums() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("x.csv");
        std::fs::write(&data, "a,b\n1,2\n").unwrap();
        let mut m = ManifestWriter::new(
            "spacing",
            vec![("energy".into(), "10000".into()), ("seed".into(), "1".into())],
        );
        m.add_output(&data).unwrap();
        let path = m.write(dir.path(), 0.5).unwrap();

        let kv = crate::config::KvFile::parse(&path).unwrap();
        assert_eq!(kv.get::<f64>("energy").unwrap(), Some(10000.0));
        assert_eq!(kv.get::<u64>("seed").unwrap(), Some(1));

        let sums = read_checksums(&path).unwrap();
        assert_eq!(sums.len(), 1);
        assert_eq!(sums[0].0, "x.csv");
        assert_eq!(sums[0].1, file_sha256(&data).unwrap());
    }
}
