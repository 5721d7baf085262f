//! Output files and the run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::spec::{ExperimentSpec, FORMAT_VERSION};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: String,
    pub library_version: String,
    pub spec_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_seconds: f64,
    /// `"pass"` or `"breach"`.
    pub outcome: String,
    pub files: BTreeMap<String, FileEntry>,
    pub spec: ExperimentSpec,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects data files written into one output directory.
pub struct OutputDir {
    dir: PathBuf,
    files: BTreeMap<String, FileEntry>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: BTreeMap::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), contents)?;
        self.files.insert(
            name.to_string(),
            FileEntry { sha256: sha256_hex(contents), bytes: contents.len() as u64 },
        );
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Invalid(e.to_string()))?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    pub fn finish(
        self,
        spec: &ExperimentSpec,
        threads: usize,
        wall_time_seconds: f64,
        passed: bool,
    ) -> Result<RunManifest, CliError> {
        let canonical = serde_json::to_string(spec).map_err(|e| CliError::Invalid(e.to_string()))?;
        let manifest = RunManifest {
            format_version: FORMAT_VERSION,
            command: spec.command.as_str().to_string(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            spec_sha256: sha256_hex(canonical.as_bytes()),
            seed: spec.walk.seed,
            threads,
            wall_time_seconds,
            outcome: if passed { "pass" } else { "breach" }.to_string(),
            files: self.files,
            spec: spec.clone(),
        };
        let mut s = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Invalid(e.to_string()))?;
        s.push('\n');
        fs::write(self.dir.join(MANIFEST), s)?;
        Ok(manifest)
    }
}

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text from a header and rows of already formatted fields.
pub fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}
