//! CSV metric files and experiment manifests.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use gmfg_core::solvers::RunRecord;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const CSV_HEADER: [&str; 5] = ["iter", "exploitability", "kl_to_reference", "wall_ms", "seed"];

/// 17 significant digits, enough to round-trip every `f64`.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes records with LF line endings; optional columns stay empty.
pub fn records_to_csv(records: &[RunRecord]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.iter.to_string(),
            number(r.exploitability),
            r.kl_to_reference.map(number).unwrap_or_default(),
            r.wall_ms.map(number).unwrap_or_default(),
            r.seed.to_string(),
        ])?;
    }
    w.into_inner().context("flushing csv buffer")
}

/// Parses a metrics file back into records.
pub fn read_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    anyhow::ensure!(headers.iter().eq(CSV_HEADER), "unexpected csv header {headers:?}");
    let opt = |s: &str| -> Result<Option<f64>> { if s.is_empty() { Ok(None) } else { Ok(Some(s.parse()?)) } };
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        out.push(RunRecord {
            iter: row[0].parse()?,
            exploitability: row[1].parse()?,
            kl_to_reference: opt(&row[2])?,
            wall_ms: opt(&row[3])?,
            seed: row[4].parse()?,
        });
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub seed: u64,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sha256: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    pub started_at: String,
    pub finished_at: String,
    pub runs: Vec<RunEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ArtifactDigest>,
}

impl Manifest {
    pub fn all_ok(&self) -> bool {
        self.runs.iter().all(|r| r.status == RunStatus::Ok)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// One line per run, for the CLI.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for r in &self.runs {
            match r.status {
                RunStatus::Ok => writeln!(s, "seed {}: ok, {} rows -> {}", r.seed, r.rows.unwrap_or(0), r.csv.as_deref().unwrap_or("")),
                RunStatus::Failed => writeln!(s, "seed {}: FAILED: {}", r.seed, r.error.as_deref().unwrap_or("unknown error")),
            }
            .expect("writing to a string");
        }
        s
    }
}
