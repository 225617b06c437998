//! Experiment artifacts and the manifest that fingerprints them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dynamics::metrics::metrics_csv_string;
use crate::error::{Error, Result};
use crate::harness::comparison::SwitchComparison;
use crate::harness::tables::emit_profile_tables;
use crate::record::RunRecord;
use crate::rng::RngSeed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub label: String,
    pub repetition: usize,
    pub seed: RngSeed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<SeedEntry>,
    /// File name to SHA-256 hex digest.
    pub files: BTreeMap<String, String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes files into one directory and remembers their digests.
#[derive(Debug)]
pub struct ArtifactDir {
    root: PathBuf,
    files: BTreeMap<String, String>,
}

impl ArtifactDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(ArtifactDir {
            root,
            files: BTreeMap::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let contents = contents.as_ref();
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.insert(name.to_string(), sha256_hex(contents));
        Ok(path)
    }

    /// Metrics CSV and final snapshot per record, then the profile tables.
    pub fn write_records(&mut self, records: &[RunRecord]) -> Result<()> {
        for record in records {
            let stem = format!("{}_{}", record.label, record.repetition + 1);
            self.write(
                &format!("metrics_{stem}.csv"),
                metrics_csv_string(&record.metrics),
            )?;
            self.write(
                &format!("snapshot_{stem}.json"),
                record.final_snapshot.to_json(),
            )?;
        }
        let tables = emit_profile_tables(records)?;
        self.write("profile_tables.csv", tables.to_csv())?;
        self.write("profile_tables.md", tables.to_markdown())?;
        Ok(())
    }

    pub fn write_comparison(&mut self, comparison: &SwitchComparison) -> Result<()> {
        self.write("switch_comparison.csv", comparison.to_csv())?;
        Ok(())
    }

    /// Write `manifest.json` covering every file written so far.
    pub fn finish(
        self,
        command: &str,
        config: serde_json::Value,
        seeds: Vec<SeedEntry>,
    ) -> Result<Manifest> {
        let manifest = Manifest {
            tool: "oncograph".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seeds,
            files: self.files,
        };
        let path = self.root.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

pub fn seed_entries(records: &[RunRecord]) -> Vec<SeedEntry> {
    records
        .iter()
        .map(|r| SeedEntry {
            label: r.label.clone(),
            repetition: r.repetition,
            seed: r.seed,
        })
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
