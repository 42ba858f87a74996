//! Results store: JSON artifacts with a deterministic `{meta, body}` core
//! and a `sidecar` for timings and timestamps, written atomically
//! (temp file + rename), plus an index of everything written.
//!
//! Re-running a command with an identical config reproduces the `meta` and
//! `body` fields byte for byte; only the sidecar may differ.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub artifact: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact<B> {
    pub meta: ArtifactMeta,
    pub body: B,
    #[serde(default)]
    pub sidecar: Value,
}

pub struct Store {
    dir: PathBuf,
    config_hash: String,
    seed: u64,
}

impl Store {
    pub fn new(dir: &Path, config_hash: &str, seed: u64) -> Result<Store> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Store { dir: dir.to_path_buf(), config_hash: config_hash.to_string(), seed })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    fn meta(&self, artifact: &str, model: Option<&str>) -> ArtifactMeta {
        ArtifactMeta {
            artifact: artifact.to_string(),
            model: model.map(str::to_string),
            config_hash: self.config_hash.clone(),
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Writes a JSON artifact and records it in the index.
    pub fn write_json<B: Serialize>(
        &self,
        file: &str,
        artifact: &str,
        model: Option<&str>,
        body: &B,
        sidecar: Value,
    ) -> Result<PathBuf> {
        let envelope = Artifact {
            meta: self.meta(artifact, model),
            body,
            sidecar,
        };
        let text = serde_json::to_string_pretty(&envelope)?;
        let path = self.path(file);
        atomic_write(&path, text.as_bytes())?;
        self.index_add(file, artifact)?;
        Ok(path)
    }

    /// Writes a plain text artifact (CSV, markdown) and records it.
    pub fn write_text(&self, file: &str, artifact: &str, content: &str) -> Result<PathBuf> {
        let path = self.path(file);
        atomic_write(&path, content.as_bytes())?;
        self.index_add(file, artifact)?;
        Ok(path)
    }

    pub fn read_json<B: DeserializeOwned>(&self, file: &str) -> Result<Artifact<B>> {
        let path = self.path(file);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("missing artifact {}", path.display()))?;
        let artifact = serde_json::from_str(&text)
            .with_context(|| format!("cannot parse artifact {}", path.display()))?;
        Ok(artifact)
    }

    pub fn exists(&self, file: &str) -> bool {
        self.path(file).exists()
    }

    fn index_add(&self, file: &str, artifact: &str) -> Result<()> {
        if file == INDEX_FILE {
            return Ok(());
        }
        let mut index = self.read_index().unwrap_or_default();
        index.entries.insert(
            file.to_string(),
            IndexEntry { artifact: artifact.to_string(), config_hash: self.config_hash.clone() },
        );
        let text = serde_json::to_string_pretty(&index)?;
        atomic_write(&self.path(INDEX_FILE), text.as_bytes())
    }

    pub fn read_index(&self) -> Result<ArtifactIndex> {
        let text = std::fs::read_to_string(self.path(INDEX_FILE)).context("missing index")?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub artifact: String,
    pub config_hash: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ArtifactIndex {
    pub entries: BTreeMap<String, IndexEntry>,
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default().as_nanos();
    let tmp = dir.join(format!(
        ".{}.tmp-{}-{nanos}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact"),
        std::process::id(),
    ));
    std::fs::write(&tmp, bytes).with_context(|| format!("cannot write {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("cannot move artifact into place at {}", path.display()))?;
    Ok(())
}

/// Current wall time as a sidecar value.
pub fn written_at() -> Value {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default().as_secs();
    serde_json::json!({ "written_at_unix": secs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_round_trips_and_indexes() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::new(dir.path(), "abc123", 42).unwrap();
        store
            .write_json("thing.json", "thing", Some("lda"), &vec![1, 2, 3], written_at())
            .unwrap();
        let back: Artifact<Vec<i32>> = store.read_json("thing.json").unwrap();
        assert_eq!(back.body, vec![1, 2, 3]);
        assert_eq!(back.meta.config_hash, "abc123");
        assert_eq!(back.meta.model.as_deref(), Some("lda"));
        let index = store.read_index().unwrap();
        assert_eq!(index.entries["thing.json"].artifact, "thing");
    }

    #[test]
    fn deterministic_core_ignores_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::new(dir.path(), "h", 1).unwrap();
        store
            .write_json("a.json", "x", None, &42, serde_json::json!({"t": 1}))
            .unwrap();
        let first: Artifact<i64> = store.read_json("a.json").unwrap();
        store
            .write_json("a.json", "x", None, &42, serde_json::json!({"t": 999}))
            .unwrap();
        let second: Artifact<i64> = store.read_json("a.json").unwrap();
        assert_eq!(
            serde_json::to_string(&(first.meta, first.body)).unwrap(),
            serde_json::to_string(&(second.meta, second.body)).unwrap(),
        );
    }
}
