//! Writing reports: every file carries the run metadata, and the manifest
//! records a content hash per artifact.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub config_hash: String,
    pub toolkit_version: String,
    pub seed: u64,
}

impl Meta {
    pub fn new(config_hash: impl Into<String>, seed: u64) -> Self {
        Meta { config_hash: config_hash.into(), toolkit_version: lrlkit::VERSION.to_string(), seed }
    }

    /// One-line comment header for TSV and Pharaoh files.
    pub fn comment(&self) -> String {
        format!(
            "# lrlkit {} config_hash={} seed={}\n",
            self.toolkit_version, self.config_hash, self.seed
        )
    }
}

fn write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// `value` must serialize to a JSON object; `_meta` is added to it.
pub fn to_json_with_meta<T: Serialize>(meta: &Meta, value: &T) -> CliResult<String> {
    let mut v = serde_json::to_value(value)?;
    match v.as_object_mut() {
        Some(obj) => {
            obj.insert("_meta".into(), serde_json::to_value(meta)?);
        }
        None => return Err(CliError::Invalid("report is not a JSON object".into())),
    }
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, value: &T) -> CliResult<()> {
    write(path, to_json_with_meta(meta, value)?.as_bytes())
}

/// JSON lines preceded by a `{"_meta": ...}` header line.
pub fn write_jsonl<T: Serialize>(path: &Path, meta: &Meta, rows: &[T]) -> CliResult<()> {
    let mut out = serde_json::to_string(&serde_json::json!({ "_meta": meta }))?;
    out.push('\n');
    for r in rows {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    write(path, out.as_bytes())
}

/// Plain-text artifact with a `#` metadata header line.
pub fn write_text(path: &Path, meta: &Meta, body: &str) -> CliResult<()> {
    let mut out = meta.comment();
    out.push_str(body);
    write(path, out.as_bytes())
}

pub fn write_plain(path: &Path, body: &str) -> CliResult<()> {
    write(path, body.as_bytes())
}

/// Read the rows of a JSON-lines file written by [`write_jsonl`], skipping
/// the metadata header.
pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line)
            .map_err(|e| CliError::Invalid(format!("{}: line {}: {e}", path.display(), idx + 1)))?;
        if v.get("_meta").is_some() {
            continue;
        }
        rows.push(
            serde_json::from_value(v)
                .map_err(|e| CliError::Invalid(format!("{}: line {}: {e}", path.display(), idx + 1)))?,
        );
    }
    Ok(rows)
}

fn strip_latency(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("latency_ms");
            m.values_mut().for_each(strip_latency);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_latency),
        _ => {}
    }
}

/// SHA-256 of a file's content with every `latency_ms` field removed from
/// JSON and JSON-lines files; other files hash byte for byte.
pub fn content_hash(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    let normalized = match ext {
        "json" => {
            let mut v: Value = serde_json::from_slice(&bytes)?;
            strip_latency(&mut v);
            serde_json::to_string(&v)?.into_bytes()
        }
        "jsonl" => {
            let text = String::from_utf8_lossy(&bytes);
            let mut out = String::new();
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                let mut v: Value = serde_json::from_str(line)?;
                strip_latency(&mut v);
                out.push_str(&serde_json::to_string(&v)?);
                out.push('\n');
            }
            out.into_bytes()
        }
        _ => bytes,
    };
    Ok(lrlkit::sha256_hex(&normalized))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedStage {
    pub stage: String,
    pub error: String,
}

/// Bundle index, rewritten after every pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub language: String,
    pub artifacts: Vec<Artifact>,
    pub completed_stages: Vec<String>,
    pub failed_stage: Option<FailedStage>,
    pub flagged: bool,
}

pub struct ManifestWriter {
    dir: PathBuf,
    meta: Meta,
    pub manifest: Manifest,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl ManifestWriter {
    pub fn new(dir: &Path, meta: Meta, language: &str) -> Self {
        ManifestWriter {
            dir: dir.to_path_buf(),
            meta,
            manifest: Manifest {
                language: language.to_string(),
                artifacts: Vec::new(),
                completed_stages: Vec::new(),
                failed_stage: None,
                flagged: false,
            },
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn add(&mut self, name: &str) -> CliResult<()> {
        let sha256 = content_hash(&self.dir.join(name))?;
        self.manifest.artifacts.retain(|a| a.path != name);
        self.manifest.artifacts.push(Artifact { path: name.to_string(), sha256 });
        Ok(())
    }

    pub fn complete(&mut self, stage: &str) -> CliResult<()> {
        self.manifest.completed_stages.push(stage.to_string());
        self.save()
    }

    pub fn fail(&mut self, stage: &str, error: &CliError) -> CliResult<()> {
        self.manifest.failed_stage = Some(FailedStage { stage: stage.to_string(), error: error.to_string() });
        self.save()
    }

    pub fn save(&self) -> CliResult<()> {
        write_json(&self.dir.join(MANIFEST_NAME), &self.meta, &self.manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn latency_does_not_change_the_hash() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        std::fs::write(&a, "{\"_meta\":{}}\n{\"id\":\"x\",\"latency_ms\":3}\n").unwrap();
        std::fs::write(&b, "{\"_meta\":{}}\n{\"id\":\"x\",\"latency_ms\":917}\n").unwrap();
        assert_eq!(content_hash(&a).unwrap(), content_hash(&b).unwrap());
        std::fs::write(&b, "{\"_meta\":{}}\n{\"id\":\"y\",\"latency_ms\":3}\n").unwrap();
        assert_ne!(content_hash(&a).unwrap(), content_hash(&b).unwrap());
    }
}
