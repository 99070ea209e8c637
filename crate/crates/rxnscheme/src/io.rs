//! File formats: JSON documents, JSONL record streams, and the loaders that
//! accept annotations in any of the shapes the tools write.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use rxnscheme_core::assemble::AssembledReaction;
use rxnscheme_core::synth::ManifestEntry;
use rxnscheme_core::{ConditionRecord, ImageAnnotation, Prediction, ReactionRecord};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

/// A data problem, located by file and line or offset.
#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}:{column}: {source}")]
    Json { path: PathBuf, line: usize, column: usize, source: serde_json::Error },
    #[error("{path}: {msg}")]
    Invalid { path: PathBuf, msg: String },
}

impl DataError {
    pub fn invalid(path: impl Into<PathBuf>, msg: impl std::fmt::Display) -> Self {
        Self::Invalid { path: path.into(), msg: msg.to_string() }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    fn json(path: &Path, line_offset: usize, source: serde_json::Error) -> Self {
        Self::Json { path: path.to_path_buf(), line: source.line() + line_offset, column: source.column(), source }
    }
}

/// Reads a whole file, or standard input for `-`.
pub fn read_text(path: &Path) -> Result<String, DataError> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| DataError::io(path, e))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| DataError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, DataError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| DataError::json(path, 0, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("in-memory values always serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), DataError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| DataError::io(dir, e))?;
    }
    fs::write(path, to_json_string(value)).map_err(|e| DataError::io(path, e))
}

/// One JSON object per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DataError> {
    let file = fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| DataError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| DataError::json(path, n, e))?);
    }
    Ok(out)
}

/// Reaction records from JSONL, each checked.
pub fn read_records(path: &Path) -> Result<Vec<ReactionRecord>, DataError> {
    let recs: Vec<ReactionRecord> = read_jsonl(path)?;
    for (i, r) in recs.iter().enumerate() {
        r.validate().map_err(|e| DataError::invalid(path, format!("record {i}: {e}")))?;
    }
    Ok(recs)
}

fn is_manifest(v: &Value) -> bool {
    v.as_array().and_then(|a| a.first()).is_some_and(|e| e.get("annotation").is_some() && e.get("objects").is_none())
}

/// Every document a path refers to: a directory (its `manifest.json`), a
/// manifest (the annotation files it lists), an array, or a single document.
fn load_values(path: &Path) -> Result<Vec<(PathBuf, Value)>, DataError> {
    let path = if path.is_dir() { path.join("manifest.json") } else { path.to_path_buf() };
    let text = read_text(&path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| DataError::json(&path, 0, e))?;
    if is_manifest(&value) {
        let entries: Vec<ManifestEntry> =
            serde_json::from_value(value).map_err(|e| DataError::invalid(&path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        return entries
            .iter()
            .map(|e| {
                let p = base.join(&e.annotation);
                Ok((p.clone(), read_json(&p)?))
            })
            .collect();
    }
    match value {
        Value::Array(items) => Ok(items.into_iter().map(|v| (path.clone(), v)).collect()),
        v => Ok(vec![(path, v)]),
    }
}

fn decode<T: DeserializeOwned>(docs: Vec<(PathBuf, Value)>) -> Result<Vec<T>, DataError> {
    docs.into_iter()
        .enumerate()
        .map(|(i, (p, v))| serde_json::from_value(v).map_err(|e| DataError::invalid(p, format!("document {i}: {e}"))))
        .collect()
}

pub fn load_annotations(path: &Path) -> Result<Vec<ImageAnnotation>, DataError> {
    decode(load_values(path)?)
}

/// Predictions; annotation files load as predictions too.
pub fn load_predictions(path: &Path) -> Result<Vec<Prediction>, DataError> {
    decode(load_values(path)?)
}

/// Condition records, given directly or taken from annotations.
pub fn load_condition_records(path: &Path) -> Result<Vec<ConditionRecord>, DataError> {
    let docs = load_values(path)?;
    if docs.iter().all(|(_, v)| v.get("words").is_some()) {
        return decode(docs);
    }
    let anns: Vec<ImageAnnotation> = decode(docs)?;
    Ok(anns.iter().flat_map(ImageAnnotation::condition_records).collect())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, DataError> {
    let path = if path.is_dir() { path.join("manifest.json") } else { path.to_path_buf() };
    read_json(&path)
}

/// Assembled reactions as one JSON array, fields in declaration order.
pub fn export_json(records: &[AssembledReaction], mut out: impl Write) -> std::io::Result<()> {
    out.write_all(to_json_string(records).as_bytes())
}

pub fn import_json(input: impl Read) -> serde_json::Result<Vec<AssembledReaction>> {
    serde_json::from_reader(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_export() {
        let mut buf = Vec::new();
        export_json(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "[]\n");
    }

    #[test]
    fn export_has_every_key() {
        let mut buf = Vec::new();
        export_json(&[AssembledReaction::default()], &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        let keys: Vec<&str> = v[0].as_object().unwrap().keys().map(String::as_str).collect();
        for k in [
            "reactant_smiles",
            "agent_smiles",
            "product_smiles",
            "agents_text",
            "solvents_text",
            "temperature",
            "time",
            "yield_pct",
            "provenance",
        ] {
            assert!(keys.contains(&k), "{k}");
        }
        assert!(v[0]["temperature"].is_null());
    }

    #[test]
    fn jsonl_errors_name_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.jsonl");
        fs::write(&p, "{\"reactant_smiles\":[\"C\"],\"product_smiles\":[\"O\"]}\n\n{oops}\n").unwrap();
        let err = read_records(&p).unwrap_err();
        assert!(matches!(err, DataError::Json { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("r.jsonl:3:"));
    }
}
