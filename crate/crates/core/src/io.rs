//! File formats: tuple and encoded CSVs, JSON sidecars, model files, hashing.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::datagen::{Class, GeneratorConfig, Tuple, RNG_NAME};
use crate::encoder::EncodingScheme;
use crate::network::{Dataset, NetError, Network, ObjectiveParams};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hex SHA-256 of a file's contents.
pub fn file_sha256(path: &Path) -> Result<String, IoError> {
    Ok(sha256_hex(&read_bytes(path)?))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, IoError> {
    fs::read(path).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    fs::write(path, bytes).map_err(|source| IoError::File { path: path.display().to_string(), source })
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    String::from_utf8(read_bytes(path)?).map_err(|e| IoError::Format(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, IoError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_bytes(path, to_json(value)?.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    Ok(serde_json::from_slice(&read_bytes(path)?)?)
}

/// Writes tuples as CSV with attribute columns followed by `label`.
pub fn write_tuples<W: Write>(out: W, tuples: &[Tuple]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    for t in tuples {
        w.serialize(t)?;
    }
    w.flush().map_err(|source| IoError::File { path: "<csv>".into(), source })?;
    Ok(())
}

pub fn read_tuples<R: Read>(input: R) -> Result<Vec<Tuple>, IoError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<Vec<Tuple>, _>>()?)
}

pub fn tuples_to_string(tuples: &[Tuple]) -> Result<String, IoError> {
    let mut buf = Vec::new();
    write_tuples(&mut buf, tuples)?;
    String::from_utf8(buf).map_err(|e| IoError::Format(e.to_string()))
}

/// Provenance sidecar of a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub generator: GeneratorConfig,
    pub rng: String,
    pub rows: usize,
}

impl DatasetMeta {
    pub fn new(generator: GeneratorConfig) -> Self {
        DatasetMeta { rows: generator.count, generator, rng: RNG_NAME.into() }
    }
}

/// Encoded rows as CSV: one `I<n>` column per input, then `label`.
pub fn encoded_to_string(scheme: &EncodingScheme, tuples: &[Tuple]) -> Result<String, IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=scheme.input_count()).map(|i| format!("I{i}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for t in tuples {
        let e = scheme.encode(t).map_err(|e| IoError::Format(e.to_string()))?;
        let mut row: Vec<String> = e.bits.iter().map(u8::to_string).collect();
        row.push(t.label.to_string());
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| IoError::Format(e.to_string()))
}

/// Reads an encoded CSV into a network dataset with two classes.
pub fn read_encoded<R: Read>(input: R) -> Result<Dataset, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers()?.len();
    if width < 2 {
        return Err(IoError::Format("encoded file needs inputs and a label".into()));
    }
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .take(width - 1)
            .map(|s| match s {
                "0" => Ok(0.0),
                "1" => Ok(1.0),
                _ => Err(IoError::Format(format!("bit `{s}` is not 0 or 1"))),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let label: Class = rec[width - 1].parse().map_err(|e| IoError::Format(format!("{e}")))?;
        rows.push(row);
        targets.push(label.index());
    }
    Ok(Dataset::new(width - 1, 2, rows, targets)?)
}

/// Network dataset from tuples under `scheme`.
pub fn encode_dataset(scheme: &EncodingScheme, tuples: &[Tuple]) -> Result<Dataset, IoError> {
    let rows = tuples
        .iter()
        .map(|t| scheme.encode(t).map(|e| e.inputs()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| IoError::Format(e.to_string()))?;
    let targets = tuples.iter().map(|t| t.label.index()).collect();
    Ok(Dataset::new(scheme.input_count(), 2, rows, targets)?)
}

/// Where a model came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset_sha256: String,
    pub seed: u64,
}

/// Serialized network with its objective parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub network: Network,
    pub params: ObjectiveParams,
    pub provenance: Provenance,
}
