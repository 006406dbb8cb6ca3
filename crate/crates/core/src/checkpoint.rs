//! Checkpoint container: a one-line header carrying the format version and a
//! SHA-256 checksum, followed by a JSON payload. The checksum makes truncated
//! or corrupted files a detectable error instead of undefined behavior, and
//! the payload embeds the full run configuration and wiring text so a
//! checkpoint alone reproduces its run.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::RunConfig;
use crate::search::SearchSnapshot;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "twcircuit-checkpoint";

/// Everything needed to resume (or replay) a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub config: RunConfig,
    /// Canonical wiring text the run was built from.
    pub wiring: String,
    pub snapshot: SearchSnapshot,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad header)")]
    BadHeader,
    #[error("unsupported checkpoint version {found} (this build reads version {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("checksum mismatch: checkpoint is corrupt or truncated")]
    ChecksumMismatch,
    #[error("corrupt checkpoint payload: {0}")]
    Corrupt(String),
}

fn hex_digest(payload: &[u8]) -> String {
    let digest = Sha256::digest(payload);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Serialize a record to its on-disk byte form.
pub fn encode(record: &TrainingRecord) -> Vec<u8> {
    let payload = serde_json::to_string(record).expect("record serialization cannot fail");
    let header = format!("{MAGIC} v{FORMAT_VERSION} sha256={}\n", hex_digest(payload.as_bytes()));
    let mut bytes = header.into_bytes();
    bytes.extend_from_slice(payload.as_bytes());
    bytes
}

pub fn decode(bytes: &[u8]) -> Result<TrainingRecord, CheckpointError> {
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or(CheckpointError::BadHeader)?;
    let header = std::str::from_utf8(&bytes[..newline]).map_err(|_| CheckpointError::BadHeader)?;
    let payload = &bytes[newline + 1..];

    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err(CheckpointError::BadHeader);
    }
    let version: u32 = parts
        .next()
        .and_then(|v| v.strip_prefix('v'))
        .and_then(|v| v.parse().ok())
        .ok_or(CheckpointError::BadHeader)?;
    if version != FORMAT_VERSION {
        return Err(CheckpointError::VersionMismatch { found: version, expected: FORMAT_VERSION });
    }
    let checksum = parts
        .next()
        .and_then(|v| v.strip_prefix("sha256="))
        .ok_or(CheckpointError::BadHeader)?;
    if checksum != hex_digest(payload) {
        return Err(CheckpointError::ChecksumMismatch);
    }
    serde_json::from_slice(payload).map_err(|e| CheckpointError::Corrupt(e.to_string()))
}

/// Write atomically: stage to a sibling temp file, then rename into place.
pub fn save_checkpoint(record: &TrainingRecord, path: &Path) -> Result<(), CheckpointError> {
    let bytes = encode(record);
    let tmp = path.with_extension("tmp");
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(&bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<TrainingRecord, CheckpointError> {
    decode(&fs::read(path)?)
}
