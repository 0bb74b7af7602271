//! Versioned JSON record files used for stage handoff.
//!
//! Every file written by a stage is a JSON object with a `"format"` tag such
//! as `"litcat.article/1"` followed by the record's own fields. Readers
//! reject unknown tags instead of guessing.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum RecordIoError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: expected format {expected:?}, found {found:?}")]
    Format { path: String, expected: String, found: String },
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format: String,
    #[serde(flatten)]
    body: T,
}

/// Serialize `body` under a format tag. Output is pretty-printed and ends
/// with a newline; it is byte-stable for equal inputs.
pub fn to_record_string<T: Serialize>(format: &str, body: &T) -> String {
    let env = Envelope { format: format.to_string(), body };
    let mut s = serde_json::to_string_pretty(&env).expect("records serialize");
    s.push('\n');
    s
}

pub fn write_record<T: Serialize>(path: &Path, format: &str, body: &T) -> Result<(), RecordIoError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
    }
    // write-then-rename so readers never see a torn file
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, to_record_string(format, body)).map_err(|e| io_err(path, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn read_record<T: DeserializeOwned>(path: &Path, format: &str) -> Result<T, RecordIoError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let env: Envelope<T> = serde_json::from_str(&text).map_err(|e| RecordIoError::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    if env.format != format {
        return Err(RecordIoError::Format {
            path: path.display().to_string(),
            expected: format.to_string(),
            found: env.format,
        });
    }
    Ok(env.body)
}

fn io_err(path: &Path, source: io::Error) -> RecordIoError {
    RecordIoError::Io { path: path.display().to_string(), source }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Thing {
        a: u32,
    }

    #[test]
    fn round_trip_and_format_check() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x/thing.json");
        write_record(&p, "litcat.thing/1", &Thing { a: 3 }).unwrap();
        let t: Thing = read_record(&p, "litcat.thing/1").unwrap();
        assert_eq!(t, Thing { a: 3 });
        let err = read_record::<Thing>(&p, "litcat.thing/2").unwrap_err();
        assert!(matches!(err, RecordIoError::Format { .. }));
    }
}
