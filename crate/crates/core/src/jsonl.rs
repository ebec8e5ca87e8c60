//! JSON Lines helpers.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
}

pub fn write_jsonl<T: Serialize, W: Write>(mut out: W, items: &[T]) -> Result<(), JsonlError> {
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|source| JsonlError::Json { line: 0, source })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Read one record per non-empty line.
pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(input: R) -> Result<Vec<T>, JsonlError> {
    let mut items = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        items.push(serde_json::from_str(&line).map_err(|source| JsonlError::Json { line: i + 1, source })?);
    }
    Ok(items)
}
