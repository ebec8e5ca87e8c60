//! Model adapters: anything that turns a normalized sentence into scored
//! candidate rewrites.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::apply::{Candidate, CandidateSource};

#[derive(Debug, Error)]
pub enum AdapterError {
    #[error("adapter i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("adapter sent invalid response: {0}")]
    Protocol(String),
}

pub trait ModelAdapter {
    /// Candidates for one normalized sentence. Must be deterministic for a
    /// fixed adapter configuration.
    fn candidates(&mut self, normalized: &str) -> Result<Vec<Candidate>, AdapterError>;
}

#[derive(Debug, Serialize)]
struct Request<'a> {
    id: u64,
    normalized: &'a str,
}

#[derive(Debug, Deserialize)]
struct WireCandidate {
    text: String,
    score: f64,
}

#[derive(Debug, Deserialize)]
struct Response {
    id: u64,
    candidates: Vec<WireCandidate>,
}

/// Talks to a child process, one JSON request and one JSON response per
/// line over its standard streams.
pub struct ProcessAdapter {
    child: Child,
    stdin: Option<ChildStdin>,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
}

impl ProcessAdapter {
    pub fn spawn(program: &str, args: &[String]) -> Result<Self, AdapterError> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take();
        let stdout = BufReader::new(child.stdout.take().ok_or_else(|| AdapterError::Protocol("no stdout".into()))?);
        Ok(ProcessAdapter { child, stdin, stdout, next_id: 0 })
    }
}

impl ModelAdapter for ProcessAdapter {
    fn candidates(&mut self, normalized: &str) -> Result<Vec<Candidate>, AdapterError> {
        let id = self.next_id;
        self.next_id += 1;
        let stdin = self.stdin.as_mut().ok_or_else(|| AdapterError::Protocol("stdin closed".into()))?;
        let mut line = serde_json::to_string(&Request { id, normalized }).map_err(|e| AdapterError::Protocol(e.to_string()))?;
        line.push('\n');
        stdin.write_all(line.as_bytes())?;
        stdin.flush()?;

        let mut reply = String::new();
        if self.stdout.read_line(&mut reply)? == 0 {
            return Err(AdapterError::Protocol("adapter closed its output".into()));
        }
        let response: Response = serde_json::from_str(reply.trim()).map_err(|e| AdapterError::Protocol(e.to_string()))?;
        if response.id != id {
            return Err(AdapterError::Protocol(format!("expected id {id}, got {}", response.id)));
        }
        if let Some(bad) = response.candidates.iter().find(|c| !c.score.is_finite()) {
            return Err(AdapterError::Protocol(format!("non-finite score for {:?}", bad.text)));
        }
        Ok(response
            .candidates
            .into_iter()
            .map(|c| Candidate { text: c.text, score: c.score, source: CandidateSource::Adapter })
            .collect())
    }
}

impl Drop for ProcessAdapter {
    fn drop(&mut self) {
        // closing stdin lets a well-behaved child exit on its own
        drop(self.stdin.take());
        if matches!(self.child.try_wait(), Ok(None)) {
            let _ = self.child.kill();
        }
        let _ = self.child.wait();
    }
}
