//! Embedding provider backed by an external process.
//!
//! The adapter speaks a line protocol: each request is one JSON-encoded
//! string on stdin, each response one JSON array of numbers on stdout. The
//! child is spawned once and kept alive; responses are cached per text so a
//! nondeterministic child cannot violate the provider contract.

use crate::diversity::EmbeddingProvider;
use std::cell::RefCell;
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

pub struct ExternalCommandProvider {
    command: String,
    state: RefCell<Option<ChildState>>,
    cache: RefCell<HashMap<String, Vec<f64>>>,
}

struct ChildState {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

impl ExternalCommandProvider {
    /// `command` is run through `sh -c`, so pipelines and arguments work.
    pub fn new(command: impl Into<String>) -> Self {
        ExternalCommandProvider {
            command: command.into(),
            state: RefCell::new(None),
            cache: RefCell::new(HashMap::new()),
        }
    }

    fn ensure_child(&self) -> Result<(), String> {
        let mut state = self.state.borrow_mut();
        if state.is_none() {
            let mut child = Command::new("sh")
                .arg("-c")
                .arg(&self.command)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .spawn()
                .map_err(|e| format!("spawn {:?}: {e}", self.command))?;
            let stdin = child.stdin.take().expect("piped stdin");
            let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
            *state = Some(ChildState {
                child,
                stdin,
                stdout,
            });
        }
        Ok(())
    }

    fn request(&self, text: &str) -> Result<Vec<f64>, String> {
        self.ensure_child()?;
        let mut state = self.state.borrow_mut();
        let state = state.as_mut().expect("child running");
        let encoded = serde_json::to_string(text).expect("string encodes");
        writeln!(state.stdin, "{encoded}").map_err(|e| format!("write to embedder: {e}"))?;
        state
            .stdin
            .flush()
            .map_err(|e| format!("flush to embedder: {e}"))?;
        let mut line = String::new();
        let read = state
            .stdout
            .read_line(&mut line)
            .map_err(|e| format!("read from embedder: {e}"))?;
        if read == 0 {
            return Err("embedder closed its stdout".into());
        }
        let vector: Vec<f64> = serde_json::from_str(line.trim())
            .map_err(|e| format!("embedder response not a number array: {e}"))?;
        if vector.is_empty() || vector.iter().any(|x| !x.is_finite()) {
            return Err("embedder returned an empty or non-finite vector".into());
        }
        Ok(vector)
    }
}

impl EmbeddingProvider for ExternalCommandProvider {
    fn embed(&self, text: &str) -> Result<Vec<f64>, String> {
        if let Some(hit) = self.cache.borrow().get(text) {
            return Ok(hit.clone());
        }
        let vector = self.request(text)?;
        self.cache
            .borrow_mut()
            .insert(text.to_owned(), vector.clone());
        Ok(vector)
    }
}

impl Drop for ExternalCommandProvider {
    fn drop(&mut self) {
        if let Some(mut state) = self.state.borrow_mut().take() {
            drop(state.stdin);
            let _ = state.child.wait();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_protocol_round_trip() {
        // An embedder that maps every text to [len, 1].
        let provider = ExternalCommandProvider::new(
            r#"while read -r line; do n=${#line}; echo "[$n, 1]"; done"#,
        );
        let v = provider.embed("hello").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1], 1.0);
        // Cached: same text, same vector.
        assert_eq!(provider.embed("hello").unwrap(), v);
    }

    #[test]
    fn malformed_output_is_an_error() {
        let provider = ExternalCommandProvider::new("while read -r line; do echo notjson; done");
        assert!(provider.embed("x").is_err());
    }
}
