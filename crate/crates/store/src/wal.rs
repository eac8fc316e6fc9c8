//! Snapshot plus append-log persistence.
//!
//! One directory holds `snapshot.json` (a full [`StudyState`]) and
//! `wal.jsonl` (one [`StateEvent`] per line, written ahead of
//! acknowledgement). Restore loads the snapshot and replays complete log
//! lines; a torn final line is discarded, so recovery lands on the last
//! complete record.

use crate::event::{apply, StateEvent};
use crate::state::StudyState;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SNAPSHOT_FILE: &str = "snapshot.json";
pub const LOG_FILE: &str = "wal.jsonl";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt snapshot: {0}")]
    CorruptSnapshot(String),
    #[error("corrupt log record {line}: {reason}")]
    CorruptLog { line: usize, reason: String },
}

pub struct Store {
    dir: PathBuf,
    log: File,
    /// Events appended since the last snapshot.
    log_records: usize,
}

/// Snapshot after this many logged events to bound replay time.
const SNAPSHOT_EVERY: usize = 256;

impl Store {
    /// Opens (or initializes) the storage directory and restores the state:
    /// snapshot, then replay of every complete log line.
    pub fn open(
        dir: impl Into<PathBuf>,
        init: impl FnOnce() -> StudyState,
    ) -> Result<(Store, StudyState), StoreError> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        let snapshot_path = dir.join(SNAPSHOT_FILE);
        let mut state = if snapshot_path.exists() {
            let bytes = std::fs::read(&snapshot_path).map_err(|e| io_err(&snapshot_path, e))?;
            if bytes.is_empty() {
                init()
            } else {
                serde_json::from_slice(&bytes)
                    .map_err(|e| StoreError::CorruptSnapshot(e.to_string()))?
            }
        } else {
            init()
        };

        let log_path = dir.join(LOG_FILE);
        let mut log_records = 0usize;
        if log_path.exists() {
            let file = File::open(&log_path).map_err(|e| io_err(&log_path, e))?;
            let mut reader = BufReader::new(file);
            let mut line = String::new();
            let mut line_number = 0usize;
            loop {
                line.clear();
                let read = reader
                    .read_line(&mut line)
                    .map_err(|e| io_err(&log_path, e))?;
                if read == 0 {
                    break;
                }
                line_number += 1;
                let complete = line.ends_with('\n');
                let trimmed = line.trim_end();
                if trimmed.is_empty() {
                    continue;
                }
                match serde_json::from_str::<StateEvent>(trimmed) {
                    Ok(event) => {
                        apply(&mut state, event);
                        log_records += 1;
                    }
                    Err(e) if !complete => {
                        // Torn final record from a crash mid-write; drop it.
                        let _ = e;
                        break;
                    }
                    Err(e) => {
                        return Err(StoreError::CorruptLog {
                            line: line_number,
                            reason: e.to_string(),
                        });
                    }
                }
            }
        }

        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(|e| io_err(&log_path, e))?;
        Ok((
            Store {
                dir,
                log,
                log_records,
            },
            state,
        ))
    }

    /// Appends one event, durably, before the caller acknowledges the
    /// mutation. Returns true when the caller should snapshot soon.
    pub fn append(&mut self, event: &StateEvent) -> Result<bool, StoreError> {
        let mut line = serde_json::to_vec(event).expect("event serializes");
        line.push(b'\n');
        self.log
            .write_all(&line)
            .and_then(|_| self.log.flush())
            .and_then(|_| self.log.sync_data())
            .map_err(|e| io_err(&self.dir.join(LOG_FILE), e))?;
        self.log_records += 1;
        Ok(self.log_records >= SNAPSHOT_EVERY)
    }

    /// Writes a full snapshot atomically (write-new, fsync, rename) and
    /// truncates the log.
    pub fn snapshot(&mut self, state: &StudyState) -> Result<(), StoreError> {
        let tmp_path = self.dir.join("snapshot.json.tmp");
        let bytes = serde_json::to_vec_pretty(state).expect("state serializes");
        {
            let mut tmp = File::create(&tmp_path).map_err(|e| io_err(&tmp_path, e))?;
            tmp.write_all(&bytes).map_err(|e| io_err(&tmp_path, e))?;
            tmp.sync_all().map_err(|e| io_err(&tmp_path, e))?;
        }
        let snapshot_path = self.dir.join(SNAPSHOT_FILE);
        std::fs::rename(&tmp_path, &snapshot_path).map_err(|e| io_err(&snapshot_path, e))?;

        let log_path = self.dir.join(LOG_FILE);
        self.log = File::create(&log_path).map_err(|e| io_err(&log_path, e))?;
        self.log_records = 0;
        Ok(())
    }

    /// Restores a state from snapshot bytes alone (no log replay).
    pub fn restore(bytes: &[u8]) -> Result<StudyState, StoreError> {
        serde_json::from_slice(bytes).map_err(|e| StoreError::CorruptSnapshot(e.to_string()))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

fn io_err(path: &Path, source: std::io::Error) -> StoreError {
    StoreError::Io {
        path: path.to_owned(),
        source,
    }
}
