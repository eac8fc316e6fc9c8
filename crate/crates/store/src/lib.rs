//! Durable persistence for the study: a snapshot plus write-ahead append
//! log, the canonical corpus encoding, and a best-effort adapter for
//! published release files.

pub mod corpus_io;
pub mod event;
pub mod service;
pub mod state;
pub mod wal;

pub use corpus_io::{export_corpus, import_corpus, import_corpus_or_release, ImportError};
pub use event::{apply, StateEvent};
pub use service::{ServiceError, StudyService};
pub use state::{StudyState, SCHEMA_VERSION};
pub use wal::{Store, StoreError, LOG_FILE, SNAPSHOT_FILE};
