//! Retrieval baseline and evaluation harness: TF-IDF fact selection,
//! Fact-F1 and Message-F1 scoring, and paper-level cross-validation folds.

pub mod eval;
pub mod folds;
pub mod metrics;
pub mod tfidf;

pub use eval::{
    evaluate_fact_selection, evaluate_generation, select_facts, EvalError, FactEvalReport,
    FactFoldScore, FactMethod, GenEvalReport, GenFoldScore, SampleRequest, DEFAULT_FACT_K,
    HISTORY_SEPARATOR,
};
pub use folds::{make_folds, turn_samples, FoldError, FoldIteration, FoldPlan, TurnSample};
pub use metrics::{fact_f1, message_f1};
pub use tfidf::{tfidf_embed, tfidf_fit, TfidfError, TfidfModel, TfidfProvider};
