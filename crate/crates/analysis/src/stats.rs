//! Corpus-level counting and per-dialogue statistics.

use crate::tokenizer::Tokenizer;
use forge_domain::{derive_turns, Corpus};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Raw corpus counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub papers: usize,
    pub dialogues: usize,
    pub messages: usize,
    pub sentences: usize,
    /// Dialogues per paper, rounded to one decimal.
    pub avg_dialogues_per_paper: f64,
}

/// Dialogue-shape statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialogueStats {
    /// Mean number of (P, DE) turns per dialogue.
    pub avg_turns: f64,
    /// Percentage of messages with two or more sentences.
    pub pct_msm: f64,
    /// Mean tokens per message.
    pub avg_msg_len: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatsError {
    #[error("corpus has no dialogues")]
    EmptyCorpus,
}

pub fn corpus_counts(corpus: &Corpus) -> CorpusCounts {
    let papers = corpus.papers.len();
    let dialogues = corpus.dialogues.len();
    let messages: usize = corpus.dialogues.iter().map(|d| d.messages.len()).sum();
    let sentences: usize = corpus
        .dialogues
        .iter()
        .flat_map(|d| &d.messages)
        .map(|m| m.sentences.len())
        .sum();
    let avg = if papers == 0 {
        0.0
    } else {
        (dialogues as f64 / papers as f64 * 10.0).round() / 10.0
    };
    CorpusCounts {
        papers,
        dialogues,
        messages,
        sentences,
        avg_dialogues_per_paper: avg,
    }
}

pub fn dialogue_stats(corpus: &Corpus, tokenizer: &Tokenizer) -> Result<DialogueStats, StatsError> {
    if corpus.dialogues.is_empty() {
        return Err(StatsError::EmptyCorpus);
    }
    let turn_total: usize = corpus.dialogues.iter().map(|d| derive_turns(d).len()).sum();
    let avg_turns = turn_total as f64 / corpus.dialogues.len() as f64;

    let mut messages = 0usize;
    let mut multi = 0usize;
    let mut tokens = 0usize;
    for message in corpus.dialogues.iter().flat_map(|d| &d.messages) {
        messages += 1;
        if message.is_multi_sentence() {
            multi += 1;
        }
        tokens += message
            .sentences
            .iter()
            .map(|s| tokenizer.token_count(&s.text))
            .sum::<usize>();
    }
    // A corpus dialogue has at least eight messages, so messages > 0 here.
    Ok(DialogueStats {
        avg_turns,
        pct_msm: 100.0 * multi as f64 / messages as f64,
        avg_msg_len: tokens as f64 / messages as f64,
    })
}
