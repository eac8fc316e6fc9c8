//! Supportive-fact statistics: grounding rates, anchor distances, section
//! split and the introduction chunk histogram.

use forge_domain::{Corpus, Role, SectionKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactStats {
    /// Percentage of grounded expert messages carrying exactly one fact.
    pub pct_one_fact: f64,
    /// Percentage carrying exactly two facts.
    pub pct_two_fact: f64,
    /// Mean absolute distance between the two anchors of 2-fact messages, in
    /// flattened (title + abstract + introduction) sentence indices. Absent
    /// when no 2-fact message exists.
    pub avg_sentence_distance: Option<f64>,
    /// Percentage of all anchors pointing into each section.
    pub pct_by_section: BTreeMap<SectionKind, f64>,
    pub grounded_messages: usize,
    pub total_anchors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChunkHistogram {
    pub chunk_size: usize,
    /// Anchor counts per introduction chunk, pooled over papers.
    pub counts: Vec<usize>,
    /// Counts normalized by the total number of introduction anchors.
    pub fractions: Vec<f64>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FactError {
    #[error("corpus has no fact-grounded expert messages")]
    NoGroundedMessages,
}

pub fn fact_stats(corpus: &Corpus) -> Result<FactStats, FactError> {
    let mut grounded = 0usize;
    let mut one_fact = 0usize;
    let mut two_fact = 0usize;
    let mut distances: Vec<f64> = Vec::new();
    let mut section_counts: BTreeMap<SectionKind, usize> = BTreeMap::new();
    let mut total_anchors = 0usize;

    for dialogue in &corpus.dialogues {
        let paper = corpus
            .papers
            .get(&dialogue.paper_id)
            .expect("corpus invariant: paper resolves");
        for message in &dialogue.messages {
            if message.role != Role::DomainExpert || message.facts.is_empty() {
                continue;
            }
            grounded += 1;
            match message.facts.len() {
                1 => one_fact += 1,
                2 => two_fact += 1,
                _ => unreachable!("corpus invariant: at most two facts"),
            }
            for anchor in &message.facts {
                *section_counts.entry(anchor.section_kind).or_default() += 1;
                total_anchors += 1;
            }
            if let [a, b] = message.facts[..] {
                let ga = paper
                    .global_index(a.section_kind, a.sentence_index)
                    .expect("corpus invariant: anchor resolves");
                let gb = paper
                    .global_index(b.section_kind, b.sentence_index)
                    .expect("corpus invariant: anchor resolves");
                distances.push((ga as f64 - gb as f64).abs());
            }
        }
    }
    if grounded == 0 {
        return Err(FactError::NoGroundedMessages);
    }

    let pct_by_section = SectionKind::ORDER
        .into_iter()
        .map(|kind| {
            let count = section_counts.get(&kind).copied().unwrap_or(0);
            (kind, 100.0 * count as f64 / total_anchors as f64)
        })
        .collect();
    let avg_sentence_distance = if distances.is_empty() {
        None
    } else {
        Some(distances.iter().sum::<f64>() / distances.len() as f64)
    };
    Ok(FactStats {
        pct_one_fact: 100.0 * one_fact as f64 / grounded as f64,
        pct_two_fact: 100.0 * two_fact as f64 / grounded as f64,
        avg_sentence_distance,
        pct_by_section,
        grounded_messages: grounded,
        total_anchors,
    })
}

/// Partitions each introduction into consecutive chunks of `chunk_size`
/// sentences (the last chunk may be short) and histograms where anchors land.
/// The histogram spans the longest introduction in the corpus, pooling
/// anchors from all papers by chunk index.
pub fn fact_chunk_histogram(corpus: &Corpus, chunk_size: usize) -> ChunkHistogram {
    assert!(chunk_size >= 1, "chunk_size must be at least 1");
    let max_chunks = corpus
        .papers
        .values()
        .filter_map(|p| p.section(SectionKind::Introduction))
        .map(|s| s.sentences.len().div_ceil(chunk_size))
        .max()
        .unwrap_or(0);
    let mut counts = vec![0usize; max_chunks];
    let mut total = 0usize;
    for dialogue in &corpus.dialogues {
        for message in &dialogue.messages {
            for anchor in &message.facts {
                if anchor.section_kind == SectionKind::Introduction {
                    counts[anchor.sentence_index / chunk_size] += 1;
                    total += 1;
                }
            }
        }
    }
    let fractions = counts
        .iter()
        .map(|&c| {
            if total == 0 {
                0.0
            } else {
                c as f64 / total as f64
            }
        })
        .collect();
    ChunkHistogram {
        chunk_size,
        counts,
        fractions,
    }
}
