//! Topical diversity of messages on the same paper.
//!
//! Messages are embedded, paired, and a pair counts as topically diverse when
//! its cosine similarity falls below a threshold. Scores for three message
//! groupings (P messages; DE messages per P-topic cluster; DE messages with
//! their supportive facts) are averaged over papers with multiple dialogues.

use forge_domain::{derive_turns, Corpus, Role};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Single-link merge threshold used to cluster P messages into topics.
pub const DEFAULT_CLUSTER_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum DiversityError {
    #[error("diversity needs at least two messages, got {got}")]
    TooFewMessages { got: usize },
    #[error("embedding of item {index} has zero norm")]
    ZeroVector { index: usize },
    #[error("no paper has two or more dialogues")]
    NoMultiDialoguePapers,
    #[error("embedding provider failed: {0}")]
    Provider(String),
}

/// Text-to-vector interface. Implementations must be deterministic per text
/// and return finite vectors of one fixed dimension.
pub trait EmbeddingProvider {
    fn embed(&self, text: &str) -> Result<Vec<f64>, String>;
}

fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        None
    } else {
        Some(dot / (na * nb))
    }
}

fn embed_all(
    texts: &[String],
    provider: &dyn EmbeddingProvider,
) -> Result<Vec<Vec<f64>>, DiversityError> {
    let mut vectors = Vec::with_capacity(texts.len());
    for (index, text) in texts.iter().enumerate() {
        let v = provider.embed(text).map_err(DiversityError::Provider)?;
        if v.iter().map(|x| x * x).sum::<f64>() == 0.0 {
            return Err(DiversityError::ZeroVector { index });
        }
        vectors.push(v);
    }
    Ok(vectors)
}

/// Fraction of unordered message pairs whose cosine similarity is below
/// `threshold`. Pairs at or above the threshold count as topically similar.
pub fn diversity_score(
    messages: &[String],
    provider: &dyn EmbeddingProvider,
    threshold: f64,
) -> Result<f64, DiversityError> {
    if messages.len() < 2 {
        return Err(DiversityError::TooFewMessages {
            got: messages.len(),
        });
    }
    let vectors = embed_all(messages, provider)?;
    let (diverse, total) = diverse_pairs(&vectors, threshold);
    Ok(diverse as f64 / total as f64)
}

/// Counts diverse pairs among all unordered pairs of `vectors`. Vectors must
/// be non-zero.
fn diverse_pairs(vectors: &[Vec<f64>], threshold: f64) -> (usize, usize) {
    let mut diverse = 0usize;
    let mut total = 0usize;
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            total += 1;
            let sim = cosine(&vectors[i], &vectors[j]).expect("non-zero checked");
            if sim < threshold {
                diverse += 1;
            }
        }
    }
    (diverse, total)
}

/// Diversity of one message group across thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupScores {
    /// Papers that contributed at least one scoreable pair.
    pub papers: usize,
    /// One averaged score per requested threshold; empty when no paper
    /// qualified.
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub thresholds: Vec<f64>,
    pub g1: GroupScores,
    pub g2: GroupScores,
    pub g3: GroupScores,
    /// Papers with two or more dialogues (the eligible population).
    pub eligible_papers: usize,
}

/// Pair lists per group for one paper: plain item lists for G1/G3, and for
/// G2 the DE replies partitioned by their P-topic cluster.
struct PaperGroups {
    g1: Vec<Vec<f64>>,
    g2_clusters: Vec<Vec<Vec<f64>>>,
    g3: Vec<Vec<f64>>,
}

fn single_link_clusters(vectors: &[Vec<f64>], merge_threshold: f64) -> Vec<usize> {
    let n = vectors.len();
    let mut cluster: Vec<usize> = (0..n).collect();
    fn root(cluster: &mut Vec<usize>, mut i: usize) -> usize {
        while cluster[i] != i {
            cluster[i] = cluster[cluster[i]];
            i = cluster[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if let Some(sim) = cosine(&vectors[i], &vectors[j]) {
                if sim >= merge_threshold {
                    let (a, b) = (root(&mut cluster, i), root(&mut cluster, j));
                    cluster[a.max(b)] = a.min(b);
                }
            }
        }
    }
    (0..n).map(|i| root(&mut cluster, i)).collect()
}

/// Averaged per-group diversity over all papers with multiple dialogues.
///
/// G2 clusters each paper's P messages by single-link merging at cosine >=
/// `cluster_threshold`, assigns every DE turn reply to the cluster of the P
/// message it answers, and scores pairs of DE replies within the same
/// cluster.
pub fn grouped_diversity_with(
    corpus: &Corpus,
    provider: &dyn EmbeddingProvider,
    thresholds: &[f64],
    cluster_threshold: f64,
) -> Result<DiversityReport, DiversityError> {
    let by_paper = corpus.dialogues_by_paper();
    let eligible: Vec<_> = by_paper
        .iter()
        .filter(|(_, dialogues)| dialogues.len() >= 2)
        .collect();
    if eligible.is_empty() {
        return Err(DiversityError::NoMultiDialoguePapers);
    }

    let mut paper_groups: Vec<PaperGroups> = Vec::new();
    for (paper_id, dialogues) in &eligible {
        let paper = corpus.papers.get(paper_id).expect("paper resolves");

        let mut g1_texts: Vec<String> = Vec::new();
        let mut g3_texts: Vec<String> = Vec::new();
        // (P text, DE text) per turn, used for the G2 cluster assignment.
        let mut turn_texts: Vec<(String, String)> = Vec::new();
        for dialogue in dialogues.iter() {
            for message in &dialogue.messages {
                match message.role {
                    Role::Proponent => g1_texts.push(message.text()),
                    Role::DomainExpert => {
                        let mut item = message.text();
                        for anchor in &message.facts {
                            if let Some(fact) = anchor.resolve(paper) {
                                item.push(' ');
                                item.push_str(fact);
                            }
                        }
                        g3_texts.push(item);
                    }
                }
            }
            for turn in derive_turns(dialogue) {
                turn_texts.push((turn.p_message.text(), turn.de_message.text()));
            }
        }

        let g1 = embed_all(&g1_texts, provider)?;
        let g3 = embed_all(&g3_texts, provider)?;
        let p_queries: Vec<String> = turn_texts.iter().map(|(p, _)| p.clone()).collect();
        let de_replies: Vec<String> = turn_texts.iter().map(|(_, de)| de.clone()).collect();
        let p_vectors = embed_all(&p_queries, provider)?;
        let de_vectors = embed_all(&de_replies, provider)?;
        let assignment = single_link_clusters(&p_vectors, cluster_threshold);
        let mut clusters: std::collections::BTreeMap<usize, Vec<Vec<f64>>> = Default::default();
        for (turn, cluster_id) in assignment.into_iter().enumerate() {
            clusters.entry(cluster_id).or_default().push(de_vectors[turn].clone());
        }
        paper_groups.push(PaperGroups {
            g1,
            g2_clusters: clusters.into_values().collect(),
            g3,
        });
    }

    let average = |per_paper: Vec<Vec<(usize, usize)>>| -> GroupScores {
        // per_paper[paper][threshold] = (diverse, total); papers with zero
        // pairs are excluded from the average.
        let mut scores = vec![0f64; thresholds.len()];
        let mut used = 0usize;
        for paper_counts in &per_paper {
            if paper_counts.iter().all(|&(_, total)| total == 0) {
                continue;
            }
            used += 1;
            for (slot, &(diverse, total)) in scores.iter_mut().zip(paper_counts) {
                *slot += diverse as f64 / total as f64;
            }
        }
        if used > 0 {
            for slot in &mut scores {
                *slot /= used as f64;
            }
            GroupScores {
                papers: used,
                scores,
            }
        } else {
            GroupScores {
                papers: 0,
                scores: vec![],
            }
        }
    };

    let g1 = average(
        paper_groups
            .iter()
            .map(|g| {
                thresholds
                    .iter()
                    .map(|&t| diverse_pairs(&g.g1, t))
                    .collect()
            })
            .collect(),
    );
    let g3 = average(
        paper_groups
            .iter()
            .map(|g| {
                thresholds
                    .iter()
                    .map(|&t| diverse_pairs(&g.g3, t))
                    .collect()
            })
            .collect(),
    );
    let g2 = average(
        paper_groups
            .iter()
            .map(|g| {
                thresholds
                    .iter()
                    .map(|&t| {
                        let mut diverse = 0usize;
                        let mut total = 0usize;
                        for cluster in &g.g2_clusters {
                            let (d, n) = diverse_pairs(cluster, t);
                            diverse += d;
                            total += n;
                        }
                        (diverse, total)
                    })
                    .collect()
            })
            .collect(),
    );

    Ok(DiversityReport {
        thresholds: thresholds.to_vec(),
        g1,
        g2,
        g3,
        eligible_papers: eligible.len(),
    })
}

/// [`grouped_diversity_with`] at the default cluster threshold.
pub fn grouped_diversity(
    corpus: &Corpus,
    provider: &dyn EmbeddingProvider,
    thresholds: &[f64],
) -> Result<DiversityReport, DiversityError> {
    grouped_diversity_with(corpus, provider, thresholds, DEFAULT_CLUSTER_THRESHOLD)
}
