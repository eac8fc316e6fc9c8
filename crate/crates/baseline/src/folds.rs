//! Paper-level cross-validation folds and turn samples.
//!
//! Splits are applied at scientific-paper level: a paper's dialogues are
//! never shared between training and evaluation, and the held-out fold is
//! divided into validation and test sets by whole dialogues to avoid turn
//! leakage.

use forge_domain::{derive_turns, Corpus, DialogueId, PaperId};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

/// One evaluation sample: a P message and the DE message answering it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnSample {
    /// The proponent message text (the query).
    pub query: String,
    pub paper_id: PaperId,
    /// Texts of all messages preceding the query, in dialogue order.
    pub history: Vec<String>,
    /// The reference expert response.
    pub gold_response: String,
    /// Flattened paper sentence indices anchored by the reference response.
    pub gold_facts: BTreeSet<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldIteration {
    pub held_out_fold: usize,
    pub train_papers: Vec<PaperId>,
    pub validation_dialogues: Vec<DialogueId>,
    pub test_dialogues: Vec<DialogueId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub seed: u64,
    /// Disjoint paper sets covering the whole corpus.
    pub folds: Vec<Vec<PaperId>>,
    pub iterations: Vec<FoldIteration>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FoldError {
    #[error("need at least {folds} papers for {folds} folds, corpus has {papers}")]
    TooFewPapers { folds: usize, papers: usize },
}

/// Shuffles papers with a seeded PRNG, deals them round-robin into `n`
/// folds, and splits each held-out fold's dialogues ~50/50 into validation
/// and test sets.
pub fn make_folds(corpus: &Corpus, n: usize, seed: u64) -> Result<FoldPlan, FoldError> {
    let mut papers: Vec<PaperId> = corpus.papers.keys().cloned().collect();
    if papers.len() < n || n == 0 {
        return Err(FoldError::TooFewPapers {
            folds: n,
            papers: papers.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    papers.shuffle(&mut rng);

    let mut folds: Vec<Vec<PaperId>> = vec![Vec::new(); n];
    for (i, paper) in papers.into_iter().enumerate() {
        folds[i % n].push(paper);
    }

    let mut iterations = Vec::with_capacity(n);
    for (k, fold) in folds.iter().enumerate() {
        let fold_papers: BTreeSet<&PaperId> = fold.iter().collect();
        let train_papers: Vec<PaperId> = folds
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .flat_map(|(_, f)| f.iter().cloned())
            .collect();
        let mut held_out: Vec<DialogueId> = corpus
            .dialogues
            .iter()
            .filter(|d| fold_papers.contains(&d.paper_id))
            .map(|d| d.dialogue_id.clone())
            .collect();
        held_out.sort();
        held_out.shuffle(&mut rng);
        let validation_len = held_out.len().div_ceil(2);
        let test_dialogues = held_out.split_off(validation_len);
        iterations.push(FoldIteration {
            held_out_fold: k,
            train_papers,
            validation_dialogues: held_out,
            test_dialogues,
        });
    }
    Ok(FoldPlan {
        seed,
        folds,
        iterations,
    })
}

/// Builds the turn samples for the given dialogues, in corpus order.
pub fn turn_samples(corpus: &Corpus, dialogue_ids: &[DialogueId]) -> Vec<TurnSample> {
    let wanted: BTreeSet<&DialogueId> = dialogue_ids.iter().collect();
    let mut samples = Vec::new();
    for dialogue in &corpus.dialogues {
        if !wanted.contains(&dialogue.dialogue_id) {
            continue;
        }
        let paper = corpus
            .papers
            .get(&dialogue.paper_id)
            .expect("corpus invariant: paper resolves");
        for turn in derive_turns(dialogue) {
            let history: Vec<String> = dialogue
                .messages
                .iter()
                .take_while(|m| m.message_id != turn.p_message.message_id)
                .map(|m| m.text())
                .collect();
            let gold_facts = turn
                .de_message
                .facts
                .iter()
                .map(|a| {
                    paper
                        .global_index(a.section_kind, a.sentence_index)
                        .expect("corpus invariant: anchor resolves")
                })
                .collect();
            samples.push(TurnSample {
                query: turn.p_message.text(),
                paper_id: dialogue.paper_id.clone(),
                history,
                gold_response: turn.de_message.text(),
                gold_facts,
            });
        }
    }
    samples
}

#[cfg(test)]
mod tests {
    use super::*;
    use forge_domain::{
        Dialogue, FactAnchor, Message, MessageId, Paper, ParticipantId, Role, SectionKind,
        SentenceUnit, SlotId, Timestamp,
    };

    fn test_corpus(papers: usize, dialogues_per_paper: usize) -> Corpus {
        let mut corpus = Corpus::default();
        for p in 0..papers {
            let paper_id = PaperId::new(format!("p{p:02}"));
            corpus.papers.insert(
                paper_id.clone(),
                Paper::new(
                    paper_id.clone(),
                    format!("Title {p}"),
                    vec!["Abstract sentence.".into()],
                    vec!["Intro one.".into(), "Intro two.".into()],
                    ParticipantId::from("owner"),
                )
                .unwrap(),
            );
            for d in 0..dialogues_per_paper {
                let messages = (0..8)
                    .map(|i| Message {
                        message_id: MessageId::new(format!("p{p}d{d}m{i}")),
                        role: if i % 2 == 0 {
                            Role::Proponent
                        } else {
                            Role::DomainExpert
                        },
                        sentences: vec![SentenceUnit::new(format!("Sentence {i} of note."))],
                        facts: if i == 1 {
                            vec![FactAnchor::new(SectionKind::Introduction, 1)]
                        } else {
                            vec![]
                        },
                        sent_at: Timestamp::from_millis(i as i64),
                        no_fact_warning: false,
                    })
                    .collect();
                corpus.dialogues.push(Dialogue {
                    dialogue_id: DialogueId::new(format!("p{p:02}-d{d}")),
                    paper_id: paper_id.clone(),
                    slot_id: SlotId::new(format!("s{p}-{d}")),
                    messages,
                    finalized: true,
                });
            }
        }
        corpus.validate().unwrap();
        corpus
    }

    #[test]
    fn twenty_papers_give_four_per_fold() {
        let corpus = test_corpus(20, 2);
        let plan = make_folds(&corpus, 5, 13).unwrap();
        assert_eq!(plan.folds.len(), 5);
        for fold in &plan.folds {
            assert_eq!(fold.len(), 4);
        }
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let corpus = test_corpus(11, 2);
        let a = make_folds(&corpus, 5, 42).unwrap();
        let b = make_folds(&corpus, 5, 42).unwrap();
        assert_eq!(a, b);
        let c = make_folds(&corpus, 5, 43).unwrap();
        assert_ne!(a.folds, c.folds);
    }

    #[test]
    fn too_few_papers_rejected() {
        let corpus = test_corpus(3, 1);
        assert_eq!(
            make_folds(&corpus, 5, 1).unwrap_err(),
            FoldError::TooFewPapers { folds: 5, papers: 3 }
        );
    }

    #[test]
    fn folds_partition_the_paper_set() {
        let corpus = test_corpus(13, 1);
        let plan = make_folds(&corpus, 5, 7).unwrap();
        let mut seen: BTreeSet<PaperId> = BTreeSet::new();
        for fold in &plan.folds {
            for paper in fold {
                assert!(seen.insert(paper.clone()), "paper in two folds");
            }
        }
        assert_eq!(seen.len(), corpus.papers.len());
    }

    #[test]
    fn evaluation_papers_never_in_training() {
        let corpus = test_corpus(10, 3);
        let plan = make_folds(&corpus, 5, 99).unwrap();
        let paper_of: std::collections::BTreeMap<&DialogueId, &PaperId> = corpus
            .dialogues
            .iter()
            .map(|d| (&d.dialogue_id, &d.paper_id))
            .collect();
        for iteration in &plan.iterations {
            let train: BTreeSet<&PaperId> = iteration.train_papers.iter().collect();
            for dialogue_id in iteration
                .validation_dialogues
                .iter()
                .chain(&iteration.test_dialogues)
            {
                assert!(!train.contains(paper_of[dialogue_id]));
            }
        }
    }

    #[test]
    fn held_out_dialogues_split_roughly_in_half() {
        let corpus = test_corpus(5, 3);
        let plan = make_folds(&corpus, 5, 3).unwrap();
        for iteration in &plan.iterations {
            let v = iteration.validation_dialogues.len();
            let t = iteration.test_dialogues.len();
            assert_eq!(v + t, 3);
            assert!(v.abs_diff(t) <= 1);
        }
    }

    #[test]
    fn samples_carry_history_and_global_gold_indices() {
        let corpus = test_corpus(1, 1);
        let ids: Vec<DialogueId> = corpus.dialogues.iter().map(|d| d.dialogue_id.clone()).collect();
        let samples = turn_samples(&corpus, &ids);
        assert_eq!(samples.len(), 4);
        assert!(samples[0].history.is_empty());
        assert_eq!(samples[1].history.len(), 2);
        // Anchor intro[1] sits after title (1) and abstract (1): global 3.
        assert_eq!(samples[0].gold_facts, BTreeSet::from([3]));
        assert!(samples[1].gold_facts.is_empty());
    }
}
