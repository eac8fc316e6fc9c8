//! The exportable corpus: finalized dialogues plus their grounding papers.
//!
//! Canonical JSON layout is `{"papers": [...], "dialogues": [...]}` with
//! papers sorted by id and dialogues sorted by id. Emails and full names are
//! never part of a corpus; papers reference their owner by participant id
//! only.

use crate::dialogue::{derive_turns, Dialogue, MIN_CORPUS_MESSAGES};
use crate::ids::{DialogueId, PaperId};
use crate::message::{validate_message, Role};
use crate::paper::Paper;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// A validated corpus. Construct via [`Corpus::from_parts`] or deserialize
/// and then call [`Corpus::validate`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(into = "CorpusRepr", try_from = "CorpusRepr")]
pub struct Corpus {
    pub papers: BTreeMap<PaperId, Paper>,
    pub dialogues: Vec<Dialogue>,
}

/// Wire layout of a corpus file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct CorpusRepr {
    papers: Vec<Paper>,
    dialogues: Vec<Dialogue>,
}

impl From<Corpus> for CorpusRepr {
    fn from(corpus: Corpus) -> CorpusRepr {
        let mut dialogues = corpus.dialogues;
        dialogues.sort_by(|a, b| a.dialogue_id.cmp(&b.dialogue_id));
        CorpusRepr {
            papers: corpus.papers.into_values().collect(),
            dialogues,
        }
    }
}

#[derive(Debug, Error)]
#[error("{path}: {reason}")]
pub struct IntegrityError {
    /// JSON-path-like pointer to the offending field.
    pub path: String,
    pub reason: String,
}

impl IntegrityError {
    fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        IntegrityError {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl TryFrom<CorpusRepr> for Corpus {
    type Error = IntegrityError;

    fn try_from(repr: CorpusRepr) -> Result<Corpus, IntegrityError> {
        let mut papers = BTreeMap::new();
        for (i, paper) in repr.papers.into_iter().enumerate() {
            if let Some(dup) = papers.insert(paper.paper_id.clone(), paper) {
                return Err(IntegrityError::new(
                    format!("papers[{i}].paper_id"),
                    format!("duplicate paper id {}", dup.paper_id),
                ));
            }
        }
        let mut dialogues = repr.dialogues;
        for dialogue in &mut dialogues {
            // Both flags are implied by membership in a corpus file.
            dialogue.finalized = true;
            for message in &mut dialogue.messages {
                message.no_fact_warning =
                    message.role == Role::DomainExpert && message.facts.is_empty();
            }
        }
        let corpus = Corpus { papers, dialogues };
        corpus.validate()?;
        Ok(corpus)
    }
}

impl Corpus {
    pub fn from_parts(
        papers: impl IntoIterator<Item = Paper>,
        dialogues: Vec<Dialogue>,
    ) -> Result<Corpus, IntegrityError> {
        let repr = CorpusRepr {
            papers: papers.into_iter().collect(),
            dialogues,
        };
        Corpus::try_from(repr)
    }

    /// Checks every domain invariant, reporting the path of the first
    /// violation found.
    pub fn validate(&self) -> Result<(), IntegrityError> {
        for (paper_id, paper) in &self.papers {
            if &paper.paper_id != paper_id {
                return Err(IntegrityError::new(
                    format!("papers[{paper_id}]"),
                    "paper keyed under a different id",
                ));
            }
            paper
                .validate()
                .map_err(|e| IntegrityError::new(format!("papers[{paper_id}]"), e.to_string()))?;
        }

        let mut seen_dialogues: BTreeMap<&DialogueId, usize> = BTreeMap::new();
        for (i, dialogue) in self.dialogues.iter().enumerate() {
            let at = format!("dialogues[{i}]");
            if let Some(first) = seen_dialogues.insert(&dialogue.dialogue_id, i) {
                return Err(IntegrityError::new(
                    format!("{at}.dialogue_id"),
                    format!("duplicate of dialogues[{first}]"),
                ));
            }
            let paper = self.papers.get(&dialogue.paper_id).ok_or_else(|| {
                IntegrityError::new(
                    format!("{at}.paper_id"),
                    format!("unknown paper {}", dialogue.paper_id),
                )
            })?;
            if !dialogue.finalized {
                return Err(IntegrityError::new(at.clone(), "dialogue not finalized"));
            }
            if dialogue.messages.len() < MIN_CORPUS_MESSAGES {
                return Err(IntegrityError::new(
                    format!("{at}.messages"),
                    format!(
                        "finalized dialogue has {} messages; at least {MIN_CORPUS_MESSAGES} required",
                        dialogue.messages.len()
                    ),
                ));
            }
            let mut last_sent_at = None;
            for (j, message) in dialogue.messages.iter().enumerate() {
                let at = format!("{at}.messages[{j}]");
                if let Some(prev) = last_sent_at {
                    if message.sent_at <= prev {
                        return Err(IntegrityError::new(
                            format!("{at}.sent_at"),
                            "message timestamps must be strictly increasing",
                        ));
                    }
                }
                last_sent_at = Some(message.sent_at);
                validate_message(message, paper)
                    .map_err(|e| IntegrityError::new(format!("{at}.facts"), e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn paper(&self, id: &PaperId) -> Option<&Paper> {
        self.papers.get(id)
    }

    /// Dialogues grouped per paper, in corpus order.
    pub fn dialogues_by_paper(&self) -> BTreeMap<&PaperId, Vec<&Dialogue>> {
        let mut map: BTreeMap<&PaperId, Vec<&Dialogue>> = BTreeMap::new();
        for dialogue in &self.dialogues {
            map.entry(&dialogue.paper_id).or_default().push(dialogue);
        }
        map
    }

    /// Total turn count across all dialogues.
    pub fn turn_count(&self) -> usize {
        self.dialogues.iter().map(|d| derive_turns(d).len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::{MessageId, ParticipantId, SlotId};
    use crate::message::{FactAnchor, Message, SentenceUnit};
    use crate::paper::SectionKind;
    use crate::time::Timestamp;

    fn paper(id: &str) -> Paper {
        Paper::new(
            PaperId::from(id),
            format!("Title {id}"),
            vec!["Abstract sentence.".into()],
            vec!["Intro sentence.".into(), "Another intro.".into()],
            ParticipantId::from("owner"),
        )
        .unwrap()
    }

    fn message(i: usize, role: Role, facts: Vec<FactAnchor>) -> Message {
        Message {
            message_id: MessageId::new(format!("m{i}")),
            role,
            sentences: vec![SentenceUnit::new("Some words here.")],
            facts,
            sent_at: Timestamp::from_millis(i as i64),
            no_fact_warning: false,
        }
    }

    fn eight_message_dialogue(id: &str, paper_id: &str) -> Dialogue {
        let messages = (0..8)
            .map(|i| {
                let role = if i % 2 == 0 {
                    Role::Proponent
                } else {
                    Role::DomainExpert
                };
                message(i, role, vec![])
            })
            .collect();
        Dialogue {
            dialogue_id: DialogueId::from(id),
            paper_id: PaperId::from(paper_id),
            slot_id: SlotId::from("s1"),
            messages,
            finalized: true,
        }
    }

    #[test]
    fn valid_corpus_round_trips_and_preserves_turns() {
        let corpus =
            Corpus::from_parts(vec![paper("p1")], vec![eight_message_dialogue("d1", "p1")])
                .unwrap();
        let json = serde_json::to_string(&corpus).unwrap();
        let back: Corpus = serde_json::from_str(&json).unwrap();
        let turns_before: Vec<_> = corpus
            .dialogues
            .iter()
            .flat_map(|d| derive_turns(d))
            .map(|t| (t.p_message.message_id.clone(), t.de_message.message_id.clone()))
            .collect();
        let turns_after: Vec<_> = back
            .dialogues
            .iter()
            .flat_map(|d| derive_turns(d))
            .map(|t| (t.p_message.message_id.clone(), t.de_message.message_id.clone()))
            .collect();
        assert_eq!(turns_before, turns_after);
    }

    #[test]
    fn short_dialogue_rejected() {
        let mut d = eight_message_dialogue("d1", "p1");
        d.messages.truncate(7);
        let err = Corpus::from_parts(vec![paper("p1")], vec![d]).unwrap_err();
        assert!(err.path.contains("dialogues[0].messages"), "{}", err.path);
    }

    #[test]
    fn dangling_paper_reference_rejected() {
        let err =
            Corpus::from_parts(vec![paper("p1")], vec![eight_message_dialogue("d1", "p2")])
                .unwrap_err();
        assert!(err.path.contains("paper_id"), "{}", err.path);
    }

    #[test]
    fn dangling_fact_anchor_reported_with_path() {
        let mut d = eight_message_dialogue("d1", "p1");
        d.messages[1].facts = vec![FactAnchor::new(SectionKind::Introduction, 5)];
        let err = Corpus::from_parts(vec![paper("p1")], vec![d]).unwrap_err();
        assert_eq!(err.path, "dialogues[0].messages[1].facts");
    }

    #[test]
    fn import_recomputes_no_fact_warning() {
        let corpus =
            Corpus::from_parts(vec![paper("p1")], vec![eight_message_dialogue("d1", "p1")])
                .unwrap();
        for d in &corpus.dialogues {
            for m in &d.messages {
                assert_eq!(
                    m.no_fact_warning,
                    m.role == Role::DomainExpert && m.facts.is_empty()
                );
            }
        }
    }

    #[test]
    fn non_increasing_timestamps_rejected() {
        let mut d = eight_message_dialogue("d1", "p1");
        d.messages[3].sent_at = d.messages[2].sent_at;
        let err = Corpus::from_parts(vec![paper("p1")], vec![d]).unwrap_err();
        assert!(err.path.ends_with("messages[3].sent_at"), "{}", err.path);
    }
}
