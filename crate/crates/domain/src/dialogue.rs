//! Dialogues and the adjacent (P, DE) turn structure.

use crate::ids::{DialogueId, PaperId, SlotId};
use crate::message::{Message, Role};
use serde::{Deserialize, Serialize};

/// Minimum number of messages a dialogue needs to enter the corpus.
pub const MIN_CORPUS_MESSAGES: usize = 8;

/// A collected dialogue, bound to one paper and one session slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub dialogue_id: DialogueId,
    pub paper_id: PaperId,
    pub slot_id: SlotId,
    pub messages: Vec<Message>,
    /// Set once the dialogue passed the corpus filter. Implied true for every
    /// dialogue inside a corpus, so it is not part of the canonical encoding.
    #[serde(skip)]
    pub finalized: bool,
}

impl Dialogue {
    /// Eligible for the corpus: at least eight messages.
    pub fn meets_corpus_filter(&self) -> bool {
        self.messages.len() >= MIN_CORPUS_MESSAGES
    }
}

/// An adjacent (proponent message, expert message) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DialogueTurn<'a> {
    pub p_message: &'a Message,
    pub de_message: &'a Message,
}

/// Extracts every adjacent (P, DE) pair from the ordered message list.
///
/// Consecutive same-role messages yield no turn for the unpaired message; a
/// message never participates in two turns.
pub fn derive_turns(dialogue: &Dialogue) -> Vec<DialogueTurn<'_>> {
    dialogue
        .messages
        .windows(2)
        .filter_map(|pair| match (pair[0].role, pair[1].role) {
            (Role::Proponent, Role::DomainExpert) => Some(DialogueTurn {
                p_message: &pair[0],
                de_message: &pair[1],
            }),
            _ => None,
        })
        .collect()
}
