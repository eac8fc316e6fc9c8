//! Append-log records.
//!
//! Every mutation of the study state is logged as one event; restoring a
//! state means loading the last snapshot and applying the logged events in
//! order. Events carry facts (what changed), never commands, so replay needs
//! no validation and no randomness.

use crate::state::StudyState;
use forge_domain::{Dialogue, Message, ParticipantId, Paper, SlotId};
use forge_scheduler::{DeSession, IdCounters, Notification, Participant, SessionSlot, StudyPhase};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateEvent {
    ParticipantRegistered {
        participant: Participant,
        papers: Vec<Paper>,
        counters_after: IdCounters,
    },
    SessionCreated {
        session: DeSession,
        counters_after: IdCounters,
    },
    SlotsCreated {
        slots: Vec<SessionSlot>,
    },
    SlotBooked {
        slot_id: SlotId,
        participant_id: ParticipantId,
        notifications: Vec<Notification>,
        counters_after: IdCounters,
    },
    NotificationsDelivered {
        ids: Vec<u64>,
    },
    PhaseAdvanced {
        phase: StudyPhase,
        slots: Vec<SessionSlot>,
        notifications: Vec<Notification>,
        counters_after: IdCounters,
    },
    MessagePosted {
        slot_id: SlotId,
        message: Message,
    },
    DialogueFinalized {
        dialogue: Dialogue,
    },
    SessionAbandoned {
        slot_id: SlotId,
        reason: String,
    },
}

/// Applies one logged event to the state. Replay of the exact event stream a
/// live service wrote reproduces the live state.
pub fn apply(state: &mut StudyState, event: StateEvent) {
    match event {
        StateEvent::ParticipantRegistered {
            participant,
            papers,
            counters_after,
        } => {
            for paper in papers {
                state.study.papers.insert(paper.paper_id.clone(), paper);
            }
            state
                .study
                .participants
                .insert(participant.participant_id.clone(), participant);
            state.study.set_counters(counters_after);
        }
        StateEvent::SessionCreated {
            session,
            counters_after,
        } => {
            state
                .study
                .sessions
                .insert(session.session_id.clone(), session);
            state.study.set_counters(counters_after);
        }
        StateEvent::SlotsCreated { slots } => {
            for slot in slots {
                state.study.slots.insert(slot.slot_id.clone(), slot);
            }
        }
        StateEvent::SlotBooked {
            slot_id,
            participant_id,
            notifications,
            counters_after,
        } => {
            if let Some(slot) = state.study.slots.get_mut(&slot_id) {
                slot.booked_p_participant_id = Some(participant_id);
            }
            state.study.notifications.extend(notifications);
            state.study.set_counters(counters_after);
        }
        StateEvent::NotificationsDelivered { ids } => {
            for notification in &mut state.study.notifications {
                if ids.contains(&notification.notification_id) {
                    notification.delivered = true;
                }
            }
        }
        StateEvent::PhaseAdvanced {
            phase,
            slots,
            notifications,
            counters_after,
        } => {
            state.study.phase = phase;
            for slot in slots {
                state.study.slots.insert(slot.slot_id.clone(), slot);
            }
            state.study.notifications.extend(notifications);
            state.study.set_counters(counters_after);
        }
        StateEvent::MessagePosted { slot_id, message } => {
            state.transcripts.entry(slot_id).or_default().push(message);
        }
        StateEvent::DialogueFinalized { dialogue } => {
            // The corpus carries its own copy of the grounding paper.
            if let Some(paper) = state.study.papers.get(&dialogue.paper_id) {
                state
                    .corpus
                    .papers
                    .entry(dialogue.paper_id.clone())
                    .or_insert_with(|| paper.clone());
            }
            state.transcripts.remove(&dialogue.slot_id);
            state.corpus.dialogues.push(dialogue);
        }
        StateEvent::SessionAbandoned { slot_id, .. } => {
            state.transcripts.remove(&slot_id);
        }
    }
}
