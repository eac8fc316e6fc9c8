//! The logged command layer.
//!
//! Every mutation goes through here: run the scheduler command against the
//! in-memory state, derive the matching log events (including any implicit
//! phase advance), and append them durably before acknowledging. Restoring
//! the store and replaying the log reproduces the in-memory state exactly.

use crate::event::{apply, StateEvent};
use crate::state::StudyState;
use crate::wal::{Store, StoreError};
use forge_domain::{Dialogue, Message, PaperId, ParticipantId, SessionId, SlotId, Timestamp};
use forge_scheduler::{
    BookingConfirmation, DeSession, Notification, PaperSource, Participant, ScheduleError,
    SignUpForm, StudyPhase,
};
use rand::RngCore;
use std::collections::BTreeSet;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Study state plus optional durability. All mutations are serialized by the
/// single `&mut self` owner; readers get snapshots through [`Self::state`].
pub struct StudyService {
    state: StudyState,
    store: Option<Store>,
    snapshot_due: bool,
}

impl StudyService {
    /// Opens the storage directory, restoring snapshot + log.
    pub fn open(
        dir: impl Into<PathBuf>,
        init: impl FnOnce() -> StudyState,
    ) -> Result<StudyService, StoreError> {
        let (store, state) = Store::open(dir, init)?;
        Ok(StudyService {
            state,
            store: Some(store),
            snapshot_due: false,
        })
    }

    /// Purely in-memory service (tests and simulations).
    pub fn in_memory(state: StudyState) -> StudyService {
        StudyService {
            state,
            store: None,
            snapshot_due: false,
        }
    }

    pub fn state(&self) -> &StudyState {
        &self.state
    }

    fn log(&mut self, event: StateEvent) -> Result<(), StoreError> {
        if let Some(store) = &mut self.store {
            self.snapshot_due |= store.append(&event)?;
        }
        Ok(())
    }

    /// Writes a snapshot if enough log records accumulated.
    pub fn maybe_snapshot(&mut self) -> Result<(), StoreError> {
        if self.snapshot_due {
            self.force_snapshot()?;
        }
        Ok(())
    }

    pub fn force_snapshot(&mut self) -> Result<(), StoreError> {
        if let Some(store) = &mut self.store {
            store.snapshot(&self.state)?;
            self.snapshot_due = false;
        }
        Ok(())
    }

    /// Advances the phase for `now` and logs the transition with all its
    /// side effects (auto-split slots, phase notifications).
    pub fn advance_phase(&mut self, now: Timestamp) -> Result<StudyPhase, StoreError> {
        let phase_before = self.state.study.phase;
        let slots_before: BTreeSet<SlotId> = self.state.study.slots.keys().cloned().collect();
        let notifications_before = self.state.study.notifications.len();

        let phase = self.state.study.advance_phase(now);
        if phase != phase_before {
            let slots = self
                .state
                .study
                .slots
                .values()
                .filter(|s| !slots_before.contains(&s.slot_id))
                .cloned()
                .collect();
            let notifications = self.state.study.notifications[notifications_before..].to_vec();
            self.log(StateEvent::PhaseAdvanced {
                phase,
                slots,
                notifications,
                counters_after: self.state.study.counters(),
            })?;
        }
        Ok(phase)
    }

    pub fn register_participant(
        &mut self,
        now: Timestamp,
        form: &SignUpForm,
        source: &dyn PaperSource,
        rng: &mut dyn RngCore,
    ) -> Result<Participant, ServiceError> {
        self.advance_phase(now)?;
        let participant = self
            .state
            .study
            .register_participant(now, form, source, rng)?
            .clone();
        let papers = participant
            .proposed_paper_ids
            .iter()
            .map(|id| self.state.study.papers[id].clone())
            .collect();
        self.log(StateEvent::ParticipantRegistered {
            participant: participant.clone(),
            papers,
            counters_after: self.state.study.counters(),
        })?;
        Ok(participant)
    }

    pub fn create_de_session(
        &mut self,
        now: Timestamp,
        participant_id: &ParticipantId,
        paper_id: &PaperId,
        start_time: Timestamp,
    ) -> Result<DeSession, ServiceError> {
        self.advance_phase(now)?;
        let session = self
            .state
            .study
            .create_de_session(now, participant_id, paper_id, start_time)?
            .clone();
        self.log(StateEvent::SessionCreated {
            session: session.clone(),
            counters_after: self.state.study.counters(),
        })?;
        Ok(session)
    }

    pub fn split_session_slots(
        &mut self,
        session_id: &SessionId,
        slot_minutes: u32,
    ) -> Result<Vec<SlotId>, ServiceError> {
        let slots_before: BTreeSet<SlotId> = self.state.study.slots.keys().cloned().collect();
        let ids = self
            .state
            .study
            .split_session_slots(session_id, slot_minutes)?;
        let new_slots: Vec<_> = ids
            .iter()
            .filter(|id| !slots_before.contains(*id))
            .map(|id| self.state.study.slots[id].clone())
            .collect();
        if !new_slots.is_empty() {
            self.log(StateEvent::SlotsCreated { slots: new_slots })?;
        }
        Ok(ids)
    }

    pub fn book_slot_as_p(
        &mut self,
        now: Timestamp,
        participant_id: &ParticipantId,
        slot_id: &SlotId,
    ) -> Result<BookingConfirmation, ServiceError> {
        self.advance_phase(now)?;
        let notifications_before = self.state.study.notifications.len();
        let confirmation = self
            .state
            .study
            .book_slot_as_p(now, participant_id, slot_id)?;
        let notifications = self.state.study.notifications[notifications_before..].to_vec();
        self.log(StateEvent::SlotBooked {
            slot_id: slot_id.clone(),
            participant_id: participant_id.clone(),
            notifications,
            counters_after: self.state.study.counters(),
        })?;
        Ok(confirmation)
    }

    pub fn due_notifications(&mut self, now: Timestamp) -> Result<Vec<Notification>, ServiceError> {
        let due = self.state.study.due_notifications(now);
        if !due.is_empty() {
            self.log(StateEvent::NotificationsDelivered {
                ids: due.iter().map(|n| n.notification_id).collect(),
            })?;
        }
        Ok(due)
    }

    /// Logs and stores one live message (the session actor already validated
    /// it).
    pub fn record_message(&mut self, slot_id: &SlotId, message: Message) -> Result<(), StoreError> {
        apply(
            &mut self.state,
            StateEvent::MessagePosted {
                slot_id: slot_id.clone(),
                message: message.clone(),
            },
        );
        self.log(StateEvent::MessagePosted {
            slot_id: slot_id.clone(),
            message,
        })
    }

    /// Adds a finalized dialogue to the corpus, durably.
    pub fn record_finalized(&mut self, dialogue: Dialogue) -> Result<(), StoreError> {
        apply(
            &mut self.state,
            StateEvent::DialogueFinalized {
                dialogue: dialogue.clone(),
            },
        );
        self.log(StateEvent::DialogueFinalized { dialogue })
    }

    /// Drops an abandoned session's transcript, durably.
    pub fn record_abandoned(&mut self, slot_id: &SlotId, reason: &str) -> Result<(), StoreError> {
        apply(
            &mut self.state,
            StateEvent::SessionAbandoned {
                slot_id: slot_id.clone(),
                reason: reason.to_owned(),
            },
        );
        self.log(StateEvent::SessionAbandoned {
            slot_id: slot_id.clone(),
            reason: reason.to_owned(),
        })
    }
}
