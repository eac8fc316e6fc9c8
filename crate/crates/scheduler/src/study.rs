//! The study aggregate: all scheduling state plus the command operations
//! that mutate it. Commands validate, mutate and return; callers serialize
//! access (the service funnels every mutation through one lock).

use crate::source::{PaperSource, SignUpForm};
use crate::types::{
    ConfigError, DeSession, Notification, NotificationKind, Participant, PhaseSchedule,
    SessionSlot, StudyConfig, StudyPhase,
};
use forge_domain::{Interval, Paper, PaperId, ParticipantId, SessionId, SlotId, Timestamp};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Maximum number of slots a participant may book as proponent.
pub const P_BOOKING_QUOTA: usize = 4;

/// Papers a participant may select at sign-up.
pub const MAX_SELECTED_PAPERS: usize = 2;

/// Papers a sign-up form may submit.
pub const MAX_SUBMITTED_PAPERS: usize = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("the {phase} phase is closed")]
    PhaseClosed { phase: StudyPhase },
    #[error("email is already registered")]
    DuplicateEmail,
    #[error("no paper selected")]
    NoPaperSelected,
    #[error("invalid paper selection: {0}")]
    InvalidPaperSelection(String),
    #[error("invalid paper content: {0}")]
    InvalidPaper(String),
    #[error("paper source failed: {0}")]
    PaperSourceFailed(String),
    #[error("unknown participant")]
    UnknownParticipant,
    #[error("unknown paper")]
    UnknownPaper,
    #[error("unknown session")]
    UnknownSession,
    #[error("unknown slot")]
    UnknownSlot,
    #[error("participant does not own this paper")]
    NotOwner,
    #[error("session overlaps one of the participant's own sessions")]
    OverlapWithOwnSession,
    #[error("{duration_minutes}min session not divisible into {slot_minutes}min slots")]
    NonDivisibleDuration {
        duration_minutes: u32,
        slot_minutes: u32,
    },
    #[error("slot already booked")]
    SlotTaken,
    #[error("cannot book a slot on your own paper")]
    OwnPaper,
    #[error("booking quota of {P_BOOKING_QUOTA} reached")]
    QuotaExceeded,
    #[error("already booked a slot on this paper")]
    DuplicatePaper,
    #[error("slot overlaps another of your bookings or sessions")]
    TimeConflict,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Confirmation returned by a successful slot booking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookingConfirmation {
    pub slot_id: SlotId,
    pub session_id: SessionId,
    pub paper_id: PaperId,
    pub start_time: Timestamp,
    pub duration_minutes: u32,
}

/// Monotonic id allocation state, persisted so replayed and restored
/// studies never reuse an id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdCounters {
    pub participants: u64,
    pub papers: u64,
    pub sessions: u64,
    pub notifications: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub config: StudyConfig,
    pub schedule: PhaseSchedule,
    pub phase: StudyPhase,
    pub participants: BTreeMap<ParticipantId, Participant>,
    pub papers: BTreeMap<PaperId, Paper>,
    pub sessions: BTreeMap<SessionId, DeSession>,
    pub slots: BTreeMap<SlotId, SessionSlot>,
    pub notifications: Vec<Notification>,
    counters: IdCounters,
}

impl Study {
    pub fn new(config: StudyConfig, schedule: PhaseSchedule) -> Result<Study, ConfigError> {
        config.validate()?;
        schedule.validate()?;
        Ok(Study {
            config,
            schedule,
            phase: StudyPhase::SignUp,
            participants: BTreeMap::new(),
            papers: BTreeMap::new(),
            sessions: BTreeMap::new(),
            slots: BTreeMap::new(),
            notifications: Vec::new(),
            counters: IdCounters::default(),
        })
    }

    /// Snapshot of the id allocation counters.
    pub fn counters(&self) -> IdCounters {
        self.counters.clone()
    }

    /// Restores id allocation state (used when replaying a log).
    pub fn set_counters(&mut self, counters: IdCounters) {
        self.counters = counters;
    }

    /// Looks up a participant by auth code.
    pub fn participant_by_code(&self, auth_code: &str) -> Option<&Participant> {
        self.participants
            .values()
            .find(|p| constant_time_eq(p.auth_code.as_bytes(), auth_code.as_bytes()))
    }

    /// Advances the phase for every deadline `now` has passed, queueing a
    /// phase notification to all participants per transition. Entering the
    /// proponent-booking phase splits every session into slots.
    pub fn advance_phase(&mut self, now: Timestamp) -> StudyPhase {
        while let Some(deadline) = self.schedule.deadline(self.phase) {
            if now < deadline {
                break;
            }
            let next = self.phase.next().expect("only Closed lacks a deadline");
            self.phase = next;
            if next == StudyPhase::BookingP {
                let session_ids: Vec<SessionId> = self.sessions.keys().cloned().collect();
                for session_id in session_ids {
                    // Cannot fail: config guarantees divisibility.
                    let _ = self.split_session_slots(&session_id, self.config.slot_minutes);
                }
            }
            let recipients: Vec<ParticipantId> = self.participants.keys().cloned().collect();
            for recipient in recipients {
                self.queue_notification(recipient, None, deadline, NotificationKind::PhaseAdvance);
            }
        }
        self.phase
    }

    /// Registers a participant: stores contact info, resolves paper
    /// candidates through `source`, registers the selected papers and issues
    /// a fresh auth code.
    pub fn register_participant(
        &mut self,
        now: Timestamp,
        form: &SignUpForm,
        source: &dyn PaperSource,
        rng: &mut dyn RngCore,
    ) -> Result<&Participant, ScheduleError> {
        self.advance_phase(now);
        if self.phase != StudyPhase::SignUp {
            return Err(ScheduleError::PhaseClosed { phase: self.phase });
        }
        let email = form.email.trim().to_lowercase();
        if email.is_empty() {
            return Err(ScheduleError::InvalidPaperSelection("empty email".into()));
        }
        if self.participants.values().any(|p| p.email == email) {
            return Err(ScheduleError::DuplicateEmail);
        }

        let candidates = source
            .candidates(form)
            .map_err(ScheduleError::PaperSourceFailed)?;
        if candidates.is_empty() || candidates.len() > MAX_SUBMITTED_PAPERS {
            return Err(ScheduleError::InvalidPaperSelection(format!(
                "between 1 and {MAX_SUBMITTED_PAPERS} papers must be submitted, got {}",
                candidates.len()
            )));
        }
        if form.selected.is_empty() {
            return Err(ScheduleError::NoPaperSelected);
        }
        if form.selected.len() > MAX_SELECTED_PAPERS {
            return Err(ScheduleError::InvalidPaperSelection(format!(
                "at most {MAX_SELECTED_PAPERS} papers may be selected, got {}",
                form.selected.len()
            )));
        }
        let mut selected_indices = form.selected.clone();
        selected_indices.sort_unstable();
        selected_indices.dedup();
        if selected_indices.len() != form.selected.len() {
            return Err(ScheduleError::InvalidPaperSelection(
                "duplicate selection".into(),
            ));
        }
        if let Some(&bad) = selected_indices.iter().find(|&&i| i >= candidates.len()) {
            return Err(ScheduleError::InvalidPaperSelection(format!(
                "selected index {bad} out of range"
            )));
        }

        self.counters.participants += 1;
        let participant_id = ParticipantId::new(format!("u-{:03}", self.counters.participants));
        let auth_code = self.fresh_auth_code(rng);

        let mut proposed_paper_ids = Vec::with_capacity(selected_indices.len());
        for &index in &selected_indices {
            let draft = &candidates[index];
            self.counters.papers += 1;
            let paper_id = PaperId::new(format!("paper-{:03}", self.counters.papers));
            let paper = Paper::new(
                paper_id.clone(),
                draft.title.clone(),
                draft.abstract_sentences.clone(),
                draft.introduction_sentences.clone(),
                participant_id.clone(),
            )
            .map_err(|e| ScheduleError::InvalidPaper(e.to_string()))?;
            self.papers.insert(paper_id.clone(), paper);
            proposed_paper_ids.push(paper_id);
        }

        let participant = Participant {
            participant_id: participant_id.clone(),
            full_name: form.full_name.trim().to_owned(),
            email,
            auth_code,
            proposed_paper_ids,
        };
        self.participants.insert(participant_id.clone(), participant);
        Ok(&self.participants[&participant_id])
    }

    /// Books a dialogue session in which `participant_id` acts as the domain
    /// expert for their own paper.
    pub fn create_de_session(
        &mut self,
        now: Timestamp,
        participant_id: &ParticipantId,
        paper_id: &PaperId,
        start_time: Timestamp,
    ) -> Result<&DeSession, ScheduleError> {
        self.advance_phase(now);
        if self.phase != StudyPhase::BookingDe {
            return Err(ScheduleError::PhaseClosed { phase: self.phase });
        }
        if !self.participants.contains_key(participant_id) {
            return Err(ScheduleError::UnknownParticipant);
        }
        let paper = self.papers.get(paper_id).ok_or(ScheduleError::UnknownPaper)?;
        if &paper.owner_participant_id != participant_id {
            return Err(ScheduleError::NotOwner);
        }
        let interval = Interval::from_start_minutes(start_time, self.config.session_minutes);
        let clash = self
            .sessions
            .values()
            .any(|s| &s.de_participant_id == participant_id && s.interval().overlaps(&interval));
        if clash {
            return Err(ScheduleError::OverlapWithOwnSession);
        }

        self.counters.sessions += 1;
        let session_id = SessionId::new(format!("sess-{:03}", self.counters.sessions));
        let session = DeSession {
            session_id: session_id.clone(),
            paper_id: paper_id.clone(),
            de_participant_id: participant_id.clone(),
            start_time,
            duration_minutes: self.config.session_minutes,
        };
        self.sessions.insert(session_id.clone(), session);
        Ok(&self.sessions[&session_id])
    }

    /// Splits a session into contiguous slots exactly tiling its interval.
    /// Splitting an already-split session returns the existing slots.
    pub fn split_session_slots(
        &mut self,
        session_id: &SessionId,
        slot_minutes: u32,
    ) -> Result<Vec<SlotId>, ScheduleError> {
        let session = self
            .sessions
            .get(session_id)
            .ok_or(ScheduleError::UnknownSession)?
            .clone();
        let existing: Vec<SlotId> = self
            .slots
            .values()
            .filter(|s| &s.session_id == session_id)
            .map(|s| s.slot_id.clone())
            .collect();
        if !existing.is_empty() {
            return Ok(existing);
        }
        if slot_minutes == 0 || session.duration_minutes % slot_minutes != 0 {
            return Err(ScheduleError::NonDivisibleDuration {
                duration_minutes: session.duration_minutes,
                slot_minutes,
            });
        }
        let count = (session.duration_minutes / slot_minutes) as usize;
        let mut ids = Vec::with_capacity(count);
        for index in 0..count {
            let slot_id = SlotId::new(format!("{session_id}-s{index}"));
            let slot = SessionSlot {
                slot_id: slot_id.clone(),
                session_id: session_id.clone(),
                slot_index: index,
                start_time: session.start_time.plus_minutes(index as i64 * slot_minutes as i64),
                duration_minutes: slot_minutes,
                booked_p_participant_id: None,
            };
            self.slots.insert(slot_id.clone(), slot);
            ids.push(slot_id);
        }
        Ok(ids)
    }

    /// All slots booked by `participant_id` as proponent.
    pub fn bookings_of(&self, participant_id: &ParticipantId) -> Vec<&SessionSlot> {
        self.slots
            .values()
            .filter(|s| s.booked_p_participant_id.as_ref() == Some(participant_id))
            .collect()
    }

    /// Books a free slot for a proponent, enforcing the quota, the
    /// distinct-paper rule, the own-paper ban and time-conflict freedom, then
    /// queues reminders for both parties.
    pub fn book_slot_as_p(
        &mut self,
        now: Timestamp,
        participant_id: &ParticipantId,
        slot_id: &SlotId,
    ) -> Result<BookingConfirmation, ScheduleError> {
        self.advance_phase(now);
        if self.phase != StudyPhase::BookingP {
            return Err(ScheduleError::PhaseClosed { phase: self.phase });
        }
        if !self.participants.contains_key(participant_id) {
            return Err(ScheduleError::UnknownParticipant);
        }
        let slot = self.slots.get(slot_id).ok_or(ScheduleError::UnknownSlot)?.clone();
        if slot.booked_p_participant_id.is_some() {
            return Err(ScheduleError::SlotTaken);
        }
        let session = self
            .sessions
            .get(&slot.session_id)
            .expect("slot invariant: session resolves")
            .clone();
        let paper = self
            .papers
            .get(&session.paper_id)
            .expect("session invariant: paper resolves");
        if &session.de_participant_id == participant_id
            || &paper.owner_participant_id == participant_id
        {
            return Err(ScheduleError::OwnPaper);
        }

        let bookings = self.bookings_of(participant_id);
        if bookings.len() >= P_BOOKING_QUOTA {
            return Err(ScheduleError::QuotaExceeded);
        }
        let booked_papers: Vec<&PaperId> = bookings
            .iter()
            .map(|s| {
                &self
                    .sessions
                    .get(&s.session_id)
                    .expect("slot invariant: session resolves")
                    .paper_id
            })
            .collect();
        if booked_papers.contains(&&session.paper_id) {
            return Err(ScheduleError::DuplicatePaper);
        }
        let interval = slot.interval();
        let booking_clash = bookings.iter().any(|s| s.interval().overlaps(&interval));
        let session_clash = self
            .sessions
            .values()
            .any(|s| &s.de_participant_id == participant_id && s.interval().overlaps(&interval));
        if booking_clash || session_clash {
            return Err(ScheduleError::TimeConflict);
        }

        self.slots
            .get_mut(slot_id)
            .expect("checked above")
            .booked_p_participant_id = Some(participant_id.clone());

        let fire_at = slot
            .start_time
            .minus_minutes(self.config.reminder_lead_minutes as i64);
        self.queue_notification(
            participant_id.clone(),
            Some(slot_id.clone()),
            fire_at,
            NotificationKind::SlotReminder,
        );
        self.queue_notification(
            session.de_participant_id.clone(),
            Some(slot_id.clone()),
            fire_at,
            NotificationKind::SlotReminder,
        );

        Ok(BookingConfirmation {
            slot_id: slot_id.clone(),
            session_id: session.session_id,
            paper_id: session.paper_id,
            start_time: slot.start_time,
            duration_minutes: slot.duration_minutes,
        })
    }

    /// Returns every undelivered notification due at `now` and marks it
    /// delivered; a delivered notification is never returned again.
    pub fn due_notifications(&mut self, now: Timestamp) -> Vec<Notification> {
        let mut due = Vec::new();
        for notification in &mut self.notifications {
            if !notification.delivered && notification.fire_at <= now {
                notification.delivered = true;
                due.push(notification.clone());
            }
        }
        due
    }

    fn queue_notification(
        &mut self,
        recipient: ParticipantId,
        slot_id: Option<SlotId>,
        fire_at: Timestamp,
        kind: NotificationKind,
    ) {
        self.counters.notifications += 1;
        self.notifications.push(Notification {
            notification_id: self.counters.notifications,
            recipient_participant_id: recipient,
            slot_id,
            fire_at,
            kind,
            delivered: false,
        });
    }

    fn fresh_auth_code(&self, rng: &mut dyn RngCore) -> String {
        loop {
            let mut bytes = [0u8; 16];
            rng.fill_bytes(&mut bytes);
            let code = data_encoding::BASE32_NOPAD.encode(&bytes);
            if !self.participants.values().any(|p| p.auth_code == code) {
                return code;
            }
        }
    }
}

/// Compares two byte strings without early exit on mismatch.
pub fn constant_time_eq(a: &[u8], b: &[u8]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut diff = 0u8;
    for (x, y) in a.iter().zip(b) {
        diff |= x ^ y;
    }
    diff == 0
}
