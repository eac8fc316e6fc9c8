//! Scheduling entities: participants, sessions, slots, notifications and the
//! study phase timeline.

use forge_domain::{Interval, PaperId, ParticipantId, SessionId, SlotId, Timestamp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A registered study participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub participant_id: ParticipantId,
    pub full_name: String,
    pub email: String,
    /// High-entropy opaque token identifying the participant during the
    /// study while keeping them anonymous.
    pub auth_code: String,
    /// Papers selected at sign-up (one or two).
    pub proposed_paper_ids: Vec<PaperId>,
}

/// A one-hour window in which the proposer of a paper is available as the
/// domain expert.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeSession {
    pub session_id: SessionId,
    pub paper_id: PaperId,
    pub de_participant_id: ParticipantId,
    pub start_time: Timestamp,
    pub duration_minutes: u32,
}

impl DeSession {
    pub fn interval(&self) -> Interval {
        Interval::from_start_minutes(self.start_time, self.duration_minutes)
    }
}

/// A bookable 20-minute window inside a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSlot {
    pub slot_id: SlotId,
    pub session_id: SessionId,
    pub slot_index: usize,
    pub start_time: Timestamp,
    pub duration_minutes: u32,
    pub booked_p_participant_id: Option<ParticipantId>,
}

impl SessionSlot {
    pub fn interval(&self) -> Interval {
        Interval::from_start_minutes(self.start_time, self.duration_minutes)
    }

    pub fn end_time(&self) -> Timestamp {
        self.interval().end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NotificationKind {
    /// The study moved to its next phase.
    PhaseAdvance,
    /// A booked slot is about to begin.
    SlotReminder,
}

/// An outbox entry. Delivery is external (the outbox is drained via
/// `due_notifications`); `delivered` flips exactly once.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notification {
    pub notification_id: u64,
    pub recipient_participant_id: ParticipantId,
    pub slot_id: Option<SlotId>,
    pub fire_at: Timestamp,
    pub kind: NotificationKind,
    pub delivered: bool,
}

/// The study pipeline phases, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StudyPhase {
    SignUp,
    BookingDe,
    BookingP,
    Dialogues,
    Closed,
}

impl StudyPhase {
    pub fn next(self) -> Option<StudyPhase> {
        match self {
            StudyPhase::SignUp => Some(StudyPhase::BookingDe),
            StudyPhase::BookingDe => Some(StudyPhase::BookingP),
            StudyPhase::BookingP => Some(StudyPhase::Dialogues),
            StudyPhase::Dialogues => Some(StudyPhase::Closed),
            StudyPhase::Closed => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StudyPhase::SignUp => "sign_up",
            StudyPhase::BookingDe => "booking_de",
            StudyPhase::BookingP => "booking_p",
            StudyPhase::Dialogues => "dialogues",
            StudyPhase::Closed => "closed",
        }
    }
}

impl std::fmt::Display for StudyPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Deadlines closing each phase; strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub sign_up_until: Timestamp,
    pub booking_de_until: Timestamp,
    pub booking_p_until: Timestamp,
    pub dialogues_until: Timestamp,
}

impl PhaseSchedule {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let deadlines = [
            self.sign_up_until,
            self.booking_de_until,
            self.booking_p_until,
            self.dialogues_until,
        ];
        if deadlines.windows(2).all(|w| w[0] < w[1]) {
            Ok(())
        } else {
            Err(ConfigError::DeadlinesNotIncreasing)
        }
    }

    /// The deadline that closes `phase`; `Closed` never ends.
    pub fn deadline(&self, phase: StudyPhase) -> Option<Timestamp> {
        match phase {
            StudyPhase::SignUp => Some(self.sign_up_until),
            StudyPhase::BookingDe => Some(self.booking_de_until),
            StudyPhase::BookingP => Some(self.booking_p_until),
            StudyPhase::Dialogues => Some(self.dialogues_until),
            StudyPhase::Closed => None,
        }
    }
}

/// Tunable study parameters (env-configurable in the service).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub session_minutes: u32,
    pub slot_minutes: u32,
    pub reminder_lead_minutes: u32,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            session_minutes: 60,
            slot_minutes: 20,
            reminder_lead_minutes: 10,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.slot_minutes == 0 || self.session_minutes == 0 {
            return Err(ConfigError::ZeroDuration);
        }
        if self.session_minutes % self.slot_minutes != 0 {
            return Err(ConfigError::SessionNotDivisible {
                session_minutes: self.session_minutes,
                slot_minutes: self.slot_minutes,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("phase deadlines must be strictly increasing")]
    DeadlinesNotIncreasing,
    #[error("session and slot durations must be positive")]
    ZeroDuration,
    #[error("session length {session_minutes}min is not divisible into {slot_minutes}min slots")]
    SessionNotDivisible {
        session_minutes: u32,
        slot_minutes: u32,
    },
}
