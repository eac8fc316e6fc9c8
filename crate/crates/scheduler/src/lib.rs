//! Study scheduling: participant sign-up with paper proposals, domain-expert
//! session booking, slot splitting, proponent slot booking and the
//! notification outbox, gated by the phase timeline.

pub mod source;
pub mod study;
pub mod types;

pub use source::{ManualSubmission, PaperDraft, PaperSource, SignUpForm};
pub use study::{
    constant_time_eq, BookingConfirmation, IdCounters, ScheduleError, Study, MAX_SELECTED_PAPERS,
    MAX_SUBMITTED_PAPERS, P_BOOKING_QUOTA,
};
pub use types::{
    ConfigError, DeSession, Notification, NotificationKind, Participant, PhaseSchedule,
    SessionSlot, StudyConfig, StudyPhase,
};
