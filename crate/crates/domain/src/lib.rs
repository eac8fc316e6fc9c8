//! Shared data model for the dialogue collection platform: papers, roles,
//! intents, messages, dialogues and the exportable corpus, together with the
//! validation rules every other component relies on.

pub mod corpus;
pub mod dialogue;
pub mod ids;
pub mod intent;
pub mod message;
pub mod paper;
pub mod time;

pub use corpus::{Corpus, IntegrityError};
pub use dialogue::{derive_turns, Dialogue, DialogueTurn, MIN_CORPUS_MESSAGES};
pub use ids::{DialogueId, MessageId, PaperId, ParticipantId, SessionId, SlotId};
pub use intent::{IntentGroup, IntentLabel};
pub use message::{
    segment_message_text, validate_message, FactAnchor, Message, MessageCheck, MessageError, Role,
    SentenceUnit, MAX_FACTS_PER_MESSAGE,
};
pub use paper::{Paper, PaperError, Section, SectionKind};
pub use time::{Interval, Timestamp};
