//! Opaque string identifiers for the core entities.

use serde::{Deserialize, Serialize};
use std::fmt;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

id_type!(
    /// Identifies a registered paper.
    PaperId
);
id_type!(
    /// Identifies a study participant.
    ParticipantId
);
id_type!(
    /// Identifies a domain-expert dialogue session (a one-hour booking).
    SessionId
);
id_type!(
    /// Identifies a bookable slot within a dialogue session.
    SlotId
);
id_type!(
    /// Identifies a collected dialogue.
    DialogueId
);
id_type!(
    /// Identifies a single message within a dialogue.
    MessageId
);
