//! JSON frames of the realtime wire protocol.
//!
//! Client to server: `{"t":"join","slot":...}`, `{"t":"msg","text":...,
//! "facts":[...]}`, `{"t":"end"}`. Server to client: `joined`, `msg`,
//! `warn_no_fact`, `hint`, `peer_presence`, `closed` and `error`. Frame
//! order per connection is delivery order.

use forge_domain::{FactAnchor, Message, Paper, PaperId, Role, Section, SectionKind, SlotId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "snake_case")]
pub enum ClientFrame {
    Join {
        slot: SlotId,
    },
    Msg {
        text: String,
        #[serde(default)]
        facts: Vec<FactAnchor>,
    },
    End,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "snake_case")]
pub enum ServerFrame {
    Joined {
        role: Role,
        paper: PaperView,
    },
    Msg {
        #[serde(flatten)]
        message: Message,
    },
    WarnNoFact,
    Hint {
        text: String,
    },
    PeerPresence {
        present: bool,
    },
    Closed {
        reason: String,
    },
    Error {
        code: String,
        message: String,
    },
}

/// The slice of a paper a role is allowed to see.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperView {
    pub paper_id: PaperId,
    pub title: String,
    pub sections: Vec<Section>,
}

/// Role-filters a paper: the domain expert sees title, abstract and
/// introduction; the proponent sees the title section only. Abstract and
/// introduction sentences never enter a proponent-addressed payload.
pub fn visible_paper(role: Role, paper: &Paper) -> PaperView {
    let sections = match role {
        Role::DomainExpert => paper.sections.clone(),
        Role::Proponent => paper
            .sections
            .iter()
            .filter(|s| s.kind == SectionKind::Title)
            .cloned()
            .collect(),
    };
    PaperView {
        paper_id: paper.paper_id.clone(),
        title: paper.title.clone(),
        sections,
    }
}
