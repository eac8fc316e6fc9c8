//! Dialogue messages: role-tagged sentence lists with optional fact anchors.

use crate::ids::MessageId;
use crate::intent::{IntentGroup, IntentLabel};
use crate::paper::{Paper, SectionKind};
use crate::time::Timestamp;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// The two dialogue roles. The proponent knows only the paper title; the
/// domain expert sees title, abstract and introduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "P")]
    Proponent,
    #[serde(rename = "DE")]
    DomainExpert,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Proponent => Role::DomainExpert,
            Role::DomainExpert => Role::Proponent,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            Role::Proponent => "P",
            Role::DomainExpert => "DE",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// Reference to one paper sentence used as a supportive fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FactAnchor {
    #[serde(rename = "section")]
    pub section_kind: SectionKind,
    #[serde(rename = "index")]
    pub sentence_index: usize,
}

impl FactAnchor {
    pub fn new(section_kind: SectionKind, sentence_index: usize) -> Self {
        FactAnchor {
            section_kind,
            sentence_index,
        }
    }

    /// The referenced sentence text, if the anchor resolves in `paper`.
    pub fn resolve<'p>(&self, paper: &'p Paper) -> Option<&'p str> {
        paper
            .section(self.section_kind)
            .and_then(|s| s.sentences.get(self.sentence_index))
            .map(String::as_str)
    }
}

/// One sentence of a message. Intent labels are absent until annotated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceUnit {
    pub text: String,
    pub intent: Option<IntentLabel>,
}

impl SentenceUnit {
    pub fn new(text: impl Into<String>) -> Self {
        SentenceUnit {
            text: text.into(),
            intent: None,
        }
    }

    pub fn labeled(text: impl Into<String>, intent: IntentLabel) -> Self {
        SentenceUnit {
            text: text.into(),
            intent: Some(intent),
        }
    }
}

/// A dialogue message: ordered sentences plus up to two fact anchors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    #[serde(rename = "id")]
    pub message_id: MessageId,
    pub role: Role,
    pub sentences: Vec<SentenceUnit>,
    pub facts: Vec<FactAnchor>,
    pub sent_at: Timestamp,
    /// True when a domain-expert message was sent without highlighting any
    /// fact. Derived at capture time and recomputed on import; never part of
    /// the canonical corpus encoding.
    #[serde(skip)]
    pub no_fact_warning: bool,
}

/// Maximum number of supportive facts per message.
pub const MAX_FACTS_PER_MESSAGE: usize = 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MessageError {
    #[error("message carries {count} facts; at most {MAX_FACTS_PER_MESSAGE} are allowed")]
    TooManyFacts { count: usize },
    #[error("fact anchor {section}[{index}] does not resolve in the paper", section = anchor.section_kind.name(), index = anchor.sentence_index)]
    DanglingAnchor { anchor: FactAnchor },
    #[error("proponent messages cannot carry facts")]
    ProponentWithFacts,
    #[error("message has no sentences")]
    NoSentences,
    #[error("sentence {index} is empty")]
    EmptySentence { index: usize },
}

/// Outcome of a successful message validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MessageCheck {
    /// Set for domain-expert messages that highlighted no fact; the message
    /// is stored, but the sender is warned.
    pub no_fact_warning: bool,
}

/// Validates a message against its grounding paper.
///
/// Accepts iff the fact count is at most two, every anchor resolves, and the
/// role constraint holds (proponents never carry facts). A domain-expert
/// message with zero facts is accepted with `no_fact_warning` set.
pub fn validate_message(msg: &Message, paper: &Paper) -> Result<MessageCheck, MessageError> {
    if msg.sentences.is_empty() {
        return Err(MessageError::NoSentences);
    }
    if let Some(index) = msg
        .sentences
        .iter()
        .position(|s| s.text.trim().is_empty())
    {
        return Err(MessageError::EmptySentence { index });
    }
    if msg.facts.len() > MAX_FACTS_PER_MESSAGE {
        return Err(MessageError::TooManyFacts {
            count: msg.facts.len(),
        });
    }
    if msg.role == Role::Proponent && !msg.facts.is_empty() {
        return Err(MessageError::ProponentWithFacts);
    }
    for anchor in &msg.facts {
        if anchor.resolve(paper).is_none() {
            return Err(MessageError::DanglingAnchor { anchor: *anchor });
        }
    }
    Ok(MessageCheck {
        no_fact_warning: msg.role == Role::DomainExpert && msg.facts.is_empty(),
    })
}

impl Message {
    /// A multi-sentence message (MSM) contains two or more sentences.
    pub fn is_multi_sentence(&self) -> bool {
        self.sentences.len() >= 2
    }

    /// A message is Mixed iff its labeled sentences span both intent groups.
    pub fn is_mixed_intent(&self) -> bool {
        let mut seen_is = false;
        let mut seen_arg = false;
        for s in &self.sentences {
            match s.intent.map(IntentLabel::group) {
                Some(IntentGroup::InformationSeeking) => seen_is = true,
                Some(IntentGroup::Argumentative) => seen_arg = true,
                None => {}
            }
        }
        seen_is && seen_arg
    }

    /// Sentence texts joined into the full message text.
    pub fn text(&self) -> String {
        self.sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Splits raw composed text into sentences.
///
/// One sentence per submitted line; within a line, a run of terminal
/// punctuation (`.`, `!`, `?`) followed by whitespace or end of line closes a
/// sentence. Segmentation happens once, at capture time, so downstream
/// statistics never depend on a re-segmentation choice.
pub fn segment_message_text(raw: &str) -> Vec<String> {
    let mut sentences = Vec::new();
    for line in raw.lines() {
        let chars: Vec<char> = line.chars().collect();
        let mut start = 0usize;
        let mut i = 0usize;
        while i < chars.len() {
            if matches!(chars[i], '.' | '!' | '?') {
                // Consume the full punctuation run.
                let mut j = i;
                while j + 1 < chars.len() && matches!(chars[j + 1], '.' | '!' | '?') {
                    j += 1;
                }
                let at_end = j + 1 == chars.len();
                let before_space = !at_end && chars[j + 1].is_whitespace();
                if at_end || before_space {
                    let sentence: String = chars[start..=j].iter().collect();
                    let trimmed = sentence.trim();
                    if !trimmed.is_empty() {
                        sentences.push(trimmed.to_owned());
                    }
                    start = j + 1;
                }
                i = j + 1;
            } else {
                i += 1;
            }
        }
        if start < chars.len() {
            let rest: String = chars[start..].iter().collect();
            let trimmed = rest.trim();
            if !trimmed.is_empty() {
                sentences.push(trimmed.to_owned());
            }
        }
    }
    sentences
}
