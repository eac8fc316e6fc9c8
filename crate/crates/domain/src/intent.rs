//! Per-sentence dialogue intent labels and their two-way grouping.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Intent of a single dialogue sentence.
///
/// Short codes (`AI`, `RI`, `S`, `AR`, `GO`) are the canonical serialized
/// form and the column headers used in reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IntentLabel {
    /// A question seeking facts from the paper's content.
    #[serde(rename = "AI")]
    AskInfo,
    /// A reply supported by a fact from the paper.
    #[serde(rename = "RI")]
    ReplyInfo,
    /// A request or proposal about which topic to discuss next.
    #[serde(rename = "S")]
    AskSuggestion,
    /// A question about the partner's opinion on a fact.
    #[serde(rename = "AR")]
    AskRebuttal,
    /// An opinion about a topic, typically grounded in a fact.
    #[serde(rename = "GO")]
    GiveOpinion,
}

/// The two intent families every label rolls up into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntentGroup {
    #[serde(rename = "IS")]
    InformationSeeking,
    #[serde(rename = "Arg")]
    Argumentative,
}

impl IntentLabel {
    pub const ALL: [IntentLabel; 5] = [
        IntentLabel::AskInfo,
        IntentLabel::AskSuggestion,
        IntentLabel::ReplyInfo,
        IntentLabel::GiveOpinion,
        IntentLabel::AskRebuttal,
    ];

    /// Total, fixed mapping into the IS/Arg rollup groups.
    pub fn group(self) -> IntentGroup {
        match self {
            IntentLabel::AskInfo | IntentLabel::ReplyInfo | IntentLabel::AskSuggestion => {
                IntentGroup::InformationSeeking
            }
            IntentLabel::AskRebuttal | IntentLabel::GiveOpinion => IntentGroup::Argumentative,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            IntentLabel::AskInfo => "AI",
            IntentLabel::ReplyInfo => "RI",
            IntentLabel::AskSuggestion => "S",
            IntentLabel::AskRebuttal => "AR",
            IntentLabel::GiveOpinion => "GO",
        }
    }
}

impl fmt::Display for IntentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl fmt::Display for IntentGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntentGroup::InformationSeeking => "IS",
            IntentGroup::Argumentative => "Arg",
        })
    }
}
