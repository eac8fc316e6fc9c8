//! Grounding papers: title, abstract and introduction as ordered sentence
//! lists.

use crate::ids::{PaperId, ParticipantId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The three section kinds a stored paper may contain, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionKind {
    Title,
    Abstract,
    Introduction,
}

impl SectionKind {
    pub const ORDER: [SectionKind; 3] = [
        SectionKind::Title,
        SectionKind::Abstract,
        SectionKind::Introduction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SectionKind::Title => "title",
            SectionKind::Abstract => "abstract",
            SectionKind::Introduction => "introduction",
        }
    }
}

impl std::fmt::Display for SectionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One paper section as an ordered sentence list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub kind: SectionKind,
    pub sentences: Vec<String>,
}

/// A registered paper. Content is limited to title, abstract and
/// introduction; body sections are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paper {
    pub paper_id: PaperId,
    pub title: String,
    pub sections: Vec<Section>,
    #[serde(rename = "owner")]
    pub owner_participant_id: ParticipantId,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PaperError {
    #[error("paper must have exactly the sections title, abstract, introduction in order")]
    BadSectionLayout,
    #[error("title section must contain exactly the title sentence")]
    BadTitleSection,
    #[error("{section} sentence {index} is empty")]
    EmptySentence { section: SectionKind, index: usize },
}

impl Paper {
    /// Builds a paper from raw section texts, enforcing the canonical layout.
    pub fn new(
        paper_id: PaperId,
        title: impl Into<String>,
        abstract_sentences: Vec<String>,
        introduction_sentences: Vec<String>,
        owner: ParticipantId,
    ) -> Result<Paper, PaperError> {
        let title = title.into();
        let paper = Paper {
            paper_id,
            title: title.clone(),
            sections: vec![
                Section {
                    kind: SectionKind::Title,
                    sentences: vec![title],
                },
                Section {
                    kind: SectionKind::Abstract,
                    sentences: abstract_sentences,
                },
                Section {
                    kind: SectionKind::Introduction,
                    sentences: introduction_sentences,
                },
            ],
            owner_participant_id: owner,
        };
        paper.validate()?;
        Ok(paper)
    }

    pub fn validate(&self) -> Result<(), PaperError> {
        let kinds: Vec<SectionKind> = self.sections.iter().map(|s| s.kind).collect();
        if kinds != SectionKind::ORDER {
            return Err(PaperError::BadSectionLayout);
        }
        let title = &self.sections[0];
        if title.sentences.len() != 1 || title.sentences[0] != self.title {
            return Err(PaperError::BadTitleSection);
        }
        for section in &self.sections {
            for (index, sentence) in section.sentences.iter().enumerate() {
                if sentence.trim().is_empty() {
                    return Err(PaperError::EmptySentence {
                        section: section.kind,
                        index,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn section(&self, kind: SectionKind) -> Option<&Section> {
        self.sections.iter().find(|s| s.kind == kind)
    }

    /// All sentences in section order (title, abstract, introduction), the
    /// global indexing used for fact distances and retrieval.
    pub fn flattened_sentences(&self) -> Vec<&str> {
        self.sections
            .iter()
            .flat_map(|s| s.sentences.iter().map(String::as_str))
            .collect()
    }

    /// Global index of a (section, sentence_index) pair in the flattened
    /// sentence list, if it resolves.
    pub fn global_index(&self, kind: SectionKind, sentence_index: usize) -> Option<usize> {
        let mut offset = 0usize;
        for section in &self.sections {
            if section.kind == kind {
                if sentence_index < section.sentences.len() {
                    return Some(offset + sentence_index);
                }
                return None;
            }
            offset += section.sentences.len();
        }
        None
    }
}
