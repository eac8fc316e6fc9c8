//! Where candidate papers come from at sign-up.
//!
//! The built-in source is manual submission: the sign-up form carries the
//! paper content directly. Alternative sources (e.g. a publication-profile
//! scraper) plug in behind the same trait.

use serde::{Deserialize, Serialize};

/// Raw paper content as submitted or retrieved, before registration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperDraft {
    pub title: String,
    #[serde(default)]
    pub abstract_sentences: Vec<String>,
    #[serde(default)]
    pub introduction_sentences: Vec<String>,
}

/// The sign-up form: contact info, submitted papers and which of the
/// candidates the participant selected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignUpForm {
    pub full_name: String,
    pub email: String,
    #[serde(default)]
    pub papers: Vec<PaperDraft>,
    /// Indices into the candidate list; one or two entries.
    pub selected: Vec<usize>,
}

/// Produces the candidate papers a participant can select from.
pub trait PaperSource {
    fn candidates(&self, form: &SignUpForm) -> Result<Vec<PaperDraft>, String>;
}

/// Candidates are exactly the papers submitted in the form.
#[derive(Debug, Clone, Copy, Default)]
pub struct ManualSubmission;

impl PaperSource for ManualSubmission {
    fn candidates(&self, form: &SignUpForm) -> Result<Vec<PaperDraft>, String> {
        Ok(form.papers.clone())
    }
}
