//! Canonical corpus bytes: deterministic export, validated import, and a
//! best-effort adapter for externally published release files.

use forge_domain::{
    Corpus, Dialogue, DialogueId, FactAnchor, IntegrityError, IntentLabel, Message, MessageId,
    Paper, PaperId, ParticipantId, Role, SectionKind, SentenceUnit, SlotId, Timestamp,
};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImportError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("integrity error at {}: {}", .0.path, .0.reason)]
    Integrity(#[from] IntegrityError),
}

/// Canonical corpus bytes: sorted object keys, two-space indentation, LF
/// line endings, trailing newline. Identical corpora always serialize to
/// identical bytes.
pub fn export_corpus(corpus: &Corpus) -> Vec<u8> {
    // Routing through Value sorts every object's keys.
    let value = serde_json::to_value(corpus).expect("corpus serializes");
    let mut bytes = serde_json::to_vec_pretty(&value).expect("value serializes");
    bytes.push(b'\n');
    bytes
}

/// Parses canonical corpus bytes, enforcing every domain invariant.
pub fn import_corpus(bytes: &[u8]) -> Result<Corpus, ImportError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ImportError::Parse(e.to_string()))?;
    parse_canonical(text)
}

fn parse_canonical(text: &str) -> Result<Corpus, ImportError> {
    // Separate syntax errors from integrity violations: deserializing via
    // Value first keeps serde's data errors out of the parse class.
    let value: Value =
        serde_json::from_str(text).map_err(|e| ImportError::Parse(e.to_string()))?;
    serde_json::from_value::<Corpus>(value).map_err(|e| {
        let message = e.to_string();
        match message.split_once(": ") {
            // Corpus validation failures surface as "<path>: <reason>".
            Some((path, reason)) if path.contains(']') || path.contains('[') => {
                ImportError::Integrity(IntegrityError {
                    path: path.to_owned(),
                    reason: reason.to_owned(),
                })
            }
            _ => ImportError::Parse(message),
        }
    })
}

/// Imports either canonical corpus bytes or a published release file.
///
/// The release adapter is best-effort: it accepts a map from paper title to
/// an object with section content and a dialogue list, tolerating several
/// field spellings. Unmapped fields are ignored.
pub fn import_corpus_or_release(bytes: &[u8]) -> Result<Corpus, ImportError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ImportError::Parse(e.to_string()))?;
    match parse_canonical(text) {
        Ok(corpus) => Ok(corpus),
        Err(canonical_error) => {
            let value: Value =
                serde_json::from_str(text).map_err(|e| ImportError::Parse(e.to_string()))?;
            parse_release(&value).map_err(|release_error| match release_error {
                // Prefer the canonical error when the release shape is also
                // unrecognizable.
                ImportError::Parse(msg) => {
                    ImportError::Parse(format!("{canonical_error}; release adapter: {msg}"))
                }
                other => other,
            })
        }
    }
}

fn sentences_of(value: &Value) -> Vec<String> {
    match value {
        Value::String(s) => s
            .split(['\n'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect(),
        Value::Array(items) => items
            .iter()
            .filter_map(|v| v.as_str())
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect(),
        _ => Vec::new(),
    }
}

fn field<'v>(object: &'v Value, names: &[&str]) -> Option<&'v Value> {
    names.iter().find_map(|n| object.get(n))
}

fn parse_role(value: Option<&Value>) -> Option<Role> {
    match value?.as_str()? {
        "P" | "Proponent" | "proponent" => Some(Role::Proponent),
        "DE" | "Domain Expert" | "DomainExpert" | "domain_expert" | "expert" => {
            Some(Role::DomainExpert)
        }
        _ => None,
    }
}

fn parse_intent(code: &str) -> Option<IntentLabel> {
    serde_json::from_value(Value::String(code.to_owned())).ok()
}

fn parse_section_kind(name: &str) -> Option<SectionKind> {
    match name.to_ascii_lowercase().as_str() {
        "title" => Some(SectionKind::Title),
        "abstract" => Some(SectionKind::Abstract),
        "introduction" | "intro" => Some(SectionKind::Introduction),
        _ => None,
    }
}

/// Resolves a fact given either as an anchor object or as the quoted
/// sentence text.
fn parse_fact(value: &Value, paper: &Paper) -> Option<FactAnchor> {
    if let Some(object) = value.as_object() {
        let section = parse_section_kind(object.get("section")?.as_str()?)?;
        let index = object.get("index")?.as_u64()? as usize;
        return Some(FactAnchor::new(section, index));
    }
    let text = value.as_str()?.trim();
    for section in &paper.sections {
        for (index, sentence) in section.sentences.iter().enumerate() {
            if sentence.trim() == text {
                return Some(FactAnchor::new(section.kind, index));
            }
        }
    }
    None
}

fn parse_release(value: &Value) -> Result<Corpus, ImportError> {
    let top = value
        .as_object()
        .ok_or_else(|| ImportError::Parse("release file is not a JSON object".into()))?;
    if top.is_empty() {
        return Err(ImportError::Parse("release file is empty".into()));
    }

    let mut papers = Vec::new();
    let mut dialogues = Vec::new();
    for (paper_index, (title_key, entry)) in top.iter().enumerate() {
        let content = field(entry, &["content", "paper", "paper_content"]).unwrap_or(entry);
        let title = field(content, &["title"])
            .and_then(|v| v.as_str())
            .unwrap_or(title_key)
            .to_owned();
        let abstract_sentences = field(content, &["abstract", "abstract_sentences"])
            .map(sentences_of)
            .unwrap_or_default();
        let introduction_sentences =
            field(content, &["introduction", "intro", "introduction_sentences"])
                .map(sentences_of)
                .unwrap_or_default();
        let paper_id = PaperId::new(format!("release-p{:03}", paper_index + 1));
        let paper = Paper::new(
            paper_id.clone(),
            title,
            abstract_sentences,
            introduction_sentences,
            ParticipantId::from("release"),
        )
        .map_err(|e| ImportError::Parse(format!("paper {title_key:?}: {e}")))?;

        let dialogue_entries = field(entry, &["dialogues", "chats", "conversations"])
            .and_then(|v| v.as_array())
            .ok_or_else(|| ImportError::Parse(format!("paper {title_key:?} has no dialogue list")))?;
        for (dialogue_index, dialogue_value) in dialogue_entries.iter().enumerate() {
            let dialogue_id = field(dialogue_value, &["id", "dialogue_id"])
                .and_then(|v| v.as_str())
                .map(str::to_owned)
                .unwrap_or_else(|| format!("release-p{:03}-d{}", paper_index + 1, dialogue_index + 1));
            let message_values = field(dialogue_value, &["messages", "turns"])
                .and_then(|v| v.as_array())
                .ok_or_else(|| {
                    ImportError::Parse(format!("dialogue {dialogue_id:?} has no message list"))
                })?;
            let mut messages = Vec::with_capacity(message_values.len());
            for (message_index, message_value) in message_values.iter().enumerate() {
                let role = parse_role(field(message_value, &["role", "speaker", "sender"]))
                    .ok_or_else(|| {
                        ImportError::Parse(format!(
                            "dialogue {dialogue_id:?} message {message_index} has no role"
                        ))
                    })?;
                let sentence_texts = match field(message_value, &["sentences"]) {
                    Some(Value::Array(items)) if items.iter().all(|i| i.is_string()) => {
                        sentences_of(&Value::Array(items.clone()))
                    }
                    Some(Value::Array(items)) => items
                        .iter()
                        .filter_map(|item| {
                            field(item, &["text", "sentence"])
                                .and_then(|v| v.as_str())
                                .map(str::to_owned)
                        })
                        .collect(),
                    _ => field(message_value, &["text", "message"])
                        .map(sentences_of)
                        .unwrap_or_default(),
                };
                let intents: Vec<Option<IntentLabel>> =
                    match field(message_value, &["intents", "labels"]) {
                        Some(Value::Array(items)) => items
                            .iter()
                            .map(|v| v.as_str().and_then(parse_intent))
                            .collect(),
                        _ => match field(message_value, &["sentences"]) {
                            Some(Value::Array(items)) => items
                                .iter()
                                .map(|item| {
                                    field(item, &["intent", "label"])
                                        .and_then(|v| v.as_str())
                                        .and_then(parse_intent)
                                })
                                .collect(),
                            _ => Vec::new(),
                        },
                    };
                let sentences: Vec<SentenceUnit> = sentence_texts
                    .iter()
                    .enumerate()
                    .map(|(i, text)| SentenceUnit {
                        text: text.clone(),
                        intent: intents.get(i).copied().flatten(),
                    })
                    .collect();
                let facts: Vec<FactAnchor> = if role == Role::DomainExpert {
                    field(message_value, &["facts", "supporting_facts", "supportive_facts"])
                        .and_then(|v| v.as_array())
                        .map(|items| {
                            items
                                .iter()
                                .filter_map(|item| parse_fact(item, &paper))
                                .collect()
                        })
                        .unwrap_or_default()
                } else {
                    Vec::new()
                };
                let sent_at = field(message_value, &["sent_at", "timestamp"])
                    .and_then(|v| v.as_i64())
                    .map(Timestamp::from_millis)
                    .unwrap_or(Timestamp::from_millis(message_index as i64));
                messages.push(Message {
                    message_id: MessageId::new(format!("{dialogue_id}-m{}", message_index + 1)),
                    role,
                    sentences,
                    facts,
                    sent_at,
                    no_fact_warning: false,
                });
            }
            // Re-time non-increasing sequences; release files rarely carry
            // millisecond stamps.
            let monotone = messages
                .windows(2)
                .all(|w| w[0].sent_at < w[1].sent_at);
            if !monotone {
                for (i, message) in messages.iter_mut().enumerate() {
                    message.sent_at = Timestamp::from_millis(i as i64);
                }
            }
            dialogues.push(Dialogue {
                dialogue_id: DialogueId::new(dialogue_id.clone()),
                paper_id: paper_id.clone(),
                slot_id: SlotId::new(format!("release-{dialogue_id}")),
                messages,
                finalized: true,
            });
        }
        papers.push(paper);
    }
    Corpus::from_parts(papers, dialogues).map_err(ImportError::from)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical_fixture() -> String {
        let paper = Paper::new(
            PaperId::from("p1"),
            "A Fixture Paper",
            vec!["Abstract sentence one.".into()],
            vec!["Intro sentence one.".into(), "Intro sentence two.".into()],
            ParticipantId::from("u-1"),
        )
        .unwrap();
        let messages: Vec<Message> = (0..8)
            .map(|i| Message {
                message_id: MessageId::new(format!("m{i}")),
                role: if i % 2 == 0 { Role::Proponent } else { Role::DomainExpert },
                sentences: vec![SentenceUnit::new("Some words here.")],
                facts: if i == 1 {
                    vec![FactAnchor::new(SectionKind::Introduction, 1)]
                } else {
                    vec![]
                },
                sent_at: Timestamp::from_millis(i as i64),
                no_fact_warning: false,
            })
            .collect();
        let corpus = Corpus::from_parts(
            vec![paper],
            vec![Dialogue {
                dialogue_id: DialogueId::from("d1"),
                paper_id: PaperId::from("p1"),
                slot_id: SlotId::from("s1"),
                messages,
                finalized: true,
            }],
        )
        .unwrap();
        String::from_utf8(export_corpus(&corpus)).unwrap()
    }

    #[test]
    fn export_is_deterministic() {
        let text = canonical_fixture();
        let corpus = import_corpus(text.as_bytes()).unwrap();
        let once = export_corpus(&corpus);
        let twice = export_corpus(&corpus);
        assert_eq!(once, twice);
        assert_eq!(String::from_utf8(once).unwrap(), text);
    }

    #[test]
    fn import_then_export_canonicalizes() {
        // Same data, scrambled key order: canonical export must normalize it.
        let text = canonical_fixture();
        let value: Value = serde_json::from_str(&text).unwrap();
        let scrambled = serde_json::to_string(&value).unwrap(); // compact form
        let corpus = import_corpus(scrambled.as_bytes()).unwrap();
        assert_eq!(String::from_utf8(export_corpus(&corpus)).unwrap(), text);
    }

    #[test]
    fn three_facts_fail_with_path() {
        let mut value: Value = serde_json::from_str(&canonical_fixture()).unwrap();
        let facts = value["dialogues"][0]["messages"][1]["facts"]
            .as_array_mut()
            .unwrap();
        facts.push(serde_json::json!({"index": 0, "section": "title"}));
        facts.push(serde_json::json!({"index": 0, "section": "abstract"}));
        match import_corpus(value.to_string().as_bytes()).unwrap_err() {
            ImportError::Integrity(e) => {
                assert_eq!(e.path, "dialogues[0].messages[1].facts");
            }
            other => panic!("expected integrity error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_bytes_are_a_parse_error() {
        let text = canonical_fixture();
        let truncated = &text.as_bytes()[..text.len() / 2];
        assert!(matches!(
            import_corpus(truncated).unwrap_err(),
            ImportError::Parse(_)
        ));
    }

    #[test]
    fn release_shape_is_adapted() {
        let release = serde_json::json!({
            "A Study Of Things": {
                "content": {
                    "abstract": ["We study things."],
                    "introduction": ["Things matter.", "We measure them."]
                },
                "dialogues": [{
                    "id": "d1",
                    "messages": [
                        {"role": "Proponent", "text": "What is studied?"},
                        {"role": "Domain Expert", "text": "Things, mostly.",
                         "facts": ["We measure them."]},
                        {"role": "P", "text": "How?"},
                        {"role": "DE", "text": "Carefully."},
                        {"role": "P", "text": "Since when?"},
                        {"role": "DE", "text": "For years."},
                        {"role": "P", "text": "Why?"},
                        {"role": "DE", "text": "Curiosity."}
                    ]
                }]
            }
        });
        let corpus = import_corpus_or_release(release.to_string().as_bytes()).unwrap();
        assert_eq!(corpus.papers.len(), 1);
        assert_eq!(corpus.dialogues.len(), 1);
        let dialogue = &corpus.dialogues[0];
        assert_eq!(dialogue.messages.len(), 8);
        // The quoted fact resolved to introduction sentence 1.
        assert_eq!(
            dialogue.messages[1].facts,
            vec![FactAnchor::new(SectionKind::Introduction, 1)]
        );
    }

    #[test]
    fn canonical_files_pass_through_the_release_entrypoint() {
        let text = canonical_fixture();
        let corpus = import_corpus_or_release(text.as_bytes()).unwrap();
        assert_eq!(corpus.dialogues.len(), 1);
    }
}
