//! Intent label frequencies per role, with IS/Arg rollups.

use forge_domain::{Corpus, IntentGroup, IntentLabel, MessageId, Role};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// One distribution row: percentage per label over a sentence population,
/// plus the two group rollups. Percentages sum to 100 up to rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentRow {
    pub label_pct: BTreeMap<IntentLabel, f64>,
    pub is_pct: f64,
    pub arg_pct: f64,
    pub sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentDistribution {
    pub proponent: IntentRow,
    pub expert: IntentRow,
    pub total: IntentRow,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum IntentError {
    #[error("{} sentences lack intent labels (first offenders: {})", count, sample.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(", "))]
    UnlabeledSentences {
        count: usize,
        /// Ids of the first few messages containing unlabeled sentences.
        sample: Vec<MessageId>,
    },
}

fn row_from_counts(counts: &BTreeMap<IntentLabel, usize>, total: usize) -> IntentRow {
    let pct = |n: usize| {
        if total == 0 {
            0.0
        } else {
            100.0 * n as f64 / total as f64
        }
    };
    let mut label_pct = BTreeMap::new();
    let mut is_count = 0usize;
    let mut arg_count = 0usize;
    for label in IntentLabel::ALL {
        let n = counts.get(&label).copied().unwrap_or(0);
        match label.group() {
            IntentGroup::InformationSeeking => is_count += n,
            IntentGroup::Argumentative => arg_count += n,
        }
        label_pct.insert(label, pct(n));
    }
    IntentRow {
        label_pct,
        is_pct: pct(is_count),
        arg_pct: pct(arg_count),
        sentences: total,
    }
}

/// Label frequencies per role and overall. Requires a fully annotated corpus.
pub fn intent_distribution(corpus: &Corpus) -> Result<IntentDistribution, IntentError> {
    let mut unlabeled = 0usize;
    let mut offenders: Vec<MessageId> = Vec::new();
    let mut counts: BTreeMap<(Role, IntentLabel), usize> = BTreeMap::new();
    let mut totals: BTreeMap<Role, usize> = BTreeMap::new();

    for message in corpus.dialogues.iter().flat_map(|d| &d.messages) {
        let mut message_has_unlabeled = false;
        for sentence in &message.sentences {
            match sentence.intent {
                Some(label) => {
                    *counts.entry((message.role, label)).or_default() += 1;
                    *totals.entry(message.role).or_default() += 1;
                }
                None => {
                    unlabeled += 1;
                    message_has_unlabeled = true;
                }
            }
        }
        if message_has_unlabeled && offenders.len() < 8 {
            offenders.push(message.message_id.clone());
        }
    }
    if unlabeled > 0 {
        return Err(IntentError::UnlabeledSentences {
            count: unlabeled,
            sample: offenders,
        });
    }

    let role_counts = |role: Role| -> BTreeMap<IntentLabel, usize> {
        IntentLabel::ALL
            .into_iter()
            .map(|l| (l, counts.get(&(role, l)).copied().unwrap_or(0)))
            .collect()
    };
    let p_counts = role_counts(Role::Proponent);
    let de_counts = role_counts(Role::DomainExpert);
    let total_counts: BTreeMap<IntentLabel, usize> = IntentLabel::ALL
        .into_iter()
        .map(|l| (l, p_counts[&l] + de_counts[&l]))
        .collect();
    let p_total = totals.get(&Role::Proponent).copied().unwrap_or(0);
    let de_total = totals.get(&Role::DomainExpert).copied().unwrap_or(0);

    Ok(IntentDistribution {
        proponent: row_from_counts(&p_counts, p_total),
        expert: row_from_counts(&de_counts, de_total),
        total: row_from_counts(&total_counts, p_total + de_total),
    })
}
