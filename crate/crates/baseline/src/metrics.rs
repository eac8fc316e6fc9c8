//! Set-level and token-level F1 scorers.

use forge_analysis::Tokenizer;
use std::collections::{BTreeSet, HashMap};

/// Set F1 between predicted and gold sentence indices. Both empty scores 1.0
/// (nothing to find, nothing found); exactly one empty scores 0.0.
pub fn fact_f1(predicted: &BTreeSet<usize>, gold: &BTreeSet<usize>) -> f64 {
    if predicted.is_empty() && gold.is_empty() {
        return 1.0;
    }
    if predicted.is_empty() || gold.is_empty() {
        return 0.0;
    }
    let overlap = predicted.intersection(gold).count() as f64;
    if overlap == 0.0 {
        return 0.0;
    }
    let precision = overlap / predicted.len() as f64;
    let recall = overlap / gold.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Token-level bag-overlap F1 with multiplicity (clipped counts), order
/// independent. Both texts tokenizing to nothing scores 1.0; exactly one
/// empty scores 0.0.
pub fn message_f1(generated: &str, reference: &str, tokenizer: &Tokenizer) -> f64 {
    let gen_tokens = tokenizer.tokenize(generated);
    let ref_tokens = tokenizer.tokenize(reference);
    if gen_tokens.is_empty() && ref_tokens.is_empty() {
        return 1.0;
    }
    if gen_tokens.is_empty() || ref_tokens.is_empty() {
        return 0.0;
    }
    let mut ref_counts: HashMap<&str, usize> = HashMap::new();
    for token in &ref_tokens {
        *ref_counts.entry(token).or_default() += 1;
    }
    let mut overlap = 0usize;
    for token in &gen_tokens {
        if let Some(count) = ref_counts.get_mut(token.as_str()) {
            if *count > 0 {
                *count -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / gen_tokens.len() as f64;
    let recall = overlap as f64 / ref_tokens.len() as f64;
    2.0 * precision * recall / (precision + recall)
}
