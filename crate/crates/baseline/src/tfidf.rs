//! TF-IDF vectorizer: raw term counts weighted by smoothed inverse document
//! frequency, L2-normalized.

use forge_analysis::{EmbeddingProvider, Tokenizer};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    /// Term to vector index, in sorted term order for stable indexing.
    pub vocabulary: BTreeMap<String, usize>,
    /// Per-term idf weight, indexed by vocabulary index.
    pub idf: Vec<f64>,
    pub tokenizer: Tokenizer,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TfidfError {
    #[error("tf-idf must be fit on at least one non-empty text")]
    EmptyFitSet,
}

/// Fits vocabulary and idf weights on `texts`.
///
/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1` with N the number of documents,
/// so weights stay finite and positive even for terms in every document.
pub fn tfidf_fit<S: AsRef<str>>(texts: &[S], tokenizer: Tokenizer) -> Result<TfidfModel, TfidfError> {
    let mut document_frequency: BTreeMap<String, usize> = BTreeMap::new();
    let mut documents = 0usize;
    let mut any_tokens = false;
    for text in texts {
        documents += 1;
        let mut seen: Vec<String> = tokenizer.tokenize(text.as_ref());
        if !seen.is_empty() {
            any_tokens = true;
        }
        seen.sort();
        seen.dedup();
        for term in seen {
            *document_frequency.entry(term).or_default() += 1;
        }
    }
    if documents == 0 || !any_tokens {
        return Err(TfidfError::EmptyFitSet);
    }

    let vocabulary: BTreeMap<String, usize> = document_frequency
        .keys()
        .cloned()
        .enumerate()
        .map(|(i, term)| (term, i))
        .collect();
    let n = documents as f64;
    let mut idf = vec![0f64; vocabulary.len()];
    for (term, &index) in &vocabulary {
        let df = document_frequency[term] as f64;
        idf[index] = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
    }
    Ok(TfidfModel {
        vocabulary,
        idf,
        tokenizer,
    })
}

/// Embeds `text` as an L2-normalized tf-idf vector over the fitted
/// vocabulary. Unseen terms are ignored; a text with no known terms maps to
/// the zero vector.
pub fn tfidf_embed(model: &TfidfModel, text: &str) -> Vec<f64> {
    let mut vector = vec![0f64; model.vocabulary.len()];
    for token in model.tokenizer.tokenize(text) {
        if let Some(&index) = model.vocabulary.get(&token) {
            vector[index] += model.idf[index];
        }
    }
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in &mut vector {
            *x /= norm;
        }
    }
    vector
}

impl TfidfModel {
    pub fn embed(&self, text: &str) -> Vec<f64> {
        tfidf_embed(self, text)
    }
}

/// [`TfidfModel`] behind the analysis embedding interface, the default
/// provider for topical diversity.
pub struct TfidfProvider(pub TfidfModel);

impl EmbeddingProvider for TfidfProvider {
    fn embed(&self, text: &str) -> Result<Vec<f64>, String> {
        Ok(tfidf_embed(&self.0, text))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit(texts: &[&str]) -> TfidfModel {
        tfidf_fit(texts, Tokenizer::default()).unwrap()
    }

    #[test]
    fn single_known_term_hits_one_index() {
        // Hand computation: vocabulary {a, b, c}; df(a)=1, df(b)=2, df(c)=1.
        // Embedding "b" touches only b's index and normalizes to 1.
        let model = fit(&["a b", "b c"]);
        let v = model.embed("b");
        let b = model.vocabulary["b"];
        for (i, x) in v.iter().enumerate() {
            if i == b {
                assert!((x - 1.0).abs() < 1e-12);
            } else {
                assert_eq!(*x, 0.0);
            }
        }
    }

    #[test]
    fn idf_weights_match_hand_values() {
        let model = fit(&["a b", "b c"]);
        // N = 2: idf(b) = ln(3/3)+1 = 1; idf(a) = idf(c) = ln(3/2)+1.
        assert!((model.idf[model.vocabulary["b"]] - 1.0).abs() < 1e-12);
        let expected = (3.0f64 / 2.0).ln() + 1.0;
        assert!((model.idf[model.vocabulary["a"]] - expected).abs() < 1e-12);
        assert!((model.idf[model.vocabulary["c"]] - expected).abs() < 1e-12);
    }

    #[test]
    fn unseen_terms_embed_to_zero_vector() {
        let model = fit(&["a b", "b c"]);
        let v = model.embed("unknown words only");
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn fitted_document_has_unit_norm() {
        let model = fit(&["a b", "b c", "a a c"]);
        for doc in ["a b", "b c", "a a c"] {
            let v = model.embed(doc);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9, "{doc}: {norm}");
        }
    }

    #[test]
    fn empty_fit_set_rejected() {
        assert_eq!(
            tfidf_fit(&Vec::<String>::new(), Tokenizer::default()).unwrap_err(),
            TfidfError::EmptyFitSet
        );
        assert_eq!(
            tfidf_fit(&["", "  ?!"], Tokenizer::default()).unwrap_err(),
            TfidfError::EmptyFitSet
        );
    }

    #[test]
    fn term_counts_carry_multiplicity() {
        // "a a b": tf(a) = 2 gives a twice the weight of b before scaling.
        let model = fit(&["a b", "a c"]);
        let v = model.embed("a a b");
        let a = model.vocabulary["a"];
        let b = model.vocabulary["b"];
        // idf(a) = ln(3/3)+1 = 1, idf(b) = ln(3/2)+1.
        let raw_a = 2.0 * 1.0;
        let raw_b = (3.0f64 / 2.0).ln() + 1.0;
        let norm = (raw_a * raw_a + raw_b * raw_b).sqrt();
        assert!((v[a] - raw_a / norm).abs() < 1e-12);
        assert!((v[b] - raw_b / norm).abs() < 1e-12);
    }
}
