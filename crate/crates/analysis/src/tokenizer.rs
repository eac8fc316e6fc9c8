//! Deterministic whitespace-and-punctuation-free tokenization.
//!
//! A token is a maximal run of alphanumeric characters; everything else is
//! stripped. With lowercasing on (the default) the same rule backs message
//! length statistics, TF-IDF vocabularies and token-level F1, so all reported
//! numbers share one token definition.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tokenizer {
    pub lowercase: bool,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer { lowercase: true }
    }
}

impl Tokenizer {
    pub fn new(lowercase: bool) -> Self {
        Tokenizer { lowercase }
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let mut tokens = Vec::new();
        let mut current = String::new();
        for ch in text.chars() {
            if ch.is_alphanumeric() {
                if self.lowercase {
                    current.extend(ch.to_lowercase());
                } else {
                    current.push(ch);
                }
            } else if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            tokens.push(current);
        }
        tokens
    }

    pub fn token_count(&self, text: &str) -> usize {
        let mut count = 0usize;
        let mut in_token = false;
        for ch in text.chars() {
            if ch.is_alphanumeric() {
                if !in_token {
                    count += 1;
                    in_token = true;
                }
            } else {
                in_token = false;
            }
        }
        count
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_input_yields_no_tokens() {
        let t = Tokenizer::default();
        assert!(t.tokenize("").is_empty());
        assert_eq!(t.token_count(""), 0);
    }

    #[test]
    fn punctuation_is_stripped() {
        let t = Tokenizer::default();
        assert_eq!(t.tokenize("Hello, world!"), vec!["hello", "world"]);
        assert_eq!(t.tokenize("state-of-the-art"), vec!["state", "of", "the", "art"]);
    }

    #[test]
    fn digits_stay_inside_tokens() {
        let t = Tokenizer::default();
        assert_eq!(t.tokenize("improved by 3.5 points"), vec!["improved", "by", "3", "5", "points"]);
    }

    #[test]
    fn lowercase_flag_respected() {
        let t = Tokenizer::new(false);
        assert_eq!(t.tokenize("Hello World"), vec!["Hello", "World"]);
    }

    #[test]
    fn count_matches_tokenize_len() {
        let t = Tokenizer::default();
        for text in ["", "a", "a b", "What problem does it solve?", "3.5!!x"] {
            assert_eq!(t.token_count(text), t.tokenize(text).len(), "{text:?}");
        }
    }
}
