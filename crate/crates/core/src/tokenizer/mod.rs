//! Word tokenization for evaluation and subword segmentation for language
//! modeling.
//!
//! Word tokens come from whitespace splitting with punctuation (Unicode
//! general category `P*`) trimmed from word edges. Subword segmentation is a
//! Viterbi search over a supplied unigram vocabulary; vocabulary training is
//! not part of this crate.

mod viterbi;
mod vocab;

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::Deref;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use viterbi::{detokenize, segmentation_score, viterbi_segment};
pub use vocab::{SpecialNames, Vocabulary, EOS_NAME, PAD_NAME, UNK_NAME};

pub type TokenId = u32;

#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("n-gram order must be at least 1")]
    InvalidOrder,
    #[error("token id {id} out of range for vocabulary of size {vocab_size}")]
    UnknownId { id: TokenId, vocab_size: usize },
    #[error("character {ch:?} at position {position} is not covered and the vocabulary has no unk token")]
    Uncovered { ch: char, position: usize },
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("special token {0:?} not found in vocabulary")]
    MissingSpecial(String),
    #[error("vocabulary line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An encoded text: an ordered list of vocabulary ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence(pub Vec<TokenId>);

impl TokenSequence {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn into_inner(self) -> Vec<TokenId> {
        self.0
    }
}

impl Deref for TokenSequence {
    type Target = [TokenId];

    fn deref(&self) -> &[TokenId] {
        &self.0
    }
}

impl AsRef<[TokenId]> for TokenSequence {
    fn as_ref(&self) -> &[TokenId] {
        &self.0
    }
}

impl From<Vec<TokenId>> for TokenSequence {
    fn from(ids: Vec<TokenId>) -> Self {
        Self(ids)
    }
}

impl FromIterator<TokenId> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = TokenId>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

static EDGE_PUNCT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^\p{P}+|\p{P}+$").expect("valid regex"));

/// Splits on whitespace and trims punctuation from both ends of each word.
/// Word-internal punctuation (hyphens, apostrophes, decimal points) is kept.
pub fn word_tokenize(text: &str, lowercase: bool) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let word = EDGE_PUNCT.replace_all(raw, "");
            if word.is_empty() {
                None
            } else if lowercase {
                Some(word.to_lowercase())
            } else {
                Some(word.into_owned())
            }
        })
        .collect()
}

/// Multiset of n-grams, keyed by borrowed windows of the token list.
pub type NgramCounts<'a, T> = HashMap<&'a [T], usize>;

/// Counts every contiguous window of length `n`.
pub fn ngrams<T: Eq + Hash>(tokens: &[T], n: usize) -> Result<NgramCounts<'_, T>, TokenizerError> {
    if n == 0 {
        return Err(TokenizerError::InvalidOrder);
    }
    let mut counts = HashMap::new();
    for window in tokens.windows(n) {
        *counts.entry(window).or_insert(0) += 1;
    }
    Ok(counts)
}
