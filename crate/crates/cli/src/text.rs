//! How the batch commands turn article text into token ids.
//!
//! Text is lowercased with whitespace collapsed, then segmented by Viterbi
//! over a vocabulary. A derived vocabulary holds one token per frequent
//! space-prefixed word plus every character seen, so any text in the corpus
//! alphabet can be segmented and common words cost one token.

use std::collections::BTreeMap;

use sumdec_core::corpus::normalize_whitespace;
use sumdec_core::tokenizer::{viterbi_segment, TokenizerError, EOS_NAME, UNK_NAME};
use sumdec_core::{TokenSequence, Vocabulary};

/// Words of the body used as the decoding prompt.
pub const PROMPT_WORDS: usize = 8;

/// Words seen fewer times are spelled out from characters.
pub const MIN_WORD_COUNT: u64 = 2;

pub fn prepare(text: &str) -> String {
    normalize_whitespace(text).to_lowercase()
}

/// The first `n` whitespace-separated words.
pub fn lead(text: &str, n: usize) -> String {
    text.split_whitespace()
        .take(n)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn derive_vocabulary<'a>(
    texts: impl IntoIterator<Item = &'a str>,
) -> Result<Vocabulary, TokenizerError> {
    let mut words: BTreeMap<String, u64> = BTreeMap::new();
    let mut chars: BTreeMap<String, u64> = BTreeMap::new();
    let mut sequences = 0;
    for text in texts {
        let prepared = prepare(text);
        sequences += 1;
        for word in prepared.split(' ').filter(|w| !w.is_empty()) {
            *words.entry(format!(" {word}")).or_insert(0) += 1;
        }
        for c in format!(" {prepared}").chars() {
            *chars.entry(c.to_string()).or_insert(0) += 1;
        }
    }
    let mut counts: Vec<(String, u64)> = words
        .into_iter()
        .filter(|(_, c)| *c >= MIN_WORD_COUNT)
        .collect();
    counts.extend(
        chars
            .into_iter()
            .filter(|(c, _)| c != EOS_NAME && c != UNK_NAME),
    );
    counts.push((EOS_NAME.to_string(), sequences.max(1)));
    counts.push((UNK_NAME.to_string(), 1));
    Vocabulary::from_counts(counts, EOS_NAME, Some(UNK_NAME), None)
}

pub fn encode(text: &str, vocab: &Vocabulary) -> Result<TokenSequence, TokenizerError> {
    let prepared = prepare(text);
    if prepared.is_empty() {
        return Ok(TokenSequence::new());
    }
    viterbi_segment(&format!(" {prepared}"), vocab)
}
