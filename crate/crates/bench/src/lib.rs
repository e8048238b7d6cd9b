//! Deterministic inputs for the benchmarks.

use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sumdec_core::tokenizer::{TokenId, TokenSequence, Vocabulary};
use sumdec_core::NGramModel;

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ne", "ra", "tu", "vi", "šo", "žy", "ė", "ą", "ius", "as", "is", "os", "ai",
];

/// Space-separated pseudo-words of two or three syllables.
pub fn text(words: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for i in 0..words {
        if i > 0 {
            out.push(' ');
        }
        for _ in 0..rng.random_range(2..=3) {
            out.push_str(SYLLABLES.choose(&mut rng).unwrap());
        }
    }
    out
}

/// Vocabulary of all syllables, all two-syllable words and the space.
pub fn subword_vocabulary() -> Vocabulary {
    let mut entries: Vec<(String, f64)> = vec![(" ".into(), -2.0), ("<eos>".into(), -8.0)];
    for a in SYLLABLES {
        entries.push((a.to_string(), -4.0));
    }
    for a in SYLLABLES {
        for b in SYLLABLES {
            let word = format!("{a}{b}");
            if !entries.iter().any(|(t, _)| *t == word) {
                entries.push((word, -6.0));
            }
        }
    }
    Vocabulary::new(entries, "<eos>", None, None).expect("distinct entries")
}

/// An additive-smoothed model over `vocab_size` tokens trained on random
/// sequences.
pub fn ngram_model(vocab_size: usize, order: usize, sequences: usize, seed: u64) -> NGramModel {
    let mut entries: Vec<(String, f64)> = (0..vocab_size - 1)
        .map(|i| (format!("t{i}"), -1.0))
        .collect();
    entries.push(("<eos>".into(), -1.0));
    let vocab = Arc::new(Vocabulary::new(entries, "<eos>", None, None).expect("distinct entries"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<TokenSequence> = (0..sequences)
        .map(|_| {
            let len = rng.random_range(5..40);
            (0..len)
                .map(|_| rng.random_range(0..vocab_size as TokenId - 1))
                .collect()
        })
        .collect();
    NGramModel::train(vocab, &data, order, 0.1).expect("valid training data")
}
