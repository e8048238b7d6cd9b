use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::tokenizer::ngrams;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl RougeScore {
    /// From a match count and the candidate/reference unit counts. Empty
    /// denominators give 0.
    pub fn from_counts(matches: usize, candidate_total: usize, reference_total: usize) -> Self {
        let ratio = |num: usize, den: usize| {
            if den == 0 {
                0.0
            } else {
                num as f64 / den as f64
            }
        };
        let precision = ratio(matches, candidate_total);
        let recall = ratio(matches, reference_total);
        Self {
            precision,
            recall,
            f1: f1(precision, recall),
        }
    }
}

/// Balanced F-score.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// ROUGE-N with clipped n-gram matching: each distinct n-gram matches
/// `min(candidate count, reference count)` times.
pub fn rouge_n<T: Eq + Hash>(candidate: &[T], reference: &[T], n: usize) -> RougeScore {
    let n = n.max(1);
    let cand = ngrams(candidate, n).expect("n >= 1");
    let refs = ngrams(reference, n).expect("n >= 1");
    let (small, large) = if cand.len() <= refs.len() {
        (&cand, &refs)
    } else {
        (&refs, &cand)
    };
    let matches: usize = small
        .iter()
        .map(|(gram, &c)| large.get(gram).map_or(0, |&r| c.min(r)))
        .sum();
    let windows = |len: usize| (len + 1).saturating_sub(n);
    RougeScore::from_counts(matches, windows(candidate.len()), windows(reference.len()))
}

/// Length of the longest common (not necessarily contiguous) subsequence,
/// with a rolling single-row table.
pub fn lcs_length<T: Eq>(a: &[T], b: &[T]) -> usize {
    let (a, b) = if a.len() < b.len() { (b, a) } else { (a, b) };
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

/// ROUGE-L over word sequences.
pub fn rouge_l<T: Eq>(candidate: &[T], reference: &[T]) -> RougeScore {
    RougeScore::from_counts(
        lcs_length(candidate, reference),
        candidate.len(),
        reference.len(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenizer::word_tokenize;

    fn words(s: &str) -> Vec<String> {
        word_tokenize(s, true)
    }

    #[test]
    fn identical_texts_score_one() {
        let w = words("vienas du trys");
        for s in [rouge_n(&w, &w, 1), rouge_n(&w, &w, 2), rouge_l(&w, &w)] {
            assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn cat_fixture() {
        let c = words("the cat sat");
        let r = words("the cat ate");
        let r1 = rouge_n(&c, &r, 1);
        assert_eq!(r1.precision, 2.0 / 3.0);
        assert_eq!(r1.recall, 2.0 / 3.0);
        assert!((r1.f1 - 2.0 / 3.0).abs() < 1e-15);
        let r2 = rouge_n(&c, &r, 2);
        assert_eq!(r2.f1, 0.5);
    }

    #[test]
    fn lcs_fixture() {
        let s = rouge_l(&words("a b c d"), &words("a c b d"));
        assert_eq!(lcs_length(&words("a b c d"), &words("a c b d")), 3);
        assert_eq!(s.f1, 0.75);
        assert_eq!(rouge_l(&words("x y"), &words("p q")).f1, 0.0);
    }

    #[test]
    fn clipping_and_empty_inputs() {
        let s = rouge_n(&["a", "a", "a"], &["a"], 1);
        assert_eq!(s.precision, 1.0 / 3.0);
        assert_eq!(s.recall, 1.0);
        let empty: [&str; 0] = [];
        assert_eq!(rouge_n(&empty, &["a"], 1), RougeScore::default());
        assert_eq!(rouge_n(&["a"], &["a"], 2), RougeScore::default());
        assert_eq!(rouge_l(&empty, &empty), RougeScore::default());
    }

    #[test]
    fn swapping_swaps_precision_and_recall() {
        let c = words("a b c a b");
        let r = words("b c a");
        for (x, y) in [
            (rouge_n(&c, &r, 1), rouge_n(&r, &c, 1)),
            (rouge_n(&c, &r, 2), rouge_n(&r, &c, 2)),
            (rouge_l(&c, &r), rouge_l(&r, &c)),
        ] {
            assert_eq!(x.precision, y.recall);
            assert_eq!(x.recall, y.precision);
            assert_eq!(x.f1, y.f1);
        }
    }
}
