use std::cmp::Ordering;

use super::{TokenId, TokenSequence, TokenizerError, Vocabulary};

#[derive(Debug, Clone, Copy)]
struct Node {
    score: f64,
    tokens: usize,
    prev: usize,
    token: TokenId,
}

fn path(best: &[Option<Node>], mut end: usize) -> Vec<TokenId> {
    let mut ids = Vec::new();
    while end > 0 {
        let node = best[end].expect("reachable position");
        ids.push(node.token);
        end = node.prev;
    }
    ids.reverse();
    ids
}

/// Segments `text` into the vocabulary tokens maximizing the summed
/// log-probability.
///
/// Ties go to the segmentation with fewer tokens, then to the
/// lexicographically smallest id sequence. A character that no single-char
/// token covers may be emitted as `unk` (one per character), scored with
/// `unk`'s log-probability. Special tokens never match text.
pub fn viterbi_segment(text: &str, vocab: &Vocabulary) -> Result<TokenSequence, TokenizerError> {
    let offsets: Vec<usize> = text
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(text.len()))
        .collect();
    let n = offsets.len() - 1;
    let max_len = vocab.max_token_chars();
    let mut best: Vec<Option<Node>> = vec![None; n + 1];
    best[0] = Some(Node {
        score: 0.0,
        tokens: 0,
        prev: 0,
        token: 0,
    });

    for start in 0..n {
        let Some(from) = best[start] else { continue };
        let mut single_char_covered = false;
        for len in 1..=max_len.min(n - start) {
            let piece = &text[offsets[start]..offsets[start + len]];
            let Some(id) = vocab.id(piece) else { continue };
            if vocab.is_special(id) {
                continue;
            }
            if len == 1 {
                single_char_covered = true;
            }
            let lp = vocab.log_prob(id).expect("id in range");
            relax(&mut best, start, start + len, from, id, lp);
        }
        if !single_char_covered {
            if let Some(unk) = vocab.unk() {
                let lp = vocab.log_prob(unk).expect("id in range");
                relax(&mut best, start, start + 1, from, unk, lp);
            }
        }
    }

    if best[n].is_none() {
        // Nothing reaches past the farthest reachable position, so the
        // character there cannot be consumed.
        let position = (0..n).rev().find(|&i| best[i].is_some()).unwrap_or(0);
        let ch = text[offsets[position]..].chars().next().unwrap_or('\0');
        return Err(TokenizerError::Uncovered { ch, position });
    }
    Ok(TokenSequence(path(&best, n)))
}

fn relax(best: &mut [Option<Node>], start: usize, end: usize, from: Node, token: TokenId, lp: f64) {
    let candidate = Node {
        score: from.score + lp,
        tokens: from.tokens + 1,
        prev: start,
        token,
    };
    let replace = match best[end] {
        None => true,
        Some(current) => match candidate.score.total_cmp(&current.score) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => match candidate.tokens.cmp(&current.tokens) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    let mut a = path(best, start);
                    a.push(token);
                    let mut b = path(best, current.prev);
                    b.push(current.token);
                    a < b
                }
            },
        },
    };
    if replace {
        best[end] = Some(candidate);
    }
}

/// Sum of token log-probabilities, accumulated left to right.
pub fn segmentation_score(ids: &[TokenId], vocab: &Vocabulary) -> Result<f64, TokenizerError> {
    vocab.check_ids(ids)?;
    Ok(ids
        .iter()
        .fold(0.0, |acc, &id| acc + vocab.log_prob(id).expect("checked")))
}

/// Concatenates token surface strings.
pub fn detokenize(ids: &[TokenId], vocab: &Vocabulary) -> Result<String, TokenizerError> {
    vocab.check_ids(ids)?;
    Ok(ids
        .iter()
        .map(|&id| vocab.token(id).expect("checked"))
        .collect())
}
