//! Distribution truncation and repetition constraints.
//!
//! Every filter returns a renormalized distribution whose support is a
//! subset of its input's. Ties in probability go to the lower token id.

use std::cmp::Ordering;

use crate::lm::Distribution;
use crate::tokenizer::TokenId;

/// Slack on the cumulative-mass comparison in [`top_p_filter`], so that a
/// prefix summing to exactly `p` in real arithmetic is not dropped by
/// rounding.
pub const TOP_P_SLACK: f64 = 1e-12;

/// Ids ordered by descending probability, lower id first on ties.
fn ranked(dist: &Distribution) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dist.len()).collect();
    order.sort_by(|&a, &b| match dist[b].total_cmp(&dist[a]) {
        Ordering::Equal => a.cmp(&b),
        other => other,
    });
    order
}

fn keep_only(dist: &Distribution, keep: &[usize]) -> Distribution {
    let mut weights = vec![0.0; dist.len()];
    for &i in keep {
        weights[i] = dist[i];
    }
    Distribution::from_weights(weights).expect("kept set holds the top token")
}

/// Keeps the `k` most probable tokens.
pub fn top_k_filter(dist: &Distribution, k: usize) -> Distribution {
    let k = k.max(1);
    if dist.support().count() <= k {
        return dist.clone();
    }
    let order = ranked(dist);
    keep_only(dist, &order[..k])
}

/// Keeps the longest most-probable prefix whose cumulative mass does not
/// exceed `p`, and always at least the top token.
pub fn top_p_filter(dist: &Distribution, p: f64) -> Distribution {
    if p >= 1.0 {
        return dist.clone();
    }
    let order = ranked(dist);
    let mut cumulative = 0.0;
    let mut keep = 0;
    for &i in &order {
        if dist[i] == 0.0 {
            break;
        }
        cumulative += dist[i];
        if cumulative > p + TOP_P_SLACK {
            break;
        }
        keep += 1;
    }
    let keep = keep.max(1);
    if keep == dist.support().count() {
        return dist.clone();
    }
    keep_only(dist, &order[..keep])
}

/// Tokens that would complete an n-gram already present in `history`.
pub fn banned_tokens(history: &[TokenId], n: usize) -> Vec<TokenId> {
    if n == 0 || history.len() + 1 < n {
        return Vec::new();
    }
    let context = &history[history.len() + 1 - n..];
    let mut banned: Vec<TokenId> = history
        .windows(n)
        .filter(|w| &w[..n - 1] == context)
        .map(|w| w[n - 1])
        .collect();
    banned.sort_unstable();
    banned.dedup();
    banned
}

/// Zeroes every token that would repeat an n-gram of `history`. When all
/// mass is banned the result is forced onto `eos`.
pub fn block_repeated_ngrams(
    history: &[TokenId],
    dist: &Distribution,
    n: usize,
    eos: TokenId,
) -> Distribution {
    let banned = banned_tokens(history, n);
    if banned.iter().all(|&t| dist[t as usize] == 0.0) {
        return dist.clone();
    }
    let mut weights = dist.to_vec();
    for t in banned {
        weights[t as usize] = 0.0;
    }
    Distribution::from_weights(weights).unwrap_or_else(|| Distribution::one_hot(dist.len(), eos))
}
