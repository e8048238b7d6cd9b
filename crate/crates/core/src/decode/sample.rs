use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{check_prompt, step_distribution, DecodeConfig, DecodeError, DecodeResult, Hypothesis};
use crate::lm::Distribution;
use crate::tokenizer::{TokenId, TokenSequence};

/// ChaCha20 keyed through `SeedableRng::seed_from_u64`. Both steps are
/// specified bit-for-bit, so a seed yields the same stream on every
/// platform.
pub type DecodeRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> DecodeRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Inverse-CDF draw over ids in ascending order using one uniform `f64`.
pub fn sample_token(dist: &Distribution, rng: &mut DecodeRng) -> TokenId {
    let total: f64 = dist.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    let mut last_positive = dist.argmax();
    for (id, &p) in dist.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cumulative += p;
        last_positive = id as TokenId;
        if cumulative > target {
            return id as TokenId;
        }
    }
    last_positive
}

/// Up to `count` distinct tokens drawn without replacement.
pub(crate) fn draw_distinct(
    dist: &Distribution,
    count: usize,
    rng: &mut DecodeRng,
) -> Vec<TokenId> {
    let mut remaining = dist.to_vec();
    let mut drawn = Vec::with_capacity(count);
    while drawn.len() < count {
        let Some(current) = Distribution::from_weights(remaining.clone()) else {
            break;
        };
        let token = sample_token(&current, rng);
        remaining[token as usize] = 0.0;
        drawn.push(token);
    }
    drawn
}

/// Ancestral sampling from the shaped distribution, reproducible for a
/// fixed `config.seed`.
pub fn sample_decode<M: crate::lm::LanguageModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    config: &DecodeConfig,
) -> Result<DecodeResult, DecodeError> {
    config.validate()?;
    let vocab = model.vocab();
    check_prompt(vocab, prompt)?;
    let eos = vocab.eos();
    let mut context = prompt.to_vec();
    let start = context.len();
    let mut log_prob = 0.0;
    if prompt.last() != Some(&eos) {
        let mut rng = rng_from_seed(config.seed);
        while context.len() - start < config.max_length {
            let dist = step_distribution(model, &context, &context[start..], config, true)?;
            let token = sample_token(&dist, &mut rng);
            log_prob += dist[token as usize].ln();
            context.push(token);
            if token == eos {
                break;
            }
        }
    }
    let hyp = Hypothesis {
        ids: TokenSequence(context.split_off(start)),
        log_prob,
        finished: true,
    };
    DecodeResult::from_hypothesis(hyp, vocab)
}
