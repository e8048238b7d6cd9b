use std::cmp::Ordering;

use super::{
    check_prompt, sample::draw_distinct, step_distribution, DecodeConfig, DecodeError,
    DecodeResult, Hypothesis,
};
use crate::decode::rng_from_seed;
use crate::lm::LanguageModel;
use crate::tokenizer::{TokenId, TokenSequence};

fn empty_result() -> DecodeResult {
    DecodeResult {
        tokens: TokenSequence::new(),
        text: String::new(),
        score: 0.0,
        steps: 0,
    }
}

/// Picks the most probable token at every step.
pub fn greedy_decode<M: LanguageModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    config: &DecodeConfig,
) -> Result<DecodeResult, DecodeError> {
    config.validate()?;
    let vocab = model.vocab();
    check_prompt(vocab, prompt)?;
    let eos = vocab.eos();
    if prompt.last() == Some(&eos) {
        return Ok(empty_result());
    }
    let mut context = prompt.to_vec();
    let start = context.len();
    let mut log_prob = 0.0;
    while context.len() - start < config.max_length {
        let dist = step_distribution(model, &context, &context[start..], config, false)?;
        let token = dist.argmax();
        log_prob += dist[token as usize].ln();
        context.push(token);
        if token == eos {
            break;
        }
    }
    let hyp = Hypothesis {
        ids: TokenSequence(context.split_off(start)),
        log_prob,
        finished: true,
    };
    DecodeResult::from_hypothesis(hyp, vocab)
}

#[derive(Debug)]
struct Candidate {
    score: f64,
    parent: usize,
    step_log_prob: f64,
    token: TokenId,
}

/// Best-first with deterministic tie-breaks: parent rank, then the more
/// probable step, then the lower token id.
fn candidate_order(a: &Candidate, b: &Candidate) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.parent.cmp(&b.parent))
        .then(b.step_log_prob.total_cmp(&a.step_log_prob))
        .then(a.token.cmp(&b.token))
}

fn final_score(hyp: &Hypothesis, length_penalty: f64) -> f64 {
    if length_penalty == 0.0 {
        hyp.log_prob
    } else {
        hyp.log_prob / (hyp.ids.len().max(1) as f64).powf(length_penalty)
    }
}

/// Beam search returning every finished hypothesis, best first.
///
/// At each step all expansions of the live beams are ranked by cumulative
/// log-probability and the top `beam_size` survive. Expansions ending in eos
/// or reaching `max_length` are set aside as finished. With the default zero
/// length penalty the search stops once no live beam can beat the best
/// finished one.
pub fn beam_search_hypotheses<M: LanguageModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    config: &DecodeConfig,
) -> Result<Vec<Hypothesis>, DecodeError> {
    config.validate()?;
    let vocab = model.vocab();
    check_prompt(vocab, prompt)?;
    let eos = vocab.eos();
    if prompt.last() == Some(&eos) {
        return Ok(vec![Hypothesis {
            ids: TokenSequence::new(),
            log_prob: 0.0,
            finished: true,
        }]);
    }

    let mut rng = config
        .sample_within_beam
        .then(|| rng_from_seed(config.seed));
    let mut live = vec![Hypothesis {
        ids: TokenSequence::new(),
        log_prob: 0.0,
        finished: false,
    }];
    let mut finished: Vec<Hypothesis> = Vec::new();
    let mut context = Vec::with_capacity(prompt.len() + config.max_length);

    while !live.is_empty() {
        let mut candidates = Vec::new();
        for (parent, hyp) in live.iter().enumerate() {
            context.clear();
            context.extend_from_slice(prompt);
            context.extend_from_slice(&hyp.ids);
            let dist =
                step_distribution(model, &context, &hyp.ids, config, config.sample_within_beam)?;
            let tokens: Vec<TokenId> = match rng.as_mut() {
                Some(rng) => draw_distinct(&dist, config.beam_size, rng),
                None => dist.support().collect(),
            };
            for token in tokens {
                let step_log_prob = dist[token as usize].ln();
                candidates.push(Candidate {
                    score: hyp.log_prob + step_log_prob,
                    parent,
                    step_log_prob,
                    token,
                });
            }
        }
        candidates.sort_by(candidate_order);
        candidates.truncate(config.beam_size);

        let mut next = Vec::with_capacity(candidates.len());
        for c in candidates {
            let mut ids = live[c.parent].ids.clone().into_inner();
            ids.push(c.token);
            let done = c.token == eos || ids.len() >= config.max_length;
            let hyp = Hypothesis {
                ids: TokenSequence(ids),
                log_prob: c.score,
                finished: done,
            };
            if done {
                finished.push(hyp);
            } else {
                next.push(hyp);
            }
        }
        live = next;

        if config.length_penalty == 0.0 {
            let best_finished = finished
                .iter()
                .map(|h| h.log_prob)
                .fold(f64::NEG_INFINITY, f64::max);
            let best_live = live
                .iter()
                .map(|h| h.log_prob)
                .fold(f64::NEG_INFINITY, f64::max);
            if best_finished >= best_live {
                break;
            }
        }
    }

    finished.sort_by(|a, b| {
        final_score(b, config.length_penalty)
            .total_cmp(&final_score(a, config.length_penalty))
            .then_with(|| a.ids.cmp(&b.ids))
    });
    Ok(finished)
}

/// Beam search; returns the best finished hypothesis.
pub fn beam_search<M: LanguageModel + ?Sized>(
    model: &M,
    prompt: &[TokenId],
    config: &DecodeConfig,
) -> Result<DecodeResult, DecodeError> {
    let best = beam_search_hypotheses(model, prompt, config)?
        .into_iter()
        .next()
        .expect("beam search always finishes at least one hypothesis");
    DecodeResult::from_hypothesis(best, model.vocab())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::fixture_m1;

    const A: TokenId = 0;
    const B: TokenId = 1;
    const EOS: TokenId = 2;

    fn cfg(beam: usize) -> DecodeConfig {
        DecodeConfig {
            beam_size: beam,
            no_repeat_ngram_size: None,
            max_length: 5,
            ..DecodeConfig::default()
        }
    }

    #[test]
    fn greedy_on_m1() {
        let r = greedy_decode(&fixture_m1(), &[], &cfg(1)).unwrap();
        assert_eq!(r.tokens.0, vec![A, EOS]);
        assert!((r.score - (0.55f64.ln() + 0.5f64.ln())).abs() < 1e-12);
        assert_eq!(r.text, "A");
        assert_eq!(r.steps, 2);
    }

    #[test]
    fn beam_two_on_m1_beats_greedy() {
        let r = beam_search(&fixture_m1(), &[], &cfg(2)).unwrap();
        assert_eq!(r.tokens.0, vec![B, EOS]);
        assert!((r.score - (0.45f64.ln() + 0.9f64.ln())).abs() < 1e-12);
        let all = beam_search_hypotheses(&fixture_m1(), &[], &cfg(2)).unwrap();
        assert_eq!(all.len(), 2);
        assert_eq!(all[1].ids.0, vec![A, EOS]);
        assert!(all.iter().all(|h| h.finished));
    }

    #[test]
    fn beam_of_one_matches_greedy_on_m1() {
        let g = greedy_decode(&fixture_m1(), &[], &cfg(1)).unwrap();
        let b = beam_search(&fixture_m1(), &[], &cfg(1)).unwrap();
        assert_eq!(g, b);
    }

    #[test]
    fn prompt_ending_in_eos_halts_immediately() {
        for r in [
            greedy_decode(&fixture_m1(), &[A, EOS], &cfg(1)).unwrap(),
            beam_search(&fixture_m1(), &[A, EOS], &cfg(3)).unwrap(),
        ] {
            assert!(r.tokens.is_empty());
            assert_eq!(r.score, 0.0);
            assert_eq!(r.steps, 0);
        }
    }

    #[test]
    fn max_length_caps_output() {
        let mut c = cfg(1);
        c.max_length = 1;
        let r = greedy_decode(&fixture_m1(), &[], &c).unwrap();
        assert_eq!(r.tokens.0, vec![A]);
        let r = beam_search(&fixture_m1(), &[], &c).unwrap();
        assert_eq!(r.tokens.0, vec![A]);
    }

    #[test]
    fn no_repeat_changes_greedy_path() {
        let mut c = cfg(1);
        c.no_repeat_ngram_size = Some(1);
        let r = greedy_decode(&fixture_m1(), &[], &c).unwrap();
        // With a unigram ban A cannot follow A; eos takes 0.5 / 0.7.
        assert_eq!(r.tokens.0, vec![A, EOS]);
        assert!((r.score - (0.55f64.ln() + (0.5f64 / 0.7).ln())).abs() < 1e-12);
    }

    #[test]
    fn invalid_config_and_prompt() {
        let mut c = cfg(0);
        assert!(matches!(
            beam_search(&fixture_m1(), &[], &c),
            Err(DecodeError::InvalidConfig(_))
        ));
        c.beam_size = 1;
        assert!(matches!(
            greedy_decode(&fixture_m1(), &[9], &c),
            Err(DecodeError::Tokenizer(_))
        ));
    }

    #[test]
    fn length_penalty_hook_reranks() {
        let mut c = cfg(4);
        c.length_penalty = 3.0;
        let all = beam_search_hypotheses(&fixture_m1(), &[], &c).unwrap();
        for pair in all.windows(2) {
            assert!(final_score(&pair[0], 3.0) >= final_score(&pair[1], 3.0));
        }
    }
}
