use rand::Rng;

use super::CorpusError;
use crate::decode::rng_from_seed;

/// Holds out `n_validation` items chosen uniformly at random.
///
/// The draw is a partial Fisher-Yates shuffle of the indices on the seeded
/// ChaCha20 stream, so the split depends on the seed and the input order.
/// Both halves keep their original relative order.
pub fn split_validation<T>(
    items: Vec<T>,
    n_validation: usize,
    seed: u64,
) -> Result<(Vec<T>, Vec<T>), CorpusError> {
    let total = items.len();
    if n_validation > total {
        return Err(CorpusError::TooManyValidation {
            requested: n_validation,
            available: total,
        });
    }
    let mut rng = rng_from_seed(seed);
    let mut indices: Vec<usize> = (0..total).collect();
    for i in 0..n_validation {
        let j = i + rng.random_range(0..(total - i) as u64) as usize;
        indices.swap(i, j);
    }
    let mut held_out = vec![false; total];
    for &i in &indices[..n_validation] {
        held_out[i] = true;
    }
    let mut train = Vec::with_capacity(total - n_validation);
    let mut validation = Vec::with_capacity(n_validation);
    for (item, hold) in items.into_iter().zip(held_out) {
        if hold {
            validation.push(item);
        } else {
            train.push(item);
        }
    }
    Ok((train, validation))
}
