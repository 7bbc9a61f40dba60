//! Seeded multinomial draws.
//!
//! All sampling uses [`SimRng`], ChaCha20 seeded with `seed_from_u64`. The
//! algorithm is fixed and platform independent, so a seed reproduces the same
//! counts everywhere.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub type SimRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Seed for callers that did not supply one.
pub fn fresh_seed() -> u64 {
    rand::rng().random()
}

/// Draws `shots` outcomes from the (possibly unnormalized) weights and
/// returns the number of hits per outcome index. Inverse-CDF lookup, one
/// uniform variate per shot.
pub fn multinomial<R: Rng + ?Sized>(weights: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(weights.len());
    let mut total = 0.0;
    for &w in weights {
        total += w;
        cdf.push(total);
    }
    let mut hits = vec![0u64; weights.len()];
    if weights.is_empty() {
        return hits;
    }
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let idx = cdf.partition_point(|&c| c <= u).min(weights.len() - 1);
        hits[idx] += 1;
    }
    hits
}
