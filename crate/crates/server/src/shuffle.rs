//! Display order for blind rating.

use std::sync::Mutex;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `order[display_index]` is the index of the result shown at that position.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order
}

/// Hands out one shuffle seed per generation.
#[derive(Debug)]
pub struct ShuffleSource(Mutex<ChaCha8Rng>);

impl ShuffleSource {
    pub fn from_entropy() -> Self {
        Self(Mutex::new(ChaCha8Rng::from_os_rng()))
    }

    /// Deterministic seeds, for reproducible runs.
    pub fn seeded(seed: u64) -> Self {
        Self(Mutex::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    pub fn next_seed(&self) -> u64 {
        self.0.lock().expect("shuffle lock").random()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn is_a_permutation() {
        for n in 0..8 {
            for seed in 0..50 {
                let mut p = permutation(n, seed);
                p.sort_unstable();
                assert_eq!(p, (0..n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(permutation(6, 42), permutation(6, 42));
        let a = ShuffleSource::seeded(1);
        let b = ShuffleSource::seeded(1);
        assert_eq!(a.next_seed(), b.next_seed());
    }

    #[test]
    fn seeds_vary_the_order() {
        let distinct: std::collections::HashSet<_> = (0..20).map(|s| permutation(4, s)).collect();
        assert!(distinct.len() > 1);
    }
}
