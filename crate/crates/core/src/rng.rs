//! Deterministic random streams.
//!
//! Every node owns an independent ChaCha stream keyed by `(seed, node)`, so
//! the draws a node sees never depend on how rounds are scheduled across
//! worker threads.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream ids at or above this value are reserved for non-node consumers
/// (shuffles, data generation, output selection).
const AUX_BASE: u64 = 1 << 62;

pub const STREAM_SHUFFLE: u64 = AUX_BASE;
pub const STREAM_PLANT: u64 = AUX_BASE + 1;
pub const STREAM_OUTPUT: u64 = AUX_BASE + 2;
pub const STREAM_DATA_BASE: u64 = AUX_BASE + 1024;

#[derive(Debug, Clone)]
pub struct NodeRng(ChaCha8Rng);

impl NodeRng {
    pub fn new(seed: u64, node: usize) -> Self {
        Self::stream(seed, node as u64)
    }

    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        NodeRng(rng)
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    /// `b` distinct indices drawn uniformly from `0..n`, sorted ascending.
    pub fn subset(&mut self, n: usize, b: usize) -> Vec<usize> {
        let mut idx = index::sample(&mut self.0, n, b).into_vec();
        idx.sort_unstable();
        idx
    }

    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<usize> = (0..20).map({
            let mut r = NodeRng::new(7, 0);
            move |_| r.index(1000)
        }).collect();
        let b: Vec<usize> = (0..20).map({
            let mut r = NodeRng::new(7, 0);
            move |_| r.index(1000)
        }).collect();
        let c: Vec<usize> = (0..20).map({
            let mut r = NodeRng::new(7, 1);
            move |_| r.index(1000)
        }).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn subset_is_sorted_and_distinct() {
        let mut r = NodeRng::new(3, 2);
        for _ in 0..100 {
            let s = r.subset(10, 4);
            assert_eq!(s.len(), 4);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&k| k < 10));
        }
    }
}
