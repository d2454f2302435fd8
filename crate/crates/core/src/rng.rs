//! Seeded random streams.
//!
//! Every bird draws from its own ChaCha8 stream: the 256-bit key comes from
//! `ChaCha8Rng::seed_from_u64(seed)` and the stream id is the bird id. Uniform
//! variates take the top 53 bits of `next_u64`, so `u = (x >> 11) * 2^-53` in `[0, 1)`.
//! Nothing here depends on `rand`'s distribution code, which keeps draws stable
//! across crate versions.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Identifier recorded in run manifests.
pub const ALGORITHM: &str =
    "chacha8; key=seed_from_u64(seed); stream=bird_id; uniform=(next_u64>>11)*2^-53";

#[derive(Debug, Clone)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    /// Sub-stream for one bird.
    pub fn for_bird(seed: u64, bird_id: usize) -> Self {
        Self::new(seed, bird_id as u64)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi]`, clamped so rounding can never leave the interval.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let u = self.unit();
        (lo + (hi - lo) * u).clamp(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Stream::for_bird(42, 3);
        let mut b = Stream::for_bird(42, 3);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn streams_are_distinct() {
        let mut a = Stream::for_bird(42, 0);
        let mut b = Stream::for_bird(42, 1);
        let mut c = Stream::for_bird(43, 0);
        let (x, y, z) = (a.next_u64(), b.next_u64(), c.next_u64());
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn uniform_stays_in_range() {
        let mut s = Stream::new(1, 0);
        for _ in 0..10_000 {
            let u = s.unit();
            assert!((0.0..1.0).contains(&u));
            let v = s.uniform(2000.0, 10000.0);
            assert!((2000.0..=10000.0).contains(&v));
        }
        assert_eq!(s.uniform(5.0, 5.0), 5.0);
    }
}
