//! Seeding and replica streams.
//!
//! All randomness derives from one root 64-bit seed. Replica `r` gets its
//! own ChaCha8 stream via `set_stream(r)`, so replicas are independent and
//! reproducible regardless of scheduling order. Within a replica, draws are
//! consumed in the order documented by each engine.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Pinned generator: results are reproducible across machines for a fixed
/// crate version as long as this identifier does not change.
pub const GENERATOR_ID: &str = "chacha8-stream-v1";

pub type ReplicaRng = ChaCha8Rng;

/// RNG for replica `replica` of an experiment rooted at `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ReplicaRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Draws two fair bits at a time from buffered 64-bit words.
///
/// Used by the 2-D lattice walkers (four directions = two bits per step);
/// one `next_u64` feeds 32 steps. Draw order: LSB-first within each word.
pub struct BitPairs {
    buf: u64,
    left: u32,
}

impl BitPairs {
    pub fn new() -> Self {
        BitPairs { buf: 0, left: 0 }
    }

    #[inline]
    pub fn next<R: rand::Rng>(&mut self, rng: &mut R) -> u8 {
        if self.left == 0 {
            self.buf = rng.next_u64();
            self.left = 32;
        }
        let out = (self.buf & 3) as u8;
        self.buf >>= 2;
        self.left -= 1;
        out
    }
}

impl Default for BitPairs {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_differ_and_reproduce() {
        let mut a = replica_rng(42, 0);
        let mut b = replica_rng(42, 1);
        let mut a2 = replica_rng(42, 0);
        let xa: u64 = a.next_u64();
        let xb: u64 = b.next_u64();
        assert_ne!(xa, xb);
        assert_eq!(xa, a2.next_u64());
    }

    #[test]
    fn bit_pairs_cover_all_directions() {
        let mut rng = replica_rng(7, 0);
        let mut pairs = BitPairs::new();
        let mut seen = [0u32; 4];
        for _ in 0..4096 {
            seen[pairs.next(&mut rng) as usize] += 1;
        }
        for &c in &seen {
            assert!(c > 800, "direction frequencies badly skewed: {seen:?}");
        }
    }
}
