//! Counter-based deterministic randomness.
//!
//! Every random draw in the toolkit comes from a [`StreamRng`] addressed by
//! `(seed, domain, stream)`. The generator is ChaCha20 with
//!
//! * key = `seed` (8 bytes LE) ‖ `domain` (8 bytes LE) ‖ 16 zero bytes,
//! * stream id = `stream` (the group or chunk index),
//! * word position 0,
//!
//! consumed as successive 64-bit words (`rand_chacha`'s `next_u64`). This
//! mapping is part of the dataset format contract: the same seed produces
//! the same bytes regardless of thread count or platform.

use rand_chacha::ChaCha20Rng;
use rand_core::{Rng, SeedableRng};

/// Separates independent uses of one user seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Dataset = 0,
    MonteCarlo = 1,
    Audit = 2,
}

pub struct StreamRng(ChaCha20Rng);

impl StreamRng {
    pub fn new(seed: u64, domain: Domain, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(stream);
        StreamRng(rng)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    #[inline]
    pub fn next_bit(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// A uniform `bits`-bit value: `ceil(bits / 64)` words concatenated
    /// first-drawn-most-significant, then truncated to the low `bits` bits.
    #[inline]
    pub fn next_bits(&mut self, bits: u32) -> u128 {
        debug_assert!(bits > 0 && bits <= 128);
        let words = bits.div_ceil(64);
        let mut value: u128 = 0;
        for _ in 0..words {
            value = (value << 64) | self.next_u64() as u128;
        }
        if bits == 128 {
            value
        } else {
            value & ((1u128 << bits) - 1)
        }
    }

    /// Uniform in `0..n` by rejection.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - u64::MAX % n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }
}
