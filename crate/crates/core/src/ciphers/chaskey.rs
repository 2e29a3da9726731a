//! Chaskey as an Even–Mansour block cipher: `E_K(p) = π^r(p ^ K) ^ K`,
//! where π is one round of the Chaskey ARX permutation on four 32-bit words.

use super::CipherId;
use crate::Result;

pub const fn words_to_u128(v: [u32; 4]) -> u128 {
    ((v[0] as u128) << 96) | ((v[1] as u128) << 64) | ((v[2] as u128) << 32) | v[3] as u128
}

pub const fn u128_to_words(x: u128) -> [u32; 4] {
    [
        (x >> 96) as u32,
        (x >> 64) as u32,
        (x >> 32) as u32,
        x as u32,
    ]
}

/// One round of the permutation.
#[inline(always)]
pub fn round(v: &mut [u32; 4]) {
    v[0] = v[0].wrapping_add(v[1]);
    v[1] = v[1].rotate_left(5);
    v[1] ^= v[0];
    v[0] = v[0].rotate_left(16);

    v[2] = v[2].wrapping_add(v[3]);
    v[3] = v[3].rotate_left(8);
    v[3] ^= v[2];

    v[0] = v[0].wrapping_add(v[3]);
    v[3] = v[3].rotate_left(13);
    v[3] ^= v[0];

    v[2] = v[2].wrapping_add(v[1]);
    v[1] = v[1].rotate_left(7);
    v[1] ^= v[2];
    v[2] = v[2].rotate_left(16);
}

pub fn permute(v: &mut [u32; 4], rounds: u32) {
    for _ in 0..rounds {
        round(v);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Key(u128);

impl Key {
    pub fn new(key: u128) -> Self {
        Key(key)
    }

    #[inline]
    pub(crate) fn encrypt_rounds(&self, block: u128, rounds: u32) -> u128 {
        let mut v = u128_to_words(block ^ self.0);
        permute(&mut v, rounds);
        words_to_u128(v) ^ self.0
    }
}

/// `rounds` rounds of keyed Chaskey on `(v0, v1, v2, v3)`.
pub fn encrypt(key: [u32; 4], block: [u32; 4], rounds: u32) -> Result<[u32; 4]> {
    CipherId::Chaskey.check_rounds(rounds)?;
    let out = Key::new(words_to_u128(key)).encrypt_rounds(words_to_u128(block), rounds);
    Ok(u128_to_words(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_round_golden_vector() {
        // v0 = 1: v1 <- 1, v0 <- 1<<16; v3 <- v0; v2 <- 1, v1 <- 0x80 ^ 1, v2 <- 1<<16.
        let out = encrypt([0; 4], [1, 0, 0, 0], 1).unwrap();
        assert_eq!(out, [0x0001_0000, 0x0000_0081, 0x0001_0000, 0x0001_0000]);
    }

    #[test]
    fn zero_rounds_cancels_whitening() {
        let key = [0xdead_beef, 1, 2, 3];
        assert_eq!(encrypt(key, [4, 5, 6, 7], 0).unwrap(), [4, 5, 6, 7]);
    }

    #[test]
    fn word_packing() {
        let w = [0x0102_0304, 0x0506_0708, 0x090a_0b0c, 0x0d0e_0f10];
        assert_eq!(words_to_u128(w), 0x0102_0304_0506_0708_090a_0b0c_0d0e_0f10);
        assert_eq!(u128_to_words(words_to_u128(w)), w);
    }
}
