//! PRESENT-80, reduced to `r` rounds plus the final key addition.

use std::ops::Range;
use std::sync::LazyLock;

use super::CipherId;
use crate::Result;

pub const SBOX: [u8; 16] = [
    0xc, 0x5, 0x6, 0xb, 0x9, 0x0, 0xa, 0xd, 0x3, 0xe, 0xf, 0x8, 0x4, 0x7, 0x1, 0x2,
];

const KEY_MASK: u128 = (1 << 80) - 1;

/// pLayer: bit `i` moves to `16 i mod 63`, bit 63 stays.
pub fn player(state: u64) -> u64 {
    let mut out = 0u64;
    for i in 0..64 {
        let dst = if i == 63 { 63 } else { (16 * i) % 63 };
        out |= ((state >> i) & 1) << dst;
    }
    out
}

pub fn sbox_layer(state: u64) -> u64 {
    (0..16).fold(0, |acc, n| {
        let nibble = (state >> (4 * n)) & 0xf;
        acc | (SBOX[nibble as usize] as u64) << (4 * n)
    })
}

/// sBoxLayer followed by pLayer, one table per state byte.
static SP: LazyLock<Box<[[u64; 256]; 8]>> = LazyLock::new(|| {
    let mut sp = Box::new([[0u64; 256]; 8]);
    for (j, table) in sp.iter_mut().enumerate() {
        for (byte, entry) in table.iter_mut().enumerate() {
            let hi = SBOX[byte >> 4] as u64;
            let lo = SBOX[byte & 0xf] as u64;
            *entry = player(((hi << 4) | lo) << (8 * j));
        }
    }
    sp
});

/// The 32 round keys K_1..K_32 of an 80-bit key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySchedule {
    round_keys: [u64; 32],
}

impl KeySchedule {
    /// `key` is the 80-bit register `k79..k0`; higher bits are ignored.
    pub fn new(key: u128) -> Self {
        let mut reg = key & KEY_MASK;
        let mut round_keys = [0u64; 32];
        for (i, rk) in round_keys.iter_mut().enumerate() {
            *rk = (reg >> 16) as u64;
            reg = ((reg << 61) | (reg >> 19)) & KEY_MASK;
            let top = (reg >> 76) as usize;
            reg = (reg & !(0xf << 76)) | (SBOX[top] as u128) << 76;
            reg ^= ((i as u128 + 1) & 0x1f) << 15;
        }
        Self { round_keys }
    }

    /// K_i for `i` in 1..=32.
    pub fn round_key(&self, i: usize) -> u64 {
        self.round_keys[i - 1]
    }

    /// Runs rounds `range.start + 1 ..= range.end`: addRoundKey, sBoxLayer,
    /// pLayer. No final whitening.
    pub fn rounds(&self, mut state: u64, range: Range<u32>) -> u64 {
        let sp = &**SP;
        for i in range {
            state ^= self.round_keys[i as usize];
            let mut next = 0;
            for (j, table) in sp.iter().enumerate() {
                next |= table[((state >> (8 * j)) & 0xff) as usize];
            }
            state = next;
        }
        state
    }

    /// Final key addition after `rounds` rounds: XOR with K_{rounds+1}.
    pub fn whiten(&self, state: u64, rounds: u32) -> u64 {
        state ^ self.round_keys[rounds as usize]
    }

    #[inline]
    pub(crate) fn encrypt_rounds(&self, block: u64, rounds: u32) -> u64 {
        self.whiten(self.rounds(block, 0..rounds), rounds)
    }
}

/// `rounds` rounds of PRESENT-80 followed by the final key addition.
pub fn encrypt(key: u128, block: u64, rounds: u32) -> Result<u64> {
    CipherId::Present.check_rounds(rounds)?;
    Ok(KeySchedule::new(key).encrypt_rounds(block, rounds))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONES: u128 = KEY_MASK;

    #[test]
    fn published_vectors() {
        assert_eq!(encrypt(0, 0, 31).unwrap(), 0x5579_c138_7b22_8445);
        assert_eq!(encrypt(ONES, 0, 31).unwrap(), 0xe72c_46c0_f594_5049);
        assert_eq!(encrypt(0, u64::MAX, 31).unwrap(), 0xa112_ffc7_2f68_417b);
        assert_eq!(encrypt(ONES, u64::MAX, 31).unwrap(), 0x3333_dcd3_2132_10d2);
    }

    #[test]
    fn one_round_zero_key() {
        // K1 = 0, S(0) = 0xc in every nibble; bits 4j+2 -> 32+j and 4j+3 -> 48+j
        // fill the top half; K2 = 0xc000...0 from the S-boxed top nibble.
        let ks = KeySchedule::new(0);
        assert_eq!(ks.round_key(1), 0);
        assert_eq!(ks.round_key(2), 0xc000_0000_0000_0000);
        assert_eq!(encrypt(0, 0, 1).unwrap(), 0x3fff_ffff_0000_0000);
    }

    #[test]
    fn zero_rounds_is_first_key_addition() {
        let key = 0x0123_4567_89ab_cdef_0123u128;
        let ks = KeySchedule::new(key);
        assert_eq!(ks.round_key(1), (key >> 16) as u64);
        assert_eq!(encrypt(key, 0x55, 0).unwrap(), 0x55 ^ ks.round_key(1));
    }

    #[test]
    fn table_round_matches_layers() {
        let ks = KeySchedule::new(0x1234);
        let x = 0x0123_4567_89ab_cdefu64;
        let expected = player(sbox_layer(x ^ ks.round_key(1)));
        assert_eq!(ks.rounds(x, 0..1), expected);
    }

    #[test]
    fn player_is_a_permutation() {
        let mut seen = 0u64;
        for i in 0..64 {
            seen |= player(1 << i);
        }
        assert_eq!(seen, u64::MAX);
    }
}
