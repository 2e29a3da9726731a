//! DES round function and key schedule (FIPS 46-3), without the initial and
//! final permutations.
//!
//! A block is `(L, R)` with `L` in the high 32 bits. One round maps
//! `(L, R)` to `(R, L ^ f(R, K_i))`; after `r` rounds the output is
//! `(L_r, R_r)` with no half swap. IP, FP and the swap only matter for
//! comparing against full-cipher vectors, see [`full_encrypt`].

use std::ops::Range;
use std::sync::LazyLock;

use super::CipherId;
use crate::Result;

pub const ROUNDS: u32 = 16;

const IP: [u8; 64] = [
    58, 50, 42, 34, 26, 18, 10, 2, 60, 52, 44, 36, 28, 20, 12, 4, 62, 54, 46, 38, 30, 22, 14, 6,
    64, 56, 48, 40, 32, 24, 16, 8, 57, 49, 41, 33, 25, 17, 9, 1, 59, 51, 43, 35, 27, 19, 11, 3, 61,
    53, 45, 37, 29, 21, 13, 5, 63, 55, 47, 39, 31, 23, 15, 7,
];

const FP: [u8; 64] = [
    40, 8, 48, 16, 56, 24, 64, 32, 39, 7, 47, 15, 55, 23, 63, 31, 38, 6, 46, 14, 54, 22, 62, 30,
    37, 5, 45, 13, 53, 21, 61, 29, 36, 4, 44, 12, 52, 20, 60, 28, 35, 3, 43, 11, 51, 19, 59, 27,
    34, 2, 42, 10, 50, 18, 58, 26, 33, 1, 41, 9, 49, 17, 57, 25,
];

const E: [u8; 48] = [
    32, 1, 2, 3, 4, 5, 4, 5, 6, 7, 8, 9, 8, 9, 10, 11, 12, 13, 12, 13, 14, 15, 16, 17, 16, 17, 18,
    19, 20, 21, 20, 21, 22, 23, 24, 25, 24, 25, 26, 27, 28, 29, 28, 29, 30, 31, 32, 1,
];

const P: [u8; 32] = [
    16, 7, 20, 21, 29, 12, 28, 17, 1, 15, 23, 26, 5, 18, 31, 10, 2, 8, 24, 14, 32, 27, 3, 9, 19,
    13, 30, 6, 22, 11, 4, 25,
];

const PC1: [u8; 56] = [
    57, 49, 41, 33, 25, 17, 9, 1, 58, 50, 42, 34, 26, 18, 10, 2, 59, 51, 43, 35, 27, 19, 11, 3, 60,
    52, 44, 36, 63, 55, 47, 39, 31, 23, 15, 7, 62, 54, 46, 38, 30, 22, 14, 6, 61, 53, 45, 37, 29,
    21, 13, 5, 28, 20, 12, 4,
];

const PC2: [u8; 48] = [
    14, 17, 11, 24, 1, 5, 3, 28, 15, 6, 21, 10, 23, 19, 12, 4, 26, 8, 16, 7, 27, 20, 13, 2, 41, 52,
    31, 37, 47, 55, 30, 40, 51, 45, 33, 48, 44, 49, 39, 56, 34, 53, 46, 42, 50, 36, 29, 32,
];

const SHIFTS: [u32; 16] = [1, 1, 2, 2, 2, 2, 2, 2, 1, 2, 2, 2, 2, 2, 2, 1];

/// The eight S-boxes in FIPS row/column layout: entry `row * 16 + col`.
pub const SBOXES: [[u8; 64]; 8] = [
    [
        14, 4, 13, 1, 2, 15, 11, 8, 3, 10, 6, 12, 5, 9, 0, 7, 0, 15, 7, 4, 14, 2, 13, 1, 10, 6, 12,
        11, 9, 5, 3, 8, 4, 1, 14, 8, 13, 6, 2, 11, 15, 12, 9, 7, 3, 10, 5, 0, 15, 12, 8, 2, 4, 9,
        1, 7, 5, 11, 3, 14, 10, 0, 6, 13,
    ],
    [
        15, 1, 8, 14, 6, 11, 3, 4, 9, 7, 2, 13, 12, 0, 5, 10, 3, 13, 4, 7, 15, 2, 8, 14, 12, 0, 1,
        10, 6, 9, 11, 5, 0, 14, 7, 11, 10, 4, 13, 1, 5, 8, 12, 6, 9, 3, 2, 15, 13, 8, 10, 1, 3, 15,
        4, 2, 11, 6, 7, 12, 0, 5, 14, 9,
    ],
    [
        10, 0, 9, 14, 6, 3, 15, 5, 1, 13, 12, 7, 11, 4, 2, 8, 13, 7, 0, 9, 3, 4, 6, 10, 2, 8, 5,
        14, 12, 11, 15, 1, 13, 6, 4, 9, 8, 15, 3, 0, 11, 1, 2, 12, 5, 10, 14, 7, 1, 10, 13, 0, 6,
        9, 8, 7, 4, 15, 14, 3, 11, 5, 2, 12,
    ],
    [
        7, 13, 14, 3, 0, 6, 9, 10, 1, 2, 8, 5, 11, 12, 4, 15, 13, 8, 11, 5, 6, 15, 0, 3, 4, 7, 2,
        12, 1, 10, 14, 9, 10, 6, 9, 0, 12, 11, 7, 13, 15, 1, 3, 14, 5, 2, 8, 4, 3, 15, 0, 6, 10, 1,
        13, 8, 9, 4, 5, 11, 12, 7, 2, 14,
    ],
    [
        2, 12, 4, 1, 7, 10, 11, 6, 8, 5, 3, 15, 13, 0, 14, 9, 14, 11, 2, 12, 4, 7, 13, 1, 5, 0, 15,
        10, 3, 9, 8, 6, 4, 2, 1, 11, 10, 13, 7, 8, 15, 9, 12, 5, 6, 3, 0, 14, 11, 8, 12, 7, 1, 14,
        2, 13, 6, 15, 0, 9, 10, 4, 5, 3,
    ],
    [
        12, 1, 10, 15, 9, 2, 6, 8, 0, 13, 3, 4, 14, 7, 5, 11, 10, 15, 4, 2, 7, 12, 9, 5, 6, 1, 13,
        14, 0, 11, 3, 8, 9, 14, 15, 5, 2, 8, 12, 3, 7, 0, 4, 10, 1, 13, 11, 6, 4, 3, 2, 12, 9, 5,
        15, 10, 11, 14, 1, 7, 6, 0, 8, 13,
    ],
    [
        4, 11, 2, 14, 15, 0, 8, 13, 3, 12, 9, 7, 5, 10, 6, 1, 13, 0, 11, 7, 4, 9, 1, 10, 14, 3, 5,
        12, 2, 15, 8, 6, 1, 4, 11, 13, 12, 3, 7, 14, 10, 15, 6, 8, 0, 5, 9, 2, 6, 11, 13, 8, 1, 4,
        10, 7, 9, 5, 0, 15, 14, 2, 3, 12,
    ],
    [
        13, 2, 8, 4, 6, 15, 11, 1, 10, 9, 3, 14, 5, 0, 12, 7, 1, 15, 13, 8, 10, 3, 7, 4, 12, 5, 6,
        11, 0, 14, 9, 2, 7, 11, 4, 1, 9, 12, 14, 2, 0, 6, 10, 13, 15, 3, 5, 8, 2, 1, 14, 7, 4, 10,
        8, 13, 15, 12, 9, 0, 3, 5, 6, 11,
    ],
];

/// Applies a FIPS-style 1-indexed, MSB-first bit selection table to the low
/// `in_bits` bits of `input`.
fn permute(table: &[u8], input: u64, in_bits: u32) -> u64 {
    table.iter().fold(0, |acc, &src| {
        (acc << 1) | ((input >> (in_bits - src as u32)) & 1)
    })
}

/// S-box `index` (0-based) applied to a 6-bit input `b1..b6`: row from the
/// outer bits, column from the middle four.
#[inline]
pub fn sbox(index: usize, six: u8) -> u8 {
    let row = ((six >> 4) & 0b10) | (six & 1);
    let col = (six >> 1) & 0xf;
    SBOXES[index][(row * 16 + col) as usize]
}

/// The expansion E: 32 bits to 48 bits.
pub fn expand(half: u32) -> u64 {
    permute(&E, half as u64, 32)
}

/// The round permutation P.
pub fn permute_p(x: u32) -> u32 {
    permute(&P, x as u64, 32) as u32
}

/// Inverse of [`permute_p`].
pub fn inverse_p(y: u32) -> u32 {
    let mut x = 0u32;
    for (out_pos, &src) in P.iter().enumerate() {
        let bit = (y >> (31 - out_pos)) & 1;
        x |= bit << (32 - src as u32);
    }
    x
}

pub fn initial_permutation(block: u64) -> u64 {
    permute(&IP, block, 64)
}

pub fn final_permutation(block: u64) -> u64 {
    permute(&FP, block, 64)
}

/// S-box outputs already pushed through P, indexed by S-box and 6-bit input.
static SP: LazyLock<[[u32; 64]; 8]> = LazyLock::new(|| {
    let mut sp = [[0u32; 64]; 8];
    for (i, table) in sp.iter_mut().enumerate() {
        for (six, entry) in table.iter_mut().enumerate() {
            let out = (sbox(i, six as u8) as u32) << (28 - 4 * i);
            *entry = permute_p(out);
        }
    }
    sp
});

/// The round function f(R, K).
#[inline]
pub fn feistel(half: u32, subkey: u64) -> u32 {
    let sp = &*SP;
    let mut out = 0;
    for (i, table) in sp.iter().enumerate() {
        // E feeds S-box i with R bits 4i..4i+5 (1-indexed, cyclic).
        let six = (half.rotate_left((4 * i as u32 + 31) % 32) >> 26) as u64;
        let k = (subkey >> (42 - 6 * i)) & 0x3f;
        out ^= table[(six ^ k) as usize];
    }
    out
}

/// The sixteen 48-bit round keys of a 64-bit DES key (parity bits ignored).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySchedule {
    subkeys: [u64; 16],
}

impl KeySchedule {
    pub fn new(key: u64) -> Self {
        let cd = permute(&PC1, key, 64);
        let mut c = (cd >> 28) as u32;
        let mut d = (cd & 0x0fff_ffff) as u32;
        let rotl28 = |x: u32, n: u32| ((x << n) | (x >> (28 - n))) & 0x0fff_ffff;
        let mut subkeys = [0u64; 16];
        for (k, &shift) in subkeys.iter_mut().zip(SHIFTS.iter()) {
            c = rotl28(c, shift);
            d = rotl28(d, shift);
            *k = permute(&PC2, ((c as u64) << 28) | d as u64, 56);
        }
        Self { subkeys }
    }

    pub fn subkey(&self, round: usize) -> u64 {
        self.subkeys[round]
    }

    /// Runs the rounds in `range` (0-based subkey indices) on an `(L, R)` state.
    pub fn rounds(&self, state: u64, range: Range<u32>) -> u64 {
        let mut l = (state >> 32) as u32;
        let mut r = state as u32;
        for i in range {
            let next = l ^ feistel(r, self.subkeys[i as usize]);
            l = r;
            r = next;
        }
        ((l as u64) << 32) | r as u64
    }

    #[inline]
    pub(crate) fn encrypt_rounds(&self, block: u64, rounds: u32) -> u64 {
        self.rounds(block, 0..rounds)
    }
}

/// `rounds` rounds of DES on an `(L, R)` block.
pub fn encrypt(key: u64, block: u64, rounds: u32) -> Result<u64> {
    CipherId::Des.check_rounds(rounds)?;
    Ok(KeySchedule::new(key).encrypt_rounds(block, rounds))
}

/// Full 16-round DES with IP, the final swap and FP. Only used to compare
/// the round-reduced core against standard DES vectors.
pub fn full_encrypt(key: u64, plaintext: u64) -> u64 {
    let out = KeySchedule::new(key).encrypt_rounds(initial_permutation(plaintext), ROUNDS);
    final_permutation(out.rotate_left(32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fips_worked_example() {
        assert_eq!(
            full_encrypt(0x1334_5779_9bbc_dff1, 0x0123_4567_89ab_cdef),
            0x85e8_1354_0f0a_b405
        );
    }

    #[test]
    fn ip_and_fp_are_inverse() {
        for x in [
            0u64,
            1,
            0x8000_0000_0000_0000,
            0x0123_4567_89ab_cdef,
            u64::MAX,
        ] {
            assert_eq!(final_permutation(initial_permutation(x)), x);
        }
    }

    #[test]
    fn p_inverse() {
        for x in [1u32, 0x8000_0000, 0x4008_0000, 0xdead_beef] {
            assert_eq!(inverse_p(permute_p(x)), x);
            assert_eq!(permute_p(inverse_p(x)), x);
        }
    }

    #[test]
    fn feistel_matches_table_definition() {
        // f(R, K) = P(S(E(R) ^ K)) evaluated through the plain tables.
        let r = 0xf0aa_f0aa;
        let k = 0x1b02_effc_7072;
        let x = expand(r) ^ k;
        let mut s = 0u32;
        for i in 0..8 {
            s = (s << 4) | sbox(i, ((x >> (42 - 6 * i)) & 0x3f) as u8) as u32;
        }
        assert_eq!(feistel(r, k), permute_p(s));
        // Worked example from the FIPS walkthrough: f(R0, K1) = 0x234aa9bb.
        assert_eq!(feistel(r, k), 0x234a_a9bb);
    }

    #[test]
    fn first_subkey_of_worked_example() {
        let ks = KeySchedule::new(0x1334_5779_9bbc_dff1);
        assert_eq!(ks.subkey(0), 0x1b02_effc_7072);
        assert_eq!(ks.subkey(15), 0xcb3d_8b0e_17f5);
    }

    #[test]
    fn parity_bits_ignored() {
        let key = 0x1334_5779_9bbc_dff1u64;
        let flipped = key ^ 0x0101_0101_0101_0101;
        assert_eq!(KeySchedule::new(key), KeySchedule::new(flipped));
    }

    #[test]
    fn zero_rounds_identity() {
        assert_eq!(
            encrypt(0xffff, 0x1234_5678_9abc_def0, 0).unwrap(),
            0x1234_5678_9abc_def0
        );
        assert!(encrypt(0, 0, 17).is_err());
    }
}
