//! Round-reduced DES, Chaskey and PRESENT-80.
//!
//! All three ciphers share one calling convention: a [`KeyMaterial`], a
//! [`Block`] and a round count. Blocks are stored MSB-first in a `u128`:
//!
//! * DES: `(L, R)` with `L` in the high 32 bits (no IP/FP, no final swap).
//! * Chaskey: `(v0, v1, v2, v3)` with `v0` highest.
//! * PRESENT: the 64-bit state, bit 63 = b63.

pub mod chaskey;
pub mod des;
pub mod present;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CipherId {
    Des,
    Chaskey,
    Present,
}

impl CipherId {
    pub const ALL: [CipherId; 3] = [CipherId::Des, CipherId::Chaskey, CipherId::Present];

    pub const fn name(self) -> &'static str {
        match self {
            CipherId::Des => "des",
            CipherId::Chaskey => "chaskey",
            CipherId::Present => "present",
        }
    }

    /// Block size L in bits.
    pub const fn block_bits(self) -> u32 {
        match self {
            CipherId::Des | CipherId::Present => 64,
            CipherId::Chaskey => 128,
        }
    }

    pub const fn key_bits(self) -> u32 {
        match self {
            CipherId::Des => 64,
            CipherId::Chaskey => 128,
            CipherId::Present => 80,
        }
    }

    pub const fn max_rounds(self) -> u32 {
        match self {
            CipherId::Des | CipherId::Chaskey => 16,
            CipherId::Present => 31,
        }
    }

    /// Width of the words used when printing or parsing differences.
    pub const fn word_bits(self) -> u32 {
        match self {
            CipherId::Des | CipherId::Chaskey => 32,
            CipherId::Present => 16,
        }
    }

    /// Default basic-unit width ω of the tensor arrangement.
    pub const fn default_omega(self) -> u16 {
        match self {
            CipherId::Des | CipherId::Present => 4,
            CipherId::Chaskey => 32,
        }
    }

    /// The input difference used for the distinguishers of each cipher.
    pub fn default_delta(self) -> Block {
        match self {
            CipherId::Des => Block::des(0x4008_0000, 0x0400_0000),
            CipherId::Chaskey => Block::chaskey([0x8400, 0x0400, 0, 0]),
            CipherId::Present => Block::present(0x9),
        }
    }

    /// Tag byte used in dataset headers.
    pub const fn tag(self) -> u8 {
        match self {
            CipherId::Des => 1,
            CipherId::Chaskey => 2,
            CipherId::Present => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            1 => Ok(CipherId::Des),
            2 => Ok(CipherId::Chaskey),
            3 => Ok(CipherId::Present),
            t => Err(Error::format(format!("unknown cipher tag {t}"))),
        }
    }

    pub fn check_rounds(self, rounds: u32) -> Result<()> {
        if rounds > self.max_rounds() {
            return Err(Error::RoundRange {
                cipher: self.name(),
                rounds,
                max: self.max_rounds(),
            });
        }
        Ok(())
    }

    /// Parses a block written either as one hex number or as comma-separated
    /// hex words, most significant word first (`0x40080000,0x04000000`).
    pub fn parse_block(self, s: &str) -> Result<Block> {
        let bits = self.block_bits();
        let words: Vec<&str> = s.split(',').map(str::trim).collect();
        let n = words.len() as u32;
        if n == 0 || !bits.is_multiple_of(n) || !matches!(bits / n, 8 | 16 | 32 | 64 | 128) {
            return Err(Error::Usage(format!(
                "cannot split a {bits}-bit block into {n} words"
            )));
        }
        let width = bits / n;
        let mut value: u128 = 0;
        for w in words {
            let digits = w.trim_start_matches("0x").trim_start_matches("0X");
            let word = u128::from_str_radix(digits, 16)
                .map_err(|e| Error::Usage(format!("bad hex word {w:?}: {e}")))?;
            if width < 128 && word >> width != 0 {
                return Err(Error::Usage(format!(
                    "word {w} does not fit in {width} bits"
                )));
            }
            value = if width == 128 {
                word
            } else {
                (value << width) | word
            };
        }
        Block::new(value, bits)
    }

    /// Formats a block as comma-separated words of [`word_bits`](Self::word_bits).
    pub fn format_block(self, block: Block) -> String {
        let width = self.word_bits();
        let n = block.bits() / width;
        let digits = (width / 4) as usize;
        let mask = (1u128 << width) - 1;
        (0..n)
            .rev()
            .map(|i| format!("0x{:0digits$x}", (block.value() >> (i * width)) & mask))
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for CipherId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CipherId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "des" => Ok(CipherId::Des),
            "chaskey" => Ok(CipherId::Chaskey),
            "present" => Ok(CipherId::Present),
            other => Err(Error::Usage(format!("unknown cipher {other:?}"))),
        }
    }
}

impl Serialize for CipherId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for CipherId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! bit_vector {
    ($name:ident, $what:literal) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name {
            value: u128,
            bits: u32,
        }

        impl $name {
            pub fn new(value: u128, bits: u32) -> Result<Self> {
                if bits == 0 || bits > 128 || bits % 8 != 0 {
                    return Err(Error::shape(format!("{} width {bits} unsupported", $what)));
                }
                if bits < 128 && value >> bits != 0 {
                    return Err(Error::shape(format!(
                        "{} value does not fit in {bits} bits",
                        $what
                    )));
                }
                Ok(Self { value, bits })
            }

            pub const fn value(self) -> u128 {
                self.value
            }

            pub const fn bits(self) -> u32 {
                self.bits
            }

            /// Big-endian bytes, `bits / 8` of them.
            pub fn to_be_bytes(self) -> Vec<u8> {
                let n = (self.bits / 8) as usize;
                self.value.to_be_bytes()[16 - n..].to_vec()
            }

            pub fn from_be_bytes(bytes: &[u8]) -> Result<Self> {
                if bytes.is_empty() || bytes.len() > 16 {
                    return Err(Error::shape(format!(
                        "{} of {} bytes unsupported",
                        $what,
                        bytes.len()
                    )));
                }
                let mut buf = [0u8; 16];
                buf[16 - bytes.len()..].copy_from_slice(bytes);
                Self::new(u128::from_be_bytes(buf), bytes.len() as u32 * 8)
            }

            /// Bitwise complement within the vector's width.
            pub fn complement(self) -> Self {
                let mask = if self.bits == 128 {
                    u128::MAX
                } else {
                    (1u128 << self.bits) - 1
                };
                Self {
                    value: !self.value & mask,
                    bits: self.bits,
                }
            }

            pub fn is_zero(self) -> bool {
                self.value == 0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let digits = (self.bits / 4) as usize;
                write!(f, "0x{:0digits$x}", self.value)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                let digits = s.trim_start_matches("0x");
                if digits.is_empty() || digits.len() % 2 != 0 || digits.len() > 32 {
                    return Err(serde::de::Error::custom(format!("bad hex {s:?}")));
                }
                let value = u128::from_str_radix(digits, 16).map_err(serde::de::Error::custom)?;
                Self::new(value, digits.len() as u32 * 4).map_err(serde::de::Error::custom)
            }
        }
    };
}

bit_vector!(Block, "block");
bit_vector!(KeyMaterial, "key");

impl Block {
    pub const fn des(left: u32, right: u32) -> Self {
        Block {
            value: ((left as u128) << 32) | right as u128,
            bits: 64,
        }
    }

    pub const fn chaskey(words: [u32; 4]) -> Self {
        Block {
            value: chaskey::words_to_u128(words),
            bits: 128,
        }
    }

    pub const fn present(state: u64) -> Self {
        Block {
            value: state as u128,
            bits: 64,
        }
    }

    pub fn xor(self, other: Block) -> Result<Block> {
        if self.bits != other.bits {
            return Err(Error::shape(format!(
                "cannot xor {}-bit and {}-bit blocks",
                self.bits, other.bits
            )));
        }
        Ok(Block {
            value: self.value ^ other.value,
            bits: self.bits,
        })
    }
}

/// A cipher with its key schedule already expanded.
///
/// Expanding once and encrypting many blocks is how sampling amortizes the
/// DES and PRESENT key schedules over the pairs of a group.
#[derive(Clone, Debug)]
pub enum KeyedCipher {
    Des(des::KeySchedule),
    Chaskey(chaskey::Key),
    Present(present::KeySchedule),
}

impl KeyedCipher {
    pub fn new(cipher: CipherId, key: &KeyMaterial) -> Result<Self> {
        if key.bits() != cipher.key_bits() {
            return Err(Error::shape(format!(
                "{cipher} takes a {}-bit key, got {} bits",
                cipher.key_bits(),
                key.bits()
            )));
        }
        Ok(Self::from_raw_key(cipher, key.value()))
    }

    /// `key` must already fit in the cipher's key width.
    pub(crate) fn from_raw_key(cipher: CipherId, key: u128) -> Self {
        match cipher {
            CipherId::Des => KeyedCipher::Des(des::KeySchedule::new(key as u64)),
            CipherId::Chaskey => KeyedCipher::Chaskey(chaskey::Key::new(key)),
            CipherId::Present => KeyedCipher::Present(present::KeySchedule::new(key)),
        }
    }

    pub fn cipher(&self) -> CipherId {
        match self {
            KeyedCipher::Des(_) => CipherId::Des,
            KeyedCipher::Chaskey(_) => CipherId::Chaskey,
            KeyedCipher::Present(_) => CipherId::Present,
        }
    }

    pub fn encrypt(&self, p: Block, rounds: u32) -> Result<Block> {
        let cipher = self.cipher();
        if p.bits() != cipher.block_bits() {
            return Err(Error::shape(format!(
                "{cipher} takes a {}-bit block, got {} bits",
                cipher.block_bits(),
                p.bits()
            )));
        }
        cipher.check_rounds(rounds)?;
        Ok(Block {
            value: self.encrypt_raw(p.value(), rounds),
            bits: p.bits(),
        })
    }

    /// Unchecked variant: `block` fits the block width and `rounds` is in range.
    #[inline]
    pub(crate) fn encrypt_raw(&self, block: u128, rounds: u32) -> u128 {
        match self {
            KeyedCipher::Des(ks) => ks.encrypt_rounds(block as u64, rounds) as u128,
            KeyedCipher::Chaskey(k) => k.encrypt_rounds(block, rounds),
            KeyedCipher::Present(ks) => ks.encrypt_rounds(block as u64, rounds) as u128,
        }
    }
}

/// Encrypts `p` under `key` for `rounds` rounds of `cipher`.
pub fn encrypt(cipher: CipherId, key: &KeyMaterial, p: Block, rounds: u32) -> Result<Block> {
    cipher.check_rounds(rounds)?;
    KeyedCipher::new(cipher, key)?.encrypt(p, rounds)
}
