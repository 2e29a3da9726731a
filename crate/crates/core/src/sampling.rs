//! Labeled multi-pair sample generation.
//!
//! A group is `m` ciphertext pairs encrypted under one key. With label 1
//! every plaintext pair has XOR difference Δ; with label 0 every second
//! plaintext is drawn uniformly. Each group is a pure function of
//! `(seed, group index)`, drawn from [`StreamRng`] in this order:
//!
//! 1. label: low bit of one 64-bit word;
//! 2. key: `ceil(K/64)` words (per-group key mode);
//! 3. for each pair `j`: the key (per-pair key mode only), `P_{j,0}`, and
//!    `P_{j,1}` when the label is 0.

use std::fs::File;
use std::io::{BufWriter, Seek, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ciphers::{Block, CipherId, KeyedCipher};
use crate::datafmt::{DatasetHeader, DatasetWriter};
use crate::parallel::Workers;
use crate::rng::{Domain, StreamRng};
use crate::{Error, Result};

/// Groups generated per parallel batch before being written out.
const BATCH_GROUPS: u64 = 4096;

/// A nonzero plaintext difference of the cipher's block width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct InputDifference(Block);

impl InputDifference {
    pub fn new(cipher: CipherId, delta: Block) -> Result<Self> {
        if delta.bits() != cipher.block_bits() {
            return Err(Error::shape(format!(
                "{cipher} difference must be {} bits, got {}",
                cipher.block_bits(),
                delta.bits()
            )));
        }
        if delta.is_zero() {
            return Err(Error::Usage("input difference must be nonzero".into()));
        }
        Ok(InputDifference(delta))
    }

    pub fn default_for(cipher: CipherId) -> Self {
        InputDifference(cipher.default_delta())
    }

    pub fn block(self) -> Block {
        self.0
    }
}

/// Number of ciphertext pairs per sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct GroupSize(u16);

impl GroupSize {
    pub const SUPPORTED: [u16; 5] = [1, 2, 4, 8, 16];

    pub fn new(m: u16) -> Result<Self> {
        if Self::SUPPORTED.contains(&m) {
            Ok(GroupSize(m))
        } else {
            Err(Error::Usage(format!(
                "group size {m} not in {{1,2,4,8,16}}"
            )))
        }
    }

    pub fn get(self) -> u16 {
        self.0
    }
}

/// The `m × ω × (2L/ω)` arrangement of one group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TensorLayout {
    m: GroupSize,
    omega: u16,
    units: u16,
    #[serde(skip)]
    block_bits: u32,
}

impl TensorLayout {
    pub fn new(block_bits: u32, m: GroupSize, omega: u16) -> Result<Self> {
        let pair_bits = 2 * block_bits;
        if omega == 0 || !pair_bits.is_multiple_of(omega as u32) {
            return Err(Error::shape(format!(
                "unit width {omega} does not divide 2L = {pair_bits}"
            )));
        }
        Ok(TensorLayout {
            m,
            omega,
            units: (pair_bits / omega as u32) as u16,
            block_bits,
        })
    }

    pub fn for_cipher(cipher: CipherId, m: GroupSize) -> Self {
        Self::new(cipher.block_bits(), m, cipher.default_omega())
            .expect("default unit width divides 2L")
    }

    pub fn m(&self) -> u16 {
        self.m.get()
    }

    pub fn group_size(&self) -> GroupSize {
        self.m
    }

    pub fn omega(&self) -> u16 {
        self.omega
    }

    /// `2L / ω`.
    pub fn units(&self) -> u16 {
        self.units
    }

    pub fn block_bits(&self) -> u32 {
        self.block_bits
    }

    /// `(m, ω, 2L/ω)`.
    pub fn shape(&self) -> [usize; 3] {
        [self.m() as usize, self.omega as usize, self.units as usize]
    }

    pub fn bits_per_group(&self) -> usize {
        self.m() as usize * self.omega as usize * self.units as usize
    }

    /// Packed size of one group, padded to a byte boundary.
    pub fn bytes_per_group(&self) -> usize {
        self.bits_per_group().div_ceil(8)
    }

    #[inline]
    fn flat_index(&self, g: usize, b: usize, u: usize) -> usize {
        (g * self.omega as usize + b) * self.units as usize + u
    }
}

/// A packed bit tensor in `(g, b, u)` iteration order, earliest bit in the
/// most significant position of each byte.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitTensor {
    layout: TensorLayout,
    bytes: Vec<u8>,
}

impl BitTensor {
    pub fn zeros(layout: TensorLayout) -> Self {
        BitTensor {
            layout,
            bytes: vec![0; layout.bytes_per_group()],
        }
    }

    pub fn from_bytes(layout: TensorLayout, bytes: Vec<u8>) -> Result<Self> {
        if bytes.len() != layout.bytes_per_group() {
            return Err(Error::shape(format!(
                "tensor needs {} bytes, got {}",
                layout.bytes_per_group(),
                bytes.len()
            )));
        }
        Ok(BitTensor { layout, bytes })
    }

    pub fn layout(&self) -> &TensorLayout {
        &self.layout
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    /// Bit `b` of unit `u` of group member `g`.
    pub fn get(&self, g: usize, b: usize, u: usize) -> bool {
        let i = self.layout.flat_index(g, b, u);
        (self.bytes[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    #[inline]
    fn set(&mut self, i: usize) {
        self.bytes[i / 8] |= 0x80 >> (i % 8);
    }

    /// Unpacked `0/1` values in `(g, b, u)` order.
    pub fn to_bits(&self) -> Vec<u8> {
        let n = self.layout.bits_per_group();
        (0..n)
            .map(|i| (self.bytes[i / 8] >> (7 - i % 8)) & 1)
            .collect()
    }
}

/// Arranges `m` ciphertext pairs: `C0 ‖ C1` is split MSB-first into `2L/ω`
/// units of `ω` bits, and `tensor[g][b][u]` is bit `b` (MSB-first) of unit
/// `u` of pair `g`.
pub fn arrange_tensor(pairs: &[(Block, Block)], layout: &TensorLayout) -> Result<BitTensor> {
    if pairs.len() != layout.m() as usize {
        return Err(Error::shape(format!(
            "layout holds {} pairs, got {}",
            layout.m(),
            pairs.len()
        )));
    }
    let mut raw = Vec::with_capacity(pairs.len());
    for (c0, c1) in pairs {
        if c0.bits() != layout.block_bits || c1.bits() != layout.block_bits {
            return Err(Error::shape(format!(
                "layout expects {}-bit ciphertexts",
                layout.block_bits
            )));
        }
        raw.push((c0.value(), c1.value()));
    }
    Ok(arrange_raw(&raw, layout))
}

fn arrange_raw(pairs: &[(u128, u128)], layout: &TensorLayout) -> BitTensor {
    let l = layout.block_bits as usize;
    let omega = layout.omega as usize;
    let mut t = BitTensor::zeros(*layout);
    for (g, &(c0, c1)) in pairs.iter().enumerate() {
        for k in 0..2 * l {
            let word = if k < l { c0 } else { c1 };
            let pos = l - 1 - (k % l);
            if (word >> pos) & 1 == 1 {
                t.set(layout.flat_index(g, k % omega, k / omega));
            }
        }
    }
    t
}

/// Inverse of [`arrange_tensor`].
pub fn un_arrange(tensor: &BitTensor) -> Vec<(Block, Block)> {
    let layout = tensor.layout;
    let l = layout.block_bits as usize;
    let omega = layout.omega as usize;
    (0..layout.m() as usize)
        .map(|g| {
            let mut c = [0u128; 2];
            for k in 0..2 * l {
                if tensor.get(g, k % omega, k / omega) {
                    c[k / l] |= 1u128 << (l - 1 - (k % l));
                }
            }
            let mk = |v| Block::new(v, l as u32).expect("value fits block width");
            (mk(c[0]), mk(c[1]))
        })
        .collect()
}

/// Whether the `m` pairs of a group share a key.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyMode {
    /// One fresh key per group, shared by its pairs.
    #[default]
    PerGroup,
    /// A fresh key for every pair.
    PerPair,
}

/// Pair budget bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Case {
    /// `N` pairs in total: `N / m` groups.
    One,
    /// `N` groups of `m` pairs each.
    Two,
}

impl Case {
    pub fn group_count(self, budget: u64, m: GroupSize) -> Result<u64> {
        let groups = match self {
            Case::One => budget / m.get() as u64,
            Case::Two => budget,
        };
        if groups == 0 {
            return Err(Error::Usage(format!(
                "budget {budget} yields no groups of size {}",
                m.get()
            )));
        }
        Ok(groups)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GenSpecRecord", into = "GenSpecRecord")]
pub struct GenSpec {
    pub cipher: CipherId,
    pub rounds: u32,
    pub delta: InputDifference,
    pub layout: TensorLayout,
    pub group_count: u64,
    pub seed: u64,
    pub key_mode: KeyMode,
}

#[derive(Serialize, Deserialize)]
struct GenSpecRecord {
    cipher: CipherId,
    rounds: u32,
    delta: Block,
    m: u16,
    omega: u16,
    group_count: u64,
    seed: u64,
    #[serde(default)]
    key_mode: KeyMode,
}

impl From<GenSpec> for GenSpecRecord {
    fn from(s: GenSpec) -> Self {
        GenSpecRecord {
            cipher: s.cipher,
            rounds: s.rounds,
            delta: s.delta.block(),
            m: s.layout.m(),
            omega: s.layout.omega(),
            group_count: s.group_count,
            seed: s.seed,
            key_mode: s.key_mode,
        }
    }
}

impl TryFrom<GenSpecRecord> for GenSpec {
    type Error = Error;

    fn try_from(r: GenSpecRecord) -> Result<Self> {
        GenSpec::new(
            r.cipher,
            r.rounds,
            GroupSize::new(r.m)?,
            r.group_count,
            r.seed,
        )?
        .with_delta(r.delta)?
        .with_omega(r.omega)
        .map(|s| s.with_key_mode(r.key_mode))
    }
}

impl GenSpec {
    /// A spec with the cipher's default difference and unit width.
    pub fn new(
        cipher: CipherId,
        rounds: u32,
        m: GroupSize,
        group_count: u64,
        seed: u64,
    ) -> Result<Self> {
        cipher.check_rounds(rounds)?;
        if rounds > u8::MAX as u32 {
            return Err(Error::Usage("rounds do not fit the header".into()));
        }
        if group_count == 0 {
            return Err(Error::Usage("group count must be at least 1".into()));
        }
        Ok(GenSpec {
            cipher,
            rounds,
            delta: InputDifference::default_for(cipher),
            layout: TensorLayout::for_cipher(cipher, m),
            group_count,
            seed,
            key_mode: KeyMode::PerGroup,
        })
    }

    pub fn with_delta(mut self, delta: Block) -> Result<Self> {
        self.delta = InputDifference::new(self.cipher, delta)?;
        Ok(self)
    }

    pub fn with_omega(mut self, omega: u16) -> Result<Self> {
        self.layout = TensorLayout::new(self.cipher.block_bits(), self.layout.group_size(), omega)?;
        Ok(self)
    }

    pub fn with_key_mode(mut self, mode: KeyMode) -> Self {
        self.key_mode = mode;
        self
    }

    /// Recovers the generating spec of a dataset from its header.
    pub fn from_header(header: &DatasetHeader, key_mode: KeyMode) -> Result<Self> {
        Ok(GenSpec::new(
            header.cipher,
            header.rounds as u32,
            GroupSize::new(header.m)?,
            header.group_count,
            header.seed,
        )?
        .with_delta(header.delta)?
        .with_omega(header.omega)?
        .with_key_mode(key_mode))
    }

    pub fn m(&self) -> u16 {
        self.layout.m()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledGroup {
    pub label: u8,
    pub tensor: BitTensor,
}

/// Draws the label and the `m` raw ciphertext pairs of group `index`.
fn draw_group(spec: &GenSpec, index: u64) -> (u8, Vec<(u128, u128)>) {
    let cipher = spec.cipher;
    let block_bits = cipher.block_bits();
    let key_bits = cipher.key_bits();
    let delta = spec.delta.block().value();
    let mut rng = StreamRng::new(spec.seed, Domain::Dataset, index);

    let label = rng.next_bit() as u8;
    let mut keyed = match spec.key_mode {
        KeyMode::PerGroup => Some(KeyedCipher::from_raw_key(cipher, rng.next_bits(key_bits))),
        KeyMode::PerPair => None,
    };
    let pairs = (0..spec.m())
        .map(|_| {
            if spec.key_mode == KeyMode::PerPair {
                keyed = Some(KeyedCipher::from_raw_key(cipher, rng.next_bits(key_bits)));
            }
            let keyed = keyed.as_ref().expect("key drawn");
            let p0 = rng.next_bits(block_bits);
            let p1 = if label == 1 {
                p0 ^ delta
            } else {
                rng.next_bits(block_bits)
            };
            (
                keyed.encrypt_raw(p0, spec.rounds),
                keyed.encrypt_raw(p1, spec.rounds),
            )
        })
        .collect();
    (label, pairs)
}

/// Generates group `index` of `spec`; bit-identical on every call.
pub fn generate_group(spec: &GenSpec, index: u64) -> Result<LabeledGroup> {
    if index >= spec.group_count {
        return Err(Error::Range(format!(
            "group index {index} beyond group count {}",
            spec.group_count
        )));
    }
    Ok(generate_group_unchecked(spec, index))
}

fn generate_group_unchecked(spec: &GenSpec, index: u64) -> LabeledGroup {
    let (label, pairs) = draw_group(spec, index);
    LabeledGroup {
        label,
        tensor: arrange_raw(&pairs, &spec.layout),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GenSummary {
    pub groups: u64,
    pub positives: u64,
}

impl GenSummary {
    pub fn positive_fraction(&self) -> f64 {
        self.positives as f64 / self.groups as f64
    }
}

/// Streams every group of `spec` into `out` in index order.
///
/// Groups are produced in parallel batches; the bytes written do not depend
/// on `threads`.
pub fn generate_dataset<W: Write + Seek>(
    spec: &GenSpec,
    out: W,
    threads: Option<usize>,
) -> Result<(W, GenSummary)> {
    let header = DatasetHeader::from_spec(spec);
    let mut writer = DatasetWriter::new(out, header)?;
    let workers = Workers::new(threads)?;
    let mut positives = 0u64;
    let mut start = 0u64;
    while start < spec.group_count {
        let end = (start + BATCH_GROUPS).min(spec.group_count);
        let batch: Vec<LabeledGroup> = workers.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| generate_group_unchecked(spec, i))
                .collect()
        });
        for group in &batch {
            positives += group.label as u64;
            writer.write_group(group)?;
        }
        start = end;
    }
    let out = writer.finish()?;
    Ok((
        out,
        GenSummary {
            groups: spec.group_count,
            positives,
        },
    ))
}

pub fn generate_dataset_file(
    spec: &GenSpec,
    path: &Path,
    threads: Option<usize>,
) -> Result<GenSummary> {
    let file = File::create(path)?;
    let (out, summary) = generate_dataset(spec, BufWriter::new(file), threads)?;
    out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    Ok(summary)
}
