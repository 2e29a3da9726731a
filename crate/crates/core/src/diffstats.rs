//! Classical differential statistics: exact S-box difference distribution
//! tables and Monte Carlo estimates of r-round transition probabilities.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::ciphers::{des, present, Block, CipherId, KeyedCipher};
use crate::parallel;
use crate::rng::{Domain, StreamRng};
use crate::{Error, Result};

/// Trials per independently seeded chunk. Fixed so results do not depend on
/// how chunks are spread over workers.
const TRIAL_CHUNK: u64 = 1 << 16;

/// An `in_bits → out_bits` lookup table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sbox {
    in_bits: u32,
    out_bits: u32,
    table: Vec<u8>,
}

impl Sbox {
    pub fn new(in_bits: u32, out_bits: u32, table: Vec<u8>) -> Result<Self> {
        if !(1..=8).contains(&in_bits) || !(1..=8).contains(&out_bits) {
            return Err(Error::shape(format!(
                "unsupported S-box {in_bits}x{out_bits}"
            )));
        }
        if table.len() != 1 << in_bits {
            return Err(Error::shape(format!(
                "{in_bits}-bit S-box needs {} entries, got {}",
                1 << in_bits,
                table.len()
            )));
        }
        if let Some(v) = table.iter().find(|&&v| (v as u32) >> out_bits != 0) {
            return Err(Error::shape(format!(
                "entry {v} exceeds {out_bits} output bits"
            )));
        }
        Ok(Sbox {
            in_bits,
            out_bits,
            table,
        })
    }

    pub fn present() -> Self {
        Sbox::new(4, 4, present::SBOX.to_vec()).expect("valid table")
    }

    /// DES S-box `index` (0-based), indexed by its raw 6-bit input.
    pub fn des(index: usize) -> Result<Self> {
        if index >= 8 {
            return Err(Error::Usage(format!(
                "DES has S-boxes 1..8, got {}",
                index + 1
            )));
        }
        Sbox::new(6, 4, (0..64).map(|x| des::sbox(index, x)).collect())
    }

    pub fn in_bits(&self) -> u32 {
        self.in_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn apply(&self, x: usize) -> u8 {
        self.table[x]
    }

    pub fn is_bijective(&self) -> bool {
        if self.in_bits != self.out_bits {
            return false;
        }
        let mut seen = vec![false; self.table.len()];
        self.table
            .iter()
            .all(|&v| !std::mem::replace(&mut seen[v as usize], true))
    }
}

/// Difference distribution table: `count(din, dout)` is the number of `x`
/// with `S(x) ^ S(x ^ din) = dout`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ddt {
    in_bits: u32,
    out_bits: u32,
    counts: Vec<u32>,
}

impl Ddt {
    pub fn rows(&self) -> usize {
        1 << self.in_bits
    }

    pub fn cols(&self) -> usize {
        1 << self.out_bits
    }

    pub fn get(&self, din: usize, dout: usize) -> u32 {
        self.counts[din * self.cols() + dout]
    }

    pub fn row(&self, din: usize) -> &[u32] {
        let c = self.cols();
        &self.counts[din * c..(din + 1) * c]
    }

    /// Transition probability `count / 2^in_bits`.
    pub fn probability(&self, din: usize, dout: usize) -> f64 {
        self.get(din, dout) as f64 / self.rows() as f64
    }

    /// CSV text: header `din,0x0,..`, one row per input difference.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("din");
        for d in 0..self.cols() {
            s.push_str(&format!(",0x{d:x}"));
        }
        s.push('\n');
        for din in 0..self.rows() {
            s.push_str(&format!("0x{din:x}"));
            for c in self.row(din) {
                s.push_str(&format!(",{c}"));
            }
            s.push('\n');
        }
        s
    }
}

pub fn sbox_ddt(sbox: &Sbox) -> Ddt {
    let rows = 1usize << sbox.in_bits;
    let cols = 1usize << sbox.out_bits;
    let mut counts = vec![0u32; rows * cols];
    for din in 0..rows {
        for x in 0..rows {
            let dout = (sbox.apply(x) ^ sbox.apply(x ^ din)) as usize;
            counts[din * cols + dout] += 1;
        }
    }
    Ddt {
        in_bits: sbox.in_bits,
        out_bits: sbox.out_bits,
        counts,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransitionEstimate {
    pub p_hat: f64,
    pub trials: u64,
    pub hits: u64,
    pub std_err: f64,
}

impl TransitionEstimate {
    fn from_counts(hits: u64, trials: u64) -> Self {
        let p_hat = hits as f64 / trials as f64;
        TransitionEstimate {
            p_hat,
            trials,
            hits,
            std_err: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
        }
    }
}

fn check_difference(cipher: CipherId, d: Block) -> Result<()> {
    if d.bits() != cipher.block_bits() {
        return Err(Error::shape(format!(
            "{cipher} differences are {} bits, got {}",
            cipher.block_bits(),
            d.bits()
        )));
    }
    Ok(())
}

/// Calls `f(output_difference)` for every trial in chunk `chunk`.
fn run_chunk(
    cipher: CipherId,
    din: u128,
    rounds: u32,
    trials: u64,
    seed: u64,
    chunk: u64,
    mut f: impl FnMut(u128),
) {
    let start = chunk * TRIAL_CHUNK;
    let n = TRIAL_CHUNK.min(trials - start);
    let mut rng = StreamRng::new(seed, Domain::MonteCarlo, chunk);
    for _ in 0..n {
        let keyed = KeyedCipher::from_raw_key(cipher, rng.next_bits(cipher.key_bits()));
        let p = rng.next_bits(cipher.block_bits());
        f(keyed.encrypt_raw(p, rounds) ^ keyed.encrypt_raw(p ^ din, rounds));
    }
}

fn validate(cipher: CipherId, din: Block, rounds: u32, trials: u64) -> Result<()> {
    check_difference(cipher, din)?;
    cipher.check_rounds(rounds)?;
    if trials == 0 {
        return Err(Error::Usage("at least one trial is required".into()));
    }
    Ok(())
}

/// Estimates `Pr[E(p) ^ E(p ^ din) = dout]` after `rounds` rounds over
/// uniform keys and plaintexts. Deterministic in `(trials, seed)`.
pub fn mc_transition_prob(
    cipher: CipherId,
    din: Block,
    dout: Block,
    rounds: u32,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<TransitionEstimate> {
    validate(cipher, din, rounds, trials)?;
    check_difference(cipher, dout)?;
    let (din, dout) = (din.value(), dout.value());
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let hits = parallel::install(threads, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut hits = 0u64;
                run_chunk(cipher, din, rounds, trials, seed, c, |d| {
                    hits += (d == dout) as u64
                });
                hits
            })
            .sum::<u64>()
    })?;
    Ok(TransitionEstimate::from_counts(hits, trials))
}

/// Empirical top-`top_k` output differences after `rounds` rounds, by count
/// descending and then numeric value ascending.
pub fn rank_output_diffs(
    cipher: CipherId,
    din: Block,
    rounds: u32,
    trials: u64,
    seed: u64,
    top_k: usize,
    threads: Option<usize>,
) -> Result<Vec<(Block, u64)>> {
    validate(cipher, din, rounds, trials)?;
    let d = din.value();
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let counts = parallel::install(threads, || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut counts: HashMap<u128, u64> = HashMap::new();
                run_chunk(cipher, d, rounds, trials, seed, c, |x| {
                    *counts.entry(x).or_default() += 1
                });
                counts
            })
            .reduce(HashMap::new, |mut a, b| {
                if a.len() < b.len() {
                    return merge(b, a);
                }
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            })
    })?;
    let mut ranked: Vec<(u128, u64)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top_k);
    let bits = cipher.block_bits();
    ranked
        .into_iter()
        .map(|(v, n)| Ok((Block::new(v, bits)?, n)))
        .collect()
}

fn merge(mut into: HashMap<u128, u64>, from: HashMap<u128, u64>) -> HashMap<u128, u64> {
    for (k, v) in from {
        *into.entry(k).or_default() += v;
    }
    into
}

/// Exact probability that the DES round function maps input difference
/// `din` to output difference `dout`, as a product of the eight S-box DDT
/// entries reached through E and P⁻¹.
pub fn des_round_function_prob(din: u32, dout: u32) -> f64 {
    let expanded = des::expand(din);
    let sbox_out = des::inverse_p(dout);
    (0..8)
        .map(|i| {
            let ddt = sbox_ddt(&Sbox::des(i).expect("index < 8"));
            let a = ((expanded >> (42 - 6 * i)) & 0x3f) as usize;
            let b = ((sbox_out >> (28 - 4 * i)) & 0xf) as usize;
            ddt.probability(a, b)
        })
        .product()
}

/// Exact one-round DES transition probability for `(L, R)` differences:
/// the new left half must equal the old right half, and `f` must map
/// `ΔR` to `ΔL ^ ΔR'`.
pub fn des_one_round_exact(din: Block, dout: Block) -> Result<f64> {
    check_difference(CipherId::Des, din)?;
    check_difference(CipherId::Des, dout)?;
    let (l, r) = ((din.value() >> 32) as u32, din.value() as u32);
    let (l2, r2) = ((dout.value() >> 32) as u32, dout.value() as u32);
    if l2 != r {
        return Ok(0.0);
    }
    Ok(des_round_function_prob(r, l ^ r2))
}
