//! Duplicated first-order Reed-Muller code RM(1,7).
//!
//! The base code is `[128, 8, 64]`. Message bit 0 multiplies the all-ones
//! row and bits 1..=7 select the linear part `a`, so base coordinate `t`
//! of the codeword is `m0 ^ parity(a & t)`. The duplicated code repeats
//! every base bit `m` times consecutively: base bit `t` occupies positions
//! `m*t .. m*t + m`.
//!
//! Decoding is maximum likelihood through the Walsh-Hadamard transform of
//! the `F` table, the per-coordinate sum of `(-1)^bit` over the copies.

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::ring::RingElement;
use crate::rng::bounded;

pub const BASE_LENGTH: usize = 128;
pub const DIMENSION: usize = 8;

/// Multiplicities used by the shipped parameter sets.
pub const SHIPPED_MULTIPLICITIES: [usize; 3] = [2, 4, 6];

const MAX_MULTIPLICITY: usize = 6;

/// Duplicated RM(1,7): `[128*m, 8, 64*m]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RmCode {
    multiplicity: usize,
}

impl RmCode {
    pub fn new(multiplicity: usize) -> Result<Self> {
        if multiplicity == 0 || multiplicity > MAX_MULTIPLICITY {
            return Err(Error::invalid(format!(
                "Reed-Muller multiplicity must be in 1..={MAX_MULTIPLICITY}, got {multiplicity}"
            )));
        }
        Ok(Self { multiplicity })
    }

    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    pub fn length(&self) -> usize {
        BASE_LENGTH * self.multiplicity
    }

    pub fn dimension(&self) -> usize {
        DIMENSION
    }

    pub fn min_distance(&self) -> usize {
        BASE_LENGTH / 2 * self.multiplicity
    }

    /// Encodes one byte.
    pub fn encode(&self, message: u8) -> RingElement {
        let base = base_codeword(message);
        let mut out = RingElement::zero(self.length());
        let m = self.multiplicity;
        let words = out.words_mut();
        for t in 0..BASE_LENGTH {
            if (base[t / 64] >> (t % 64)) & 1 == 1 {
                for k in m * t..m * t + m {
                    words[k / 64] |= 1u64 << (k % 64);
                }
            }
        }
        out
    }

    /// Maximum-likelihood decoding. Ties between equally close codewords are
    /// broken uniformly at random with `rng`; no randomness is drawn otherwise.
    pub fn decode(&self, received: &RingElement, rng: &mut impl RngCore) -> Result<u8> {
        if received.len() != self.length() {
            return Err(Error::invalid(format!(
                "received word has length {}, code length is {}",
                received.len(),
                self.length()
            )));
        }
        let mut table = build_f_table_unchecked(received.words(), self.multiplicity);
        fht(&mut table);
        Ok(select_message(&table, rng))
    }

    /// Decodes the block at bit offset `start` of a longer word, as used by
    /// the concatenated decoder.
    pub(crate) fn decode_block(
        &self,
        word: &RingElement,
        start: usize,
        rng: &mut impl RngCore,
    ) -> u8 {
        let mut table = [0i32; BASE_LENGTH];
        let m = self.multiplicity;
        let words = word.words();
        let mask = (1u64 << m) - 1;
        for (t, slot) in table.iter_mut().enumerate() {
            let field = read_bits(words, start + m * t) & mask;
            *slot = m as i32 - 2 * field.count_ones() as i32;
        }
        fht(&mut table);
        select_message(&table, rng)
    }
}

const fn build_base_table() -> [[u64; 2]; 256] {
    let mut table = [[0u64; 2]; 256];
    let mut message: usize = 0;
    while message < 256 {
        let constant = (message & 1) as u32;
        let linear = (message >> 1) as u32;
        let mut t = 0u32;
        while t < BASE_LENGTH as u32 {
            let bit = ((linear & t).count_ones() & 1) ^ constant;
            if bit == 1 {
                table[message][(t / 64) as usize] |= 1u64 << (t % 64);
            }
            t += 1;
        }
        message += 1;
    }
    table
}

static BASE_CODEWORDS: [[u64; 2]; 256] = build_base_table();

/// Base RM(1,7) codeword of `message` as two 64-bit words.
#[inline]
fn base_codeword(message: u8) -> [u64; 2] {
    BASE_CODEWORDS[message as usize]
}

/// 64 bits starting at bit `pos` (bits past the end read as zero).
#[inline]
fn read_bits(words: &[u64], pos: usize) -> u64 {
    let q = pos / 64;
    let r = pos % 64;
    let lo = words.get(q).copied().unwrap_or(0) >> r;
    if r == 0 {
        lo
    } else {
        lo | (words.get(q + 1).copied().unwrap_or(0) << (64 - r))
    }
}

fn build_f_table_unchecked(words: &[u64], m: usize) -> [i32; BASE_LENGTH] {
    let mut table = [0i32; BASE_LENGTH];
    let mask = (1u64 << m) - 1;
    for (t, slot) in table.iter_mut().enumerate() {
        let field = read_bits(words, m * t) & mask;
        *slot = m as i32 - 2 * field.count_ones() as i32;
    }
    table
}

/// The `F` table: entry `t` is `sum (-1)^bit` over the copies of base coordinate `t`.
pub fn build_f_table(received: &RingElement) -> Result<Vec<i32>> {
    if received.is_empty() || !received.len().is_multiple_of(BASE_LENGTH) {
        return Err(Error::invalid(format!(
            "received length {} is not a positive multiple of {BASE_LENGTH}",
            received.len()
        )));
    }
    let m = received.len() / BASE_LENGTH;
    if m > MAX_MULTIPLICITY {
        // wider blocks do not fit the single-word read; fall back to bitwise
        return Ok((0..BASE_LENGTH)
            .map(|t| {
                (0..m)
                    .map(|k| if received.get(m * t + k) { -1 } else { 1 })
                    .sum()
            })
            .collect());
    }
    Ok(build_f_table_unchecked(received.words(), m).to_vec())
}

/// In-place Walsh-Hadamard transform of a 128-entry table:
/// `out[x] = sum_t in[t] * (-1)^popcount(x & t)`.
pub fn fht(table: &mut [i32; BASE_LENGTH]) {
    let mut h = 1;
    while h < BASE_LENGTH {
        for block in (0..BASE_LENGTH).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (table[i], table[i + h]);
                table[i] = a + b;
                table[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Picks the message maximizing `|F^(a)|`, with the sign giving the constant bit.
fn select_message(spectrum: &[i32; BASE_LENGTH], rng: &mut impl RngCore) -> u8 {
    let best = spectrum.iter().map(|v| v.abs()).max().unwrap_or(0);
    let mut ties = 0u64;
    let mut first = 0u8;
    for (a, &v) in spectrum.iter().enumerate() {
        if v.abs() == best {
            if ties == 0 {
                first = message_for(a, v);
            }
            ties += if v == 0 { 2 } else { 1 };
        }
    }
    if ties == 1 {
        return first;
    }
    let mut pick = bounded(rng, ties);
    for (a, &v) in spectrum.iter().enumerate() {
        if v.abs() != best {
            continue;
        }
        if v == 0 {
            // both signs are equally close
            if pick < 2 {
                return (a as u8) << 1 | pick as u8;
            }
            pick -= 2;
        } else {
            if pick == 0 {
                return message_for(a, v);
            }
            pick -= 1;
        }
    }
    unreachable!("tie index within count")
}

#[inline]
fn message_for(linear: usize, value: i32) -> u8 {
    ((linear as u8) << 1) | (value < 0) as u8
}
