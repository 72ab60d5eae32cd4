//! Seeded, domain-separated random streams.
//!
//! Every random value in the crate is drawn from ChaCha20 (`rand_chacha`).
//! A stream is identified by `(seed, domain, index)`:
//!
//! * the 256-bit ChaCha key is `seed (u64 LE) || domain tag (u64 LE) || b"HQC-RMRS" || 0u64`,
//! * the ChaCha stream id is `index`.
//!
//! Keys, ciphertext randomness and decoder tie-breaking therefore use disjoint
//! streams, and the simulator derives trial `i` from stream index `i`, which
//! makes every result independent of how trials are scheduled across workers.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// Generator used everywhere in the crate.
pub type StreamRng = ChaCha20Rng;

/// Domain tags separating the independent uses of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Domain {
    /// The public random element `h`.
    PublicElement = 1,
    /// The secret supports `x`, `y`.
    SecretKey = 2,
    /// Encryption randomness `r1`, `r2`, `e`.
    Encryption = 3,
    /// Tie-breaking inside the maximum-likelihood inner decoder.
    Decoding = 4,
    /// Random plaintexts and codewords drawn by tests and simulations.
    Message = 5,
    /// Channel noise in Monte Carlo trials.
    Channel = 6,
    /// Error-vector sampling for the weight experiments.
    ErrorVector = 7,
}

const KEY_TAG: &[u8; 8] = b"HQC-RMRS";

/// Returns the generator for stream `(seed, domain, index)`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    key[16..24].copy_from_slice(KEY_TAG);
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// A uniform integer in `[0, bound)` from exactly one 64-bit word.
///
/// Uses the high half of the 128-bit product; the bias is at most `bound / 2^64`.
#[inline]
pub fn bounded(rng: &mut impl RngCore, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    ((rng.next_u64() as u128 * bound as u128) >> 64) as u64
}

/// Converts a probability to the 64-bit fixed-point threshold used by
/// [`bernoulli_word`]: the result is `floor(p * 2^64)`, saturated at `u64::MAX`.
pub fn probability_threshold(p: f64) -> u64 {
    if p <= 0.0 {
        0
    } else if p >= 1.0 {
        u64::MAX
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

/// Sixty-four independent Bernoulli(`threshold / 2^64`) bits.
///
/// Each lane compares a uniform 64-bit value with `threshold`, most
/// significant bit first, consuming one random word per bit position until
/// every lane is decided. On average this costs about seven words for 64
/// output bits instead of one word per bit.
pub fn bernoulli_word(rng: &mut impl RngCore, threshold: u64) -> u64 {
    if threshold == 0 {
        return 0;
    }
    let mut undecided = u64::MAX;
    let mut ones = 0u64;
    for bit in (0..64).rev() {
        let r = rng.next_u64();
        if (threshold >> bit) & 1 == 1 {
            // lanes whose uniform bit is 0 fall below the threshold
            ones |= undecided & !r;
            undecided &= r;
        } else {
            undecided &= !r;
        }
        if undecided == 0 {
            break;
        }
    }
    ones
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_separated() {
        let a: Vec<u64> = (0..4)
            .map({
                let mut r = stream(7, Domain::SecretKey, 3);
                move |_| r.next_u64()
            })
            .collect();
        let b: Vec<u64> = (0..4)
            .map({
                let mut r = stream(7, Domain::SecretKey, 3);
                move |_| r.next_u64()
            })
            .collect();
        assert_eq!(a, b);
        let mut other = stream(7, Domain::Encryption, 3);
        assert_ne!(a[0], other.next_u64());
        let mut other = stream(7, Domain::SecretKey, 4);
        assert_ne!(a[0], other.next_u64());
    }

    #[test]
    fn bounded_stays_in_range() {
        let mut rng = stream(1, Domain::Message, 0);
        for bound in [1u64, 2, 3, 7, 1000, 23869] {
            for _ in 0..1000 {
                assert!(bounded(&mut rng, bound) < bound);
            }
        }
    }

    #[test]
    fn bernoulli_word_edges_and_mean() {
        let mut rng = stream(2, Domain::Channel, 0);
        assert_eq!(bernoulli_word(&mut rng, 0), 0);
        assert!(bernoulli_word(&mut rng, u64::MAX).count_ones() >= 63);

        let p = 0.3196;
        let t = probability_threshold(p);
        let words = 20_000;
        let ones: u64 = (0..words)
            .map(|_| bernoulli_word(&mut rng, t).count_ones() as u64)
            .sum();
        let total = (words * 64) as f64;
        let se = (p * (1.0 - p) / total).sqrt();
        assert!((ones as f64 / total - p).abs() < 5.0 * se);
    }
}
