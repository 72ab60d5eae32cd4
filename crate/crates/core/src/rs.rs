//! Shortened Reed-Solomon codes over GF(256).
//!
//! A `[n, k]` code is the `[255, 255 - (n - k)]` narrow-sense code (generator
//! roots `alpha^1 .. alpha^(n-k)`) with its `255 - n` leading information
//! symbols fixed to zero and dropped. Codeword index `i` is the coefficient
//! of `x^i`: parity occupies `0 .. n - k`, the message `n - k .. n`.
//!
//! Decoding: syndromes, Berlekamp-Massey, Chien search over the `n`
//! transmitted positions, Forney error values.

use crate::error::{Error, Result};
use crate::gf256::Gf256;

/// Message length of every outer code in HQC-RMRS.
pub const RS_DIMENSION: usize = 32;

/// Parameters of a shortened `[n_e, k_e, d_e]` Reed-Solomon code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RsCode {
    length: usize,
    dimension: usize,
    generator: Vec<Gf256>,
}

impl RsCode {
    pub fn new(length: usize, dimension: usize) -> Result<Self> {
        if length > 255 || dimension == 0 || dimension >= length {
            return Err(Error::invalid(format!(
                "unsupported Reed-Solomon shape [{length}, {dimension}]"
            )));
        }
        let redundancy = length - dimension;
        // g(x) = prod_{i=1}^{n-k} (x - alpha^i), coefficients low degree first
        let mut g = vec![Gf256::ONE];
        for i in 1..=redundancy {
            let root = Gf256::alpha_pow(i);
            let mut next = vec![Gf256::ZERO; g.len() + 1];
            for (j, &c) in g.iter().enumerate() {
                next[j + 1] += c;
                next[j] += c * root;
            }
            g = next;
        }
        Ok(Self {
            length,
            dimension,
            generator: g,
        })
    }

    /// `[n_e, 32]` code, the shape used by every HQC-RMRS instance.
    pub fn with_length(length: usize) -> Result<Self> {
        Self::new(length, RS_DIMENSION)
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Minimum distance `n - k + 1`.
    pub fn min_distance(&self) -> usize {
        self.length - self.dimension + 1
    }

    /// Correction radius `floor((d - 1) / 2)`.
    pub fn correction_capacity(&self) -> usize {
        (self.min_distance() - 1) / 2
    }

    fn redundancy(&self) -> usize {
        self.length - self.dimension
    }

    /// Generator polynomial, low degree first, monic of degree `n - k`.
    pub fn generator(&self) -> &[Gf256] {
        &self.generator
    }

    /// Systematic encoding; the message appears verbatim at positions `n - k .. n`.
    pub fn encode(&self, message: &[Gf256]) -> Result<Vec<Gf256>> {
        if message.len() != self.dimension {
            return Err(Error::invalid(format!(
                "message has {} symbols, code dimension is {}",
                message.len(),
                self.dimension
            )));
        }
        let r = self.redundancy();
        // remainder of m(x) * x^r modulo g(x), via an LFSR over the message
        let mut parity = vec![Gf256::ZERO; r];
        for &m in message.iter().rev() {
            let feedback = m + parity[r - 1];
            for j in (1..r).rev() {
                parity[j] = parity[j - 1] + feedback * self.generator[j];
            }
            parity[0] = feedback * self.generator[0];
        }
        let mut codeword = parity;
        codeword.extend_from_slice(message);
        Ok(codeword)
    }

    /// Syndromes `S_j = r(alpha^j)` for `j = 1 ..= n - k`.
    fn syndromes(&self, received: &[Gf256]) -> Vec<Gf256> {
        (1..=self.redundancy())
            .map(|j| {
                let x = Gf256::alpha_pow(j);
                received
                    .iter()
                    .rev()
                    .fold(Gf256::ZERO, |acc, &c| acc * x + c)
            })
            .collect()
    }

    /// Bounded-distance decoding.
    ///
    /// Every error pattern of at most [`correction_capacity`](Self::correction_capacity)
    /// symbols is corrected. Heavier patterns either yield
    /// [`Error::DecodeFailure`] or, rarely, a different codeword.
    pub fn decode(&self, received: &[Gf256]) -> Result<Vec<Gf256>> {
        if received.len() != self.length {
            return Err(Error::invalid(format!(
                "received word has {} symbols, code length is {}",
                received.len(),
                self.length
            )));
        }
        let syndromes = self.syndromes(received);
        let message_start = self.redundancy();
        if syndromes.iter().all(|s| s.is_zero()) {
            return Ok(received[message_start..].to_vec());
        }

        let locator = berlekamp_massey(&syndromes);
        let degree = locator.len() - 1;
        if degree > self.correction_capacity() {
            return Err(Error::DecodeFailure);
        }

        // Chien search restricted to the transmitted positions
        let mut positions = Vec::with_capacity(degree);
        for i in 0..self.length {
            let x_inv = Gf256::alpha_pow(255 - i % 255);
            if poly_eval(&locator, x_inv).is_zero() {
                positions.push(i);
            }
        }
        if positions.len() != degree {
            return Err(Error::DecodeFailure);
        }

        // Forney with first root alpha^1: e_i = Omega(X^-1) / Lambda'(X^-1)
        let r = self.redundancy();
        let mut omega = vec![Gf256::ZERO; r];
        for (i, &s) in syndromes.iter().enumerate() {
            for (j, &l) in locator.iter().enumerate() {
                if i + j < r {
                    omega[i + j] += s * l;
                }
            }
        }
        let derivative: Vec<Gf256> = locator
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, &c)| if j % 2 == 1 { c } else { Gf256::ZERO })
            .collect();

        let mut corrected = received.to_vec();
        for &i in &positions {
            let x_inv = Gf256::alpha_pow(255 - i % 255);
            let denom = poly_eval(&derivative, x_inv);
            if denom.is_zero() {
                return Err(Error::DecodeFailure);
            }
            corrected[i] += poly_eval(&omega, x_inv) / denom;
        }
        if self.syndromes(&corrected).iter().any(|s| !s.is_zero()) {
            return Err(Error::DecodeFailure);
        }
        Ok(corrected[message_start..].to_vec())
    }
}

fn poly_eval(poly: &[Gf256], x: Gf256) -> Gf256 {
    poly.iter().rev().fold(Gf256::ZERO, |acc, &c| acc * x + c)
}

/// Error locator `Lambda(x)` (low degree first, `Lambda(0) = 1`) of minimal
/// degree generating the syndrome sequence.
fn berlekamp_massey(syndromes: &[Gf256]) -> Vec<Gf256> {
    let mut lambda = vec![Gf256::ONE];
    let mut prev = vec![Gf256::ONE];
    let mut l = 0usize;
    let mut shift = 1usize;
    let mut prev_discrepancy = Gf256::ONE;

    for k in 0..syndromes.len() {
        let mut d = syndromes[k];
        for i in 1..=l.min(lambda.len() - 1) {
            d += lambda[i] * syndromes[k - i];
        }
        if d.is_zero() {
            shift += 1;
            continue;
        }
        let coef = d / prev_discrepancy;
        let mut next = lambda.clone();
        if next.len() < prev.len() + shift {
            next.resize(prev.len() + shift, Gf256::ZERO);
        }
        for (i, &p) in prev.iter().enumerate() {
            next[i + shift] += coef * p;
        }
        if 2 * l <= k {
            prev = lambda;
            l = k + 1 - l;
            prev_discrepancy = d;
            shift = 1;
        } else {
            shift += 1;
        }
        lambda = next;
    }
    lambda.truncate(l + 1);
    while lambda.len() > 1 && lambda.last().is_some_and(|c| c.is_zero()) {
        lambda.pop();
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{bounded, stream, Domain};
    use rand_core::RngCore;

    fn random_message(rng: &mut impl RngCore) -> Vec<Gf256> {
        (0..RS_DIMENSION)
            .map(|_| Gf256(rng.next_u64() as u8))
            .collect()
    }

    fn corrupt(word: &mut [Gf256], count: usize, rng: &mut impl RngCore) {
        let mut pos: Vec<usize> = (0..word.len()).collect();
        for i in 0..count {
            let j = i + bounded(rng, (pos.len() - i) as u64) as usize;
            pos.swap(i, j);
            let mut e = 0u8;
            while e == 0 {
                e = rng.next_u64() as u8;
            }
            word[pos[i]] += Gf256(e);
        }
    }

    #[test]
    fn shipped_codes_are_mds() {
        for (n, d) in [(80, 49), (76, 45), (78, 47)] {
            let code = RsCode::with_length(n).unwrap();
            assert_eq!(code.min_distance(), d);
            assert_eq!(code.min_distance(), 2 * code.correction_capacity() + 1);
        }
    }

    #[test]
    fn generator_roots() {
        let code = RsCode::with_length(80).unwrap();
        assert_eq!(code.generator().len(), 49);
        for i in 1..=48 {
            assert!(poly_eval(code.generator(), Gf256::alpha_pow(i)).is_zero());
        }
        assert!(!poly_eval(code.generator(), Gf256::alpha_pow(49)).is_zero());
    }

    #[test]
    fn zero_message_and_systematic_form() {
        let code = RsCode::with_length(80).unwrap();
        let zero = code.encode(&[Gf256::ZERO; 32]).unwrap();
        assert!(zero.iter().all(|s| s.is_zero()));

        let mut rng = stream(1, Domain::Message, 0);
        let m = random_message(&mut rng);
        let c = code.encode(&m).unwrap();
        assert_eq!(&c[48..], &m[..]);
        assert_eq!(code.decode(&c).unwrap(), m);
    }

    #[test]
    fn bad_lengths() {
        let code = RsCode::with_length(80).unwrap();
        assert!(matches!(
            code.encode(&[Gf256::ZERO; 31]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            code.decode(&[Gf256::ZERO; 79]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(RsCode::new(256, 32).is_err());
        assert!(RsCode::new(32, 32).is_err());
    }

    #[test]
    fn codewords_differ_in_at_least_d_symbols() {
        let code = RsCode::with_length(80).unwrap();
        let mut rng = stream(2, Domain::Message, 0);
        for _ in 0..200 {
            let a = code.encode(&random_message(&mut rng)).unwrap();
            let mut mb = random_message(&mut rng);
            // also check nearby messages, which are the likeliest to be close
            if rng.next_u64().is_multiple_of(2) {
                mb = a[48..].to_vec();
                mb[(rng.next_u64() % 32) as usize] += Gf256(1);
            }
            let b = code.encode(&mb).unwrap();
            let dist = a.iter().zip(&b).filter(|(x, y)| x != y).count();
            assert!(dist >= 49, "distance {dist}");
        }
    }

    #[test]
    fn corrects_up_to_capacity() {
        let mut rng = stream(3, Domain::Channel, 0);
        for n in [80usize, 76, 78, 40, 33] {
            let code = RsCode::with_length(n).unwrap();
            let t = code.correction_capacity();
            for _ in 0..300 {
                let m = random_message(&mut rng);
                let mut c = code.encode(&m).unwrap();
                let weight = bounded(&mut rng, t as u64 + 1) as usize;
                corrupt(&mut c, weight, &mut rng);
                assert_eq!(code.decode(&c).unwrap(), m, "n={n} weight={weight}");
            }
            // exactly at the radius
            let m = random_message(&mut rng);
            let mut c = code.encode(&m).unwrap();
            corrupt(&mut c, t, &mut rng);
            assert_eq!(code.decode(&c).unwrap(), m);
        }
    }

    #[test]
    fn heavy_errors_never_silently_return_the_sent_message_incorrectly() {
        // beyond the radius, decoding either fails or returns some codeword's message
        let code = RsCode::with_length(80).unwrap();
        let mut rng = stream(4, Domain::Channel, 0);
        let mut failures = 0;
        for _ in 0..200 {
            let m = random_message(&mut rng);
            let mut c = code.encode(&m).unwrap();
            corrupt(&mut c, 30, &mut rng);
            match code.decode(&c) {
                Err(Error::DecodeFailure) => failures += 1,
                Ok(out) => {
                    let re = code.encode(&out).unwrap();
                    let dist = re.iter().zip(&c).filter(|(x, y)| x != y).count();
                    assert!(dist <= code.correction_capacity());
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(failures > 150);
    }
}
