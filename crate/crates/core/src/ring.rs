//! Arithmetic in `F2[X]/(X^n - 1)`.
//!
//! Elements are packed little-endian, 64 coefficients per word, with the
//! unused high bits of the last word kept at zero. Products always have at
//! least one sparse operand in this crate, so multiplication is the
//! schoolbook sparse form: one cyclic shift-and-XOR per nonzero coefficient
//! of the sparse side.

use std::fmt;

use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::rng::bounded;

const WORD_BITS: usize = 64;

#[inline]
fn word_count(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

/// A binary vector of length `n`, read as a polynomial of degree `< n`.
///
/// Coefficient `i` is the coefficient of `X^i`. The same type carries
/// codewords and received words of the error-correcting codes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RingElement {
    len: usize,
    words: Vec<u64>,
}

impl RingElement {
    pub fn zero(len: usize) -> Self {
        Self {
            len,
            words: vec![0; word_count(len)],
        }
    }

    /// The constant polynomial 1.
    pub fn one(len: usize) -> Self {
        let mut r = Self::zero(len);
        if len > 0 {
            r.set(0, true);
        }
        r
    }

    /// All-ones vector of length `len`.
    pub fn ones(len: usize) -> Self {
        let mut r = Self {
            len,
            words: vec![u64::MAX; word_count(len)],
        };
        r.clear_slack();
        r
    }

    /// Builds an element from the positions of its nonzero coefficients.
    /// Repeated positions cancel, as they would in a sum over `F2`.
    pub fn from_support(len: usize, support: &[usize]) -> Result<Self> {
        let mut r = Self::zero(len);
        for &i in support {
            if i >= len {
                return Err(Error::invalid(format!(
                    "index {i} out of range for length {len}"
                )));
            }
            r.flip(i);
        }
        Ok(r)
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut r = Self::zero(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                r.set(i, true);
            }
        }
        r
    }

    /// Wraps packed words; bits at positions `>= len` must be zero.
    pub fn from_words(len: usize, words: Vec<u64>) -> Result<Self> {
        if words.len() != word_count(len) {
            return Err(Error::invalid(format!(
                "expected {} words for length {len}, got {}",
                word_count(len),
                words.len()
            )));
        }
        let r = Self { len, words };
        let mut check = r.clone();
        check.clear_slack();
        if check.words != r.words {
            return Err(Error::invalid("nonzero bits beyond the vector length"));
        }
        Ok(r)
    }

    /// Uniformly random element, drawing `ceil(len / 64)` words.
    pub fn random(len: usize, rng: &mut impl RngCore) -> Self {
        let mut r = Self {
            len,
            words: (0..word_count(len)).map(|_| rng.next_u64()).collect(),
        };
        r.clear_slack();
        r
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Weight of the first `k` coordinates.
    pub fn prefix_weight(&self, k: usize) -> usize {
        let k = k.min(self.len);
        let full = k / WORD_BITS;
        let mut total: usize = self.words[..full]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum();
        let rest = k % WORD_BITS;
        if rest > 0 {
            total += (self.words[full] & ((1u64 << rest) - 1)).count_ones() as usize;
        }
        total
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Positions of the nonzero coefficients, increasing.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        for (wi, &word) in self.words.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * WORD_BITS + b);
                w &= w - 1;
            }
        }
        out
    }

    /// The first `k` coordinates as a vector of length `k`.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        if k > self.len {
            return Err(Error::invalid(format!(
                "cannot truncate length {} to {k}",
                self.len
            )));
        }
        let mut r = Self {
            len: k,
            words: self.words[..word_count(k)].to_vec(),
        };
        r.clear_slack();
        Ok(r)
    }

    /// Copy of `self` zero-extended to length `len`.
    pub fn extended(&self, len: usize) -> Result<Self> {
        if len < self.len {
            return Err(Error::invalid(format!(
                "cannot extend length {} to {len}",
                self.len
            )));
        }
        let mut words = self.words.clone();
        words.resize(word_count(len), 0);
        Ok(Self { len, words })
    }

    /// Coordinates `start .. start + len` as a new vector.
    pub fn slice(&self, start: usize, len: usize) -> Self {
        assert!(start + len <= self.len, "slice out of range");
        let mut r = Self::zero(len);
        let shift = start % WORD_BITS;
        let base = start / WORD_BITS;
        for (j, out) in r.words.iter_mut().enumerate() {
            let lo = self.words.get(base + j).copied().unwrap_or(0);
            let hi = self.words.get(base + j + 1).copied().unwrap_or(0);
            *out = if shift == 0 {
                lo
            } else {
                (lo >> shift) | (hi << (WORD_BITS - shift))
            };
        }
        r.clear_slack();
        r
    }

    /// Writes `src` into coordinates `start .. start + src.len()`.
    pub fn write_slice(&mut self, start: usize, src: &RingElement) {
        assert!(start + src.len <= self.len, "slice out of range");
        for i in 0..src.len {
            self.set(start + i, src.get(i));
        }
    }

    fn clear_slack(&mut self) {
        let rest = self.len % WORD_BITS;
        if rest != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rest) - 1;
            }
        }
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len != other.len {
            return Err(Error::invalid(format!(
                "length mismatch: {} vs {}",
                self.len, other.len
            )));
        }
        Ok(())
    }

    /// Coefficient-wise sum (XOR). Subtraction is the same operation.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut r = self.clone();
        r.add_assign(other)?;
        Ok(r)
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// `self += X^shift * v`, where `v` has been laid out by [`DoubledWords`].
    fn xor_rotated(&mut self, doubled: &DoubledWords, shift: usize) {
        // bit k of X^shift * v is v[(k - shift) mod n] = doubled[k + n - shift]
        let offset = self.len - shift;
        let q = offset / WORD_BITS;
        let r = offset % WORD_BITS;
        let src = &doubled.words;
        if r == 0 {
            for (j, out) in self.words.iter_mut().enumerate() {
                *out ^= src[q + j];
            }
        } else {
            for (j, out) in self.words.iter_mut().enumerate() {
                *out ^= (src[q + j] >> r) | (src[q + j + 1] << (WORD_BITS - r));
            }
        }
        self.clear_slack();
    }

    /// Cyclic product `self * other` in `F2[X]/(X^n - 1)`.
    ///
    /// The operand with the smaller weight is treated as the sparse side.
    pub fn cyclic_mul(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        let (sparse, dense) = if self.weight() <= other.weight() {
            (self, other)
        } else {
            (other, self)
        };
        Ok(mul_support_dense(&sparse.support(), dense))
    }

    /// Cyclic product with a sparse operand.
    pub fn mul_sparse(&self, sparse: &SparseSupport) -> Result<Self> {
        if sparse.len() != self.len {
            return Err(Error::invalid(format!(
                "length mismatch: {} vs {}",
                sparse.len(),
                self.len
            )));
        }
        let idx: Vec<usize> = sparse.iter().collect();
        Ok(mul_support_dense(&idx, self))
    }

    /// Serializes as a 32-bit little-endian length followed by
    /// `ceil(n / 8)` bytes; bit `i` lives at byte `i / 8`, bit position `i % 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + self.len.div_ceil(8));
        out.extend_from_slice(&(self.len as u32).to_le_bytes());
        let nbytes = self.len.div_ceil(8);
        for i in 0..nbytes {
            out.push((self.words[i / 8] >> ((i % 8) * 8)) as u8);
        }
        out
    }

    /// Parses the [`to_bytes`](Self::to_bytes) format. Returns the element and
    /// the number of bytes consumed.
    pub fn from_bytes(bytes: &[u8]) -> Result<(Self, usize)> {
        let header: [u8; 4] = bytes
            .get(..4)
            .ok_or_else(|| Error::Format("truncated vector header".into()))?
            .try_into()
            .expect("length checked");
        let len = u32::from_le_bytes(header) as usize;
        let nbytes = len.div_ceil(8);
        let body = bytes
            .get(4..4 + nbytes)
            .ok_or_else(|| Error::Format(format!("vector of length {len} needs {nbytes} bytes")))?;
        let mut r = Self::zero(len);
        for (i, &b) in body.iter().enumerate() {
            r.words[i / 8] |= (b as u64) << ((i % 8) * 8);
        }
        let raw = r.words.clone();
        r.clear_slack();
        if raw != r.words {
            return Err(Error::Format("nonzero padding bits".into()));
        }
        Ok((r, 4 + nbytes))
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RingElement(n={}, weight={})", self.len, self.weight())
    }
}

/// A vector `v` written twice in a row, so that any cyclic rotation of it is
/// a contiguous bit window.
struct DoubledWords {
    words: Vec<u64>,
}

impl DoubledWords {
    fn new(v: &RingElement) -> Self {
        let n = v.len;
        // one spare word so the shifted reads never go out of bounds
        let mut words = vec![0u64; word_count(2 * n) + 1];
        words[..v.words.len()].copy_from_slice(&v.words);
        let q = n / WORD_BITS;
        let r = n % WORD_BITS;
        for (j, &w) in v.words.iter().enumerate() {
            if r == 0 {
                words[q + j] |= w;
            } else {
                words[q + j] |= w << r;
                words[q + j + 1] |= w >> (WORD_BITS - r);
            }
        }
        Self { words }
    }
}

fn mul_support_dense(support: &[usize], dense: &RingElement) -> RingElement {
    let mut out = RingElement::zero(dense.len);
    if dense.len == 0 || support.is_empty() {
        return out;
    }
    let doubled = DoubledWords::new(dense);
    for &i in support {
        if i == 0 {
            out.add_assign(dense).expect("same length");
        } else {
            out.xor_rotated(&doubled, i);
        }
    }
    out
}

/// Sorted positions of the nonzero coefficients of a fixed-weight vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SparseSupport {
    len: usize,
    indices: Vec<u32>,
}

impl SparseSupport {
    /// Validates and sorts `indices`; duplicates and out-of-range positions are rejected.
    pub fn new(len: usize, mut indices: Vec<u32>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("repeated index in support"));
        }
        if let Some(&last) = indices.last() {
            if last as usize >= len {
                return Err(Error::invalid(format!(
                    "index {last} out of range for length {len}"
                )));
            }
        }
        Ok(Self { len, indices })
    }

    pub fn empty(len: usize) -> Self {
        Self {
            len,
            indices: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn weight(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().map(|&i| i as usize)
    }

    pub fn to_dense(&self) -> RingElement {
        let mut r = RingElement::zero(self.len);
        for i in self.iter() {
            r.set(i, true);
        }
        r
    }

    /// Product of two sparse vectors by index-sum accumulation, `w1 * w2` bit flips.
    pub fn mul_sparse(&self, other: &SparseSupport) -> Result<RingElement> {
        if self.len != other.len {
            return Err(Error::invalid(format!(
                "length mismatch: {} vs {}",
                self.len, other.len
            )));
        }
        let mut out = RingElement::zero(self.len);
        xor_sparse_product(&mut out, self, other);
        Ok(out)
    }
}

/// `acc += a * b` for two sparse operands of the same length as `acc`.
pub fn xor_sparse_product(acc: &mut RingElement, a: &SparseSupport, b: &SparseSupport) {
    let n = acc.len;
    debug_assert!(a.len == n && b.len == n);
    let words = acc.words_mut();
    for &i in &a.indices {
        let i = i as usize;
        for &j in &b.indices {
            let mut k = i + j as usize;
            if k >= n {
                k -= n;
            }
            words[k / WORD_BITS] ^= 1u64 << (k % WORD_BITS);
        }
    }
}

/// Fixed-weight sampler holding a reusable candidate pool.
///
/// Sampling runs `w` steps of a Fisher-Yates shuffle over `0..n`, then undoes
/// the swaps so the pool can be reused. Each sample consumes exactly `w`
/// 64-bit words from the generator.
#[derive(Clone, Debug)]
pub struct FixedWeightSampler {
    pool: Vec<u32>,
    swaps: Vec<u32>,
}

impl FixedWeightSampler {
    pub fn new(n: usize) -> Self {
        Self {
            pool: (0..n as u32).collect(),
            swaps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.pool.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn sample(&mut self, w: usize, rng: &mut impl RngCore) -> Result<SparseSupport> {
        let n = self.pool.len();
        if w > n {
            return Err(Error::invalid(format!("weight {w} exceeds length {n}")));
        }
        self.swaps.clear();
        for i in 0..w {
            let j = i + bounded(rng, (n - i) as u64) as usize;
            self.pool.swap(i, j);
            self.swaps.push(j as u32);
        }
        let mut indices = self.pool[..w].to_vec();
        for i in (0..w).rev() {
            self.pool.swap(i, self.swaps[i] as usize);
        }
        indices.sort_unstable();
        Ok(SparseSupport { len: n, indices })
    }
}

/// Uniformly random support of weight `w` in `0..n`.
pub fn sample_fixed_weight(n: usize, w: usize, rng: &mut impl RngCore) -> Result<SparseSupport> {
    if w > n {
        return Err(Error::invalid(format!("weight {w} exceeds length {n}")));
    }
    FixedWeightSampler::new(n).sample(w, rng)
}

/// Circulant matrix of `v`: column `i` is the coefficient vector of `v * X^i`.
///
/// Returned as rows. Quadratic in `n`; only used to check products in tests.
pub fn rot_matrix(v: &RingElement) -> Vec<RingElement> {
    let n = v.len();
    (0..n)
        .map(|row| {
            let mut r = RingElement::zero(n);
            for col in 0..n {
                if v.get((row + n - col) % n) {
                    r.set(col, true);
                }
            }
            r
        })
        .collect()
}

/// True iff `n` is prime and 2 has multiplicative order `n - 1` modulo `n`,
/// i.e. `(X^n - 1)/(X - 1)` is irreducible over `F2`.
pub fn validate_primitive_prime(n: u64) -> bool {
    if n < 3 || !is_prime(n) {
        return false;
    }
    let order = n - 1;
    prime_factors(order)
        .into_iter()
        .all(|q| pow_mod(2, order / q, n) != 1)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Smallest primitive prime `>= lower`.
pub fn next_primitive_prime(lower: u64) -> u64 {
    let mut n = lower.max(3);
    while !validate_primitive_prime(n) {
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Domain};

    fn naive_mul(u: &RingElement, v: &RingElement) -> RingElement {
        let n = u.len();
        let mut out = RingElement::zero(n);
        for i in 0..n {
            for j in 0..n {
                if u.get(i) && v.get(j) {
                    out.flip((i + j) % n);
                }
            }
        }
        out
    }

    #[test]
    fn identity_and_wraparound() {
        let mut rng = stream(0, Domain::Message, 0);
        let v = RingElement::random(100, &mut rng);
        assert_eq!(RingElement::one(100).cyclic_mul(&v).unwrap(), v);

        let u = RingElement::from_support(5, &[1]).unwrap();
        let v = RingElement::from_support(5, &[4]).unwrap();
        assert_eq!(u.cyclic_mul(&v).unwrap().support(), vec![0]);
    }

    #[test]
    fn small_product_matches_hand_convolution() {
        let u = RingElement::from_support(7, &[0, 1, 3]).unwrap();
        let v = RingElement::from_support(7, &[1, 2]).unwrap();
        assert_eq!(naive_mul(&u, &v).support(), vec![1, 3, 4, 5]);
        assert_eq!(u.cyclic_mul(&v).unwrap().support(), vec![1, 3, 4, 5]);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let u = RingElement::zero(10);
        let v = RingElement::zero(11);
        assert!(matches!(u.cyclic_mul(&v), Err(Error::InvalidArgument(_))));
        assert!(u.add(&v).is_err());
    }

    #[test]
    fn rot_matrix_examples() {
        let id = rot_matrix(&RingElement::one(5));
        for (i, row) in id.iter().enumerate() {
            assert_eq!(row.support(), vec![i]);
        }
        // v = X in length 3
        let rows = rot_matrix(&RingElement::from_support(3, &[1]).unwrap());
        assert_eq!(rows[0].support(), vec![2]);
        assert_eq!(rows[1].support(), vec![0]);
        assert_eq!(rows[2].support(), vec![1]);
    }

    #[test]
    fn rot_matrix_identity_with_product() {
        let mut rng = stream(3, Domain::Message, 0);
        for n in 1..=16 {
            for _ in 0..8 {
                let u = RingElement::random(n, &mut rng);
                let v = RingElement::random(n, &mut rng);
                let m = rot_matrix(&v);
                // (u * rot(v)^T)_k = <u, row k>
                let mut prod = RingElement::zero(n);
                for (k, row) in m.iter().enumerate() {
                    let dot = u.support().iter().filter(|&&i| row.get(i)).count() % 2 == 1;
                    prod.set(k, dot);
                }
                assert_eq!(prod, u.cyclic_mul(&v).unwrap());
            }
        }
    }

    #[test]
    fn sampler_edges() {
        let mut rng = stream(4, Domain::SecretKey, 0);
        assert!(sample_fixed_weight(10, 0, &mut rng).unwrap().is_empty());
        let all = sample_fixed_weight(10, 10, &mut rng).unwrap();
        assert_eq!(all.indices(), &(0..10).collect::<Vec<u32>>()[..]);
        assert!(matches!(
            sample_fixed_weight(10, 11, &mut rng),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sampler_pool_is_restored() {
        let mut s = FixedWeightSampler::new(50);
        let mut rng = stream(5, Domain::SecretKey, 0);
        for _ in 0..20 {
            let sup = s.sample(13, &mut rng).unwrap();
            assert_eq!(sup.weight(), 13);
        }
        assert_eq!(s.pool, (0..50).collect::<Vec<u32>>());
    }

    #[test]
    fn sampler_is_deterministic_and_uses_w_words() {
        let mut a = stream(6, Domain::SecretKey, 0);
        let mut b = stream(6, Domain::SecretKey, 0);
        let x = sample_fixed_weight(1000, 25, &mut a).unwrap();
        assert_eq!(x, sample_fixed_weight(1000, 25, &mut b).unwrap());
        // a fixed-weight draw consumes exactly `w` words
        let mut c = stream(6, Domain::SecretKey, 0);
        for _ in 0..25 {
            c.next_u64();
        }
        assert_eq!(a.next_u64(), c.next_u64());
    }

    #[test]
    fn primitive_primes() {
        assert!(!validate_primitive_prime(4));
        assert!(!validate_primitive_prime(7));
        assert!(validate_primitive_prime(3));
        assert!(validate_primitive_prime(5));
        assert!(validate_primitive_prime(11));
        for n in [20533, 38923, 59957, 23869] {
            assert!(validate_primitive_prime(n), "{n}");
        }
        let p = next_primitive_prime(20480);
        assert!(p >= 20480 && validate_primitive_prime(p));
        assert_eq!(next_primitive_prime(20533), 20533);
    }

    #[test]
    fn serialization_layout() {
        let v = RingElement::from_support(10, &[0, 3, 9]).unwrap();
        let bytes = v.to_bytes();
        assert_eq!(bytes, vec![10, 0, 0, 0, 0b0000_1001, 0b0000_0010]);
        let (back, used) = RingElement::from_bytes(&bytes).unwrap();
        assert_eq!(used, 6);
        assert_eq!(back, v);

        let mut bad = bytes.clone();
        bad[5] |= 0x80;
        assert!(RingElement::from_bytes(&bad).is_err());
        assert!(RingElement::from_bytes(&bytes[..5]).is_err());
    }

    #[test]
    fn slicing() {
        let mut rng = stream(8, Domain::Message, 0);
        let v = RingElement::random(300, &mut rng);
        let s = v.slice(70, 130);
        for i in 0..130 {
            assert_eq!(s.get(i), v.get(70 + i));
        }
        let mut w = RingElement::zero(300);
        w.write_slice(70, &s);
        assert_eq!(w.prefix_weight(300), s.weight());
        assert_eq!(v.truncated(100).unwrap().weight(), v.prefix_weight(100));
    }
}
