//! Distribution of the decryption error `e' = x*r2 + r1*y + e`.
//!
//! Each coordinate of a product of two independent uniform fixed-weight
//! vectors is Bernoulli(`p~`), with `p~` obtained by counting the support
//! pairs that meet an odd number of times. Adding the independent products
//! and `e` gives the per-coordinate parameter `p*`. The weight of `e'` is
//! then modeled as Binomial(`n`, `p*`).

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{binomial, binomial_row, powers, ExactProb, Log2Value};
use crate::params::ErrorProfile;

/// `P(z_k = 1)` for `z = x*r`, `x` uniform of weight `w`, `r` uniform of weight `w_r`.
///
/// `sum_{l odd} C(n, l) C(n-l, w-l) C(n-w, w_r-l) / (C(n, w) C(n, w_r))`.
pub fn p_tilde(n: u64, w: u64, w_r: u64) -> Result<ExactProb> {
    if n == 0 || w > n || w_r > n {
        return Err(Error::invalid(format!(
            "weights ({w}, {w_r}) must not exceed n = {n}"
        )));
    }
    let mut total = BigUint::zero();
    for l in (1..=w.min(w_r)).step_by(2) {
        total += binomial(n, l) * binomial(n - l, w - l) * binomial(n - w, w_r - l);
    }
    ExactProb::new(total, binomial(n, w) * binomial(n, w_r))
}

/// `P(e'_k = 1) = 2p~(1-p~)(1 - w_e/n) + ((1-p~)^2 + p~^2) w_e/n`.
pub fn p_star(n: u64, w: u64, w_r: u64, w_e: u64) -> Result<ExactProb> {
    if w_e > n {
        return Err(Error::invalid(format!("w_e = {w_e} exceeds n = {n}")));
    }
    let pt = p_tilde(n, w, w_r)?;
    Ok(combine_with_noise(&pt, n, w_e))
}

/// Bernoulli parameter of `t_k = (x*r2)_k + (r1*y)_k`: `2p~(1-p~)`.
pub fn sum_of_products(pt: &ExactProb) -> ExactProb {
    pt.mul(&pt.complement()).scale(2, 1)
}

fn combine_with_noise(pt: &ExactProb, n: u64, w_e: u64) -> ExactProb {
    let t = sum_of_products(pt);
    let q = ExactProb::from_ratio(w_e, n).expect("n > 0");
    t.mul(&q.complement()).add(&t.complement().mul(&q))
}

/// `p*` for an error profile.
pub fn profile_p_star(profile: &ErrorProfile) -> Result<ExactProb> {
    p_star(
        profile.n as u64,
        profile.w as u64,
        profile.w_r as u64,
        profile.w_e as u64,
    )
}

/// Exact binomial mass `C(len, d) p^d (1-p)^(len-d)`.
///
/// The denominator is `den(p)^len`; keep `len` modest when `p` has a large
/// denominator, or use [`BinomialTail`].
pub fn weight_pmf(length: u64, p: &ExactProb, d: u64) -> Result<ExactProb> {
    if !p.is_probability() {
        return Err(Error::invalid("p must lie in [0, 1]"));
    }
    if d > length {
        return Ok(ExactProb::zero());
    }
    let a = p.numer();
    let b = p.denom();
    let c = b - a;
    let num = binomial(length, d) * a.pow(d as u32) * c.pow((length - d) as u32);
    ExactProb::new(num, b.pow(length as u32))
}

/// Every mass of Binomial(`len`, `p`) as exact rationals over the common
/// denominator `den(p)^len`. Meant for small lengths.
pub fn weight_pmf_all(length: u64, p: &ExactProb) -> Result<Vec<ExactProb>> {
    if !p.is_probability() {
        return Err(Error::invalid("p must lie in [0, 1]"));
    }
    let a = p.numer();
    let b = p.denom();
    let c = b - a;
    let row = binomial_row(length);
    let pa = powers(a, length as usize);
    let pc = powers(&c, length as usize);
    let den = b.pow(length as u32);
    Ok((0..=length as usize)
        .map(|d| {
            ExactProb::new(&row[d] * &pa[d] * &pc[length as usize - d], den.clone())
                .expect("den > 0")
        })
        .collect())
}

/// Binomial(`len`, `p`) masses in fixed point relative to the mode.
///
/// Mass `d` is held as `round_down(2^bits * P(d) / P(mode))`, built by the
/// exact ratio `P(d+1)/P(d) = (len-d) p / ((d+1)(1-p))` with truncation
/// after each step. Tail probabilities are ratios of these integers, so the
/// relative error is about `len * 2^-bits` and the huge denominators of an
/// exact `p*` never appear in a power.
#[derive(Clone, Debug)]
pub struct BinomialTail {
    length: u64,
    masses: Vec<BigUint>,
    /// `suffix[t] = sum_{d >= t} masses[d]`, with `suffix[len + 1] = 0`.
    suffix: Vec<BigUint>,
}

/// Fixed-point precision of [`BinomialTail`].
pub const TAIL_PRECISION_BITS: u32 = 384;

impl BinomialTail {
    pub fn new(length: u64, p: &ExactProb) -> Result<Self> {
        Self::with_precision(length, p, TAIL_PRECISION_BITS)
    }

    pub fn with_precision(length: u64, p: &ExactProb, bits: u32) -> Result<Self> {
        if !p.is_probability() {
            return Err(Error::invalid("p must lie in [0, 1]"));
        }
        let len = length as usize;
        let a = p.numer().clone();
        let b = p.denom().clone();
        let c = &b - &a;
        let mut masses = vec![BigUint::zero(); len + 1];
        if a.is_zero() {
            masses[0] = BigUint::from(1u32) << bits as usize;
        } else if c.is_zero() {
            masses[len] = BigUint::from(1u32) << bits as usize;
        } else {
            // mode = floor((len + 1) p)
            let mode = ((BigUint::from(length + 1) * &a) / &b)
                .try_into()
                .map(|m: u64| m.min(length) as usize)
                .unwrap_or(len);
            masses[mode] = BigUint::from(1u32) << bits as usize;
            for d in mode..len {
                let next = &masses[d] * BigUint::from(length - d as u64) * &a
                    / (BigUint::from(d as u64 + 1) * &c);
                if next.is_zero() {
                    break;
                }
                masses[d + 1] = next;
            }
            for d in (1..=mode).rev() {
                let prev = &masses[d] * BigUint::from(d as u64) * &c
                    / (BigUint::from(length - d as u64 + 1) * &a);
                if prev.is_zero() {
                    break;
                }
                masses[d - 1] = prev;
            }
        }
        let mut suffix = vec![BigUint::zero(); len + 2];
        for d in (0..=len).rev() {
            suffix[d] = &suffix[d + 1] + &masses[d];
        }
        Ok(Self {
            length,
            masses,
            suffix,
        })
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    fn total(&self) -> &BigUint {
        &self.suffix[0]
    }

    /// `P(W = d)`.
    pub fn pmf(&self, d: u64) -> ExactProb {
        if d > self.length {
            return ExactProb::zero();
        }
        ExactProb::new(self.masses[d as usize].clone(), self.total().clone()).expect("total > 0")
    }

    /// `P(W > t)`.
    pub fn upper_tail(&self, t: u64) -> ExactProb {
        if t >= self.length {
            return ExactProb::zero();
        }
        ExactProb::new(self.suffix[t as usize + 1].clone(), self.total().clone())
            .expect("total > 0")
    }

    /// Smallest `t` with `P(W > t) <= tail_mass`.
    pub fn quantile(&self, tail_mass: &ExactProb) -> u64 {
        let total = self.total();
        // suffix is nonincreasing, so binary search for the first passing t
        let passes = |t: u64| -> bool {
            let tail = &self.suffix[t as usize + 1];
            tail * tail_mass.denom() <= tail_mass.numer() * total
        };
        let (mut lo, mut hi) = (0u64, self.length);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if passes(mid) {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        lo
    }

    /// Mean in floating point, from the stored masses.
    pub fn mean(&self) -> f64 {
        let total = self.total();
        let mut acc = 0.0;
        for (d, m) in self.masses.iter().enumerate() {
            if !m.is_zero() {
                acc += d as f64
                    * ExactProb::new(m.clone(), total.clone())
                        .expect("total > 0")
                        .to_f64();
            }
        }
        acc
    }
}

/// Tail masses reported by default (0.1%, 0.01%, 0.001%, 0.0001%).
pub const DEFAULT_TAIL_MASSES: [&str; 4] = ["0.001", "0.0001", "0.00001", "0.000001"];

/// One binomial tail quantile.
#[derive(Clone, Debug, Serialize)]
pub struct TailQuantile {
    pub tail_mass: f64,
    /// Smallest weight `t` with `P(W > t) <= tail_mass`.
    pub weight: u64,
    /// `log2 P(W > weight)`.
    pub log2_tail: Log2Value,
}

/// A rational rendered for JSON.
#[derive(Clone, Debug, Serialize)]
pub struct FractionJson {
    pub numerator: String,
    pub denominator: String,
    pub value: f64,
    pub log2: Log2Value,
}

impl From<&ExactProb> for FractionJson {
    fn from(p: &ExactProb) -> Self {
        let (numerator, denominator) = p.to_fraction_strings();
        Self {
            numerator,
            denominator,
            value: p.to_f64(),
            log2: p.log2(),
        }
    }
}

/// Analytic summary for one error profile.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorModelReport {
    pub n: usize,
    pub w: usize,
    pub w_r: usize,
    pub w_e: usize,
    pub code_length: usize,
    pub p_tilde: FractionJson,
    pub p_star: FractionJson,
    pub binomial_mean: f64,
    pub log2_tails: Vec<TailQuantile>,
}

pub fn error_model_report(
    profile: &ErrorProfile,
    tail_masses: &[ExactProb],
) -> Result<ErrorModelReport> {
    profile.validate()?;
    let pt = p_tilde(profile.n as u64, profile.w as u64, profile.w_r as u64)?;
    let ps = combine_with_noise(&pt, profile.n as u64, profile.w_e as u64);
    let tail = BinomialTail::new(profile.code_length as u64, &ps)?;
    let log2_tails = tail_masses
        .iter()
        .map(|q| {
            let weight = tail.quantile(q);
            TailQuantile {
                tail_mass: q.to_f64(),
                weight,
                log2_tail: tail.upper_tail(weight).log2(),
            }
        })
        .collect();
    Ok(ErrorModelReport {
        n: profile.n,
        w: profile.w,
        w_r: profile.w_r,
        w_e: profile.w_e,
        code_length: profile.code_length,
        p_tilde: FractionJson::from(&pt),
        p_star: FractionJson::from(&ps),
        binomial_mean: profile.code_length as f64 * ps.to_f64(),
        log2_tails,
    })
}

pub fn default_tail_masses() -> Vec<ExactProb> {
    DEFAULT_TAIL_MASSES
        .iter()
        .map(|s| ExactProb::parse(s).expect("static decimal"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Counts `(x, r)` support pairs with `(x*r)_0 = 1` over all choices.
    fn enumerate_p_tilde(n: usize, w: usize, w_r: usize) -> ExactProb {
        let subsets = |k: usize| -> Vec<u32> {
            (0u32..1 << n)
                .filter(|m| m.count_ones() as usize == k)
                .collect()
        };
        let xs = subsets(w);
        let rs = subsets(w_r);
        let mut hits = 0u64;
        for &x in &xs {
            for &r in &rs {
                let mut z0 = 0;
                for i in 0..n {
                    if (x >> i) & 1 == 1 && (r >> ((n - i) % n)) & 1 == 1 {
                        z0 ^= 1;
                    }
                }
                hits += z0;
            }
        }
        ExactProb::from_ratio(hits, (xs.len() * rs.len()) as u64).unwrap()
    }

    #[test]
    fn p_tilde_examples() {
        for n in [3u64, 10, 101] {
            assert_eq!(
                p_tilde(n, 1, 1).unwrap(),
                ExactProb::from_ratio(1, n).unwrap()
            );
        }
        assert_eq!(
            p_tilde(3, 2, 2).unwrap(),
            ExactProb::from_ratio(2, 3).unwrap()
        );
        assert!(p_tilde(5, 6, 1).is_err());
    }

    #[test]
    fn p_tilde_matches_enumeration_small() {
        for n in 1..=6usize {
            for w in 0..=n {
                for w_r in 0..=n {
                    assert_eq!(
                        p_tilde(n as u64, w as u64, w_r as u64).unwrap(),
                        enumerate_p_tilde(n, w, w_r),
                        "n={n} w={w} w_r={w_r}"
                    );
                }
            }
        }
    }

    #[test]
    fn p_tilde_is_symmetric() {
        for (n, w, wr) in [(50u64, 3u64, 9u64), (23869, 67, 77), (11, 0, 4)] {
            assert_eq!(p_tilde(n, w, wr).unwrap(), p_tilde(n, wr, w).unwrap());
        }
    }

    #[test]
    fn p_star_degenerate_noise() {
        let pt = p_tilde(101, 5, 7).unwrap();
        let expect = pt.mul(&pt.complement()).scale(2, 1);
        assert_eq!(p_star(101, 5, 7, 0).unwrap(), expect);
    }

    #[test]
    fn p_star_published_values() {
        let round4 = |x: f64| (x * 1e4).round() / 1e4;
        assert_eq!(round4(p_star(23_869, 67, 77, 77).unwrap().to_f64()), 0.2918);
        assert_eq!(round4(p_star(20_533, 67, 77, 77).unwrap().to_f64()), 0.3196);
    }

    #[test]
    fn pmf_sums_to_one_exactly() {
        let p = ExactProb::from_ratio(3196, 10000).unwrap();
        let masses = weight_pmf_all(40, &p).unwrap();
        let total = masses.iter().fold(ExactProb::zero(), |acc, m| acc.add(m));
        assert_eq!(total, ExactProb::one());
        assert_eq!(masses[7], weight_pmf(40, &p, 7).unwrap());
    }

    #[test]
    fn fixed_point_tail_matches_exact_tail() {
        let p = ExactProb::from_ratio(2918, 10000).unwrap();
        let len = 300u64;
        let exact = weight_pmf_all(len, &p).unwrap();
        let tail = BinomialTail::new(len, &p).unwrap();
        for t in [50u64, 87, 110, 130, 160] {
            let want = exact[t as usize + 1..]
                .iter()
                .fold(ExactProb::zero(), |a, m| a.add(m));
            let got = tail.upper_tail(t);
            let rel = (got.to_f64() - want.to_f64()).abs() / want.to_f64();
            assert!(rel < 1e-60 || want.to_f64() == 0.0, "t={t} rel={rel}");
        }
        // the quantile agrees with a linear scan over exact tails
        for q in ["0.01", "0.001", "0.0001"] {
            let q = ExactProb::parse(q).unwrap();
            let mut t = 0usize;
            loop {
                let rest = exact[t + 1..]
                    .iter()
                    .fold(ExactProb::zero(), |a, m| a.add(m));
                if rest <= q {
                    break;
                }
                t += 1;
            }
            assert_eq!(tail.quantile(&q), t as u64);
        }
    }

    #[test]
    fn degenerate_tails() {
        let zero = BinomialTail::new(10, &ExactProb::zero()).unwrap();
        assert_eq!(zero.quantile(&ExactProb::parse("0.001").unwrap()), 0);
        let one = BinomialTail::new(10, &ExactProb::one()).unwrap();
        assert_eq!(one.quantile(&ExactProb::parse("0.001").unwrap()), 10);
        assert_eq!(one.pmf(10), ExactProb::one());
    }

    #[test]
    fn quantiles_nondecreasing_in_p() {
        let q = ExactProb::parse("0.001").unwrap();
        let mut last = 0;
        for k in 1..20u64 {
            let p = ExactProb::from_ratio(k, 40).unwrap();
            let t = BinomialTail::new(2000, &p).unwrap().quantile(&q);
            assert!(t >= last);
            last = t;
        }
    }
}
