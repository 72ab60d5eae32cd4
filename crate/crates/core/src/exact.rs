//! Exact nonnegative rationals and their high-precision base-2 logarithms.
//!
//! Fractions are kept unreduced (gcd on multi-megabit operands costs more
//! than it saves); [`ExactProb::reduced`] normalizes on demand.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Fractional bits carried by [`ExactProb::log2`] unless asked otherwise.
pub const LOG2_FRACTION_BITS: u32 = 256;

/// An exact nonnegative rational, used for probabilities and for the
/// union bounds built from them.
///
/// Union bounds can exceed 1 at large channel probabilities; they are kept
/// as computed rather than clamped so that bounds remain comparable.
#[derive(Clone)]
pub struct ExactProb {
    num: BigUint,
    den: BigUint,
}

impl ExactProb {
    pub fn new(num: BigUint, den: BigUint) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::invalid("zero denominator"));
        }
        Ok(Self { num, den })
    }

    pub fn from_ratio(num: u64, den: u64) -> Result<Self> {
        Self::new(BigUint::from(num), BigUint::from(den))
    }

    pub fn zero() -> Self {
        Self {
            num: BigUint::zero(),
            den: BigUint::one(),
        }
    }

    pub fn one() -> Self {
        Self {
            num: BigUint::one(),
            den: BigUint::one(),
        }
    }

    /// Parses a plain decimal such as `0.3196` exactly (`3196/10000`).
    /// Also accepts `a/b`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some((a, b)) = text.split_once('/') {
            let num: BigUint = a
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad numerator in `{text}`")))?;
            let den: BigUint = b
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad denominator in `{text}`")))?;
            return Self::new(num, den);
        }
        let (int, frac) = text.split_once('.').unwrap_or((text, ""));
        let int = if int.is_empty() { "0" } else { int };
        if !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::invalid(format!(
                "not a nonnegative decimal: `{text}`"
            )));
        }
        let digits = format!("{int}{frac}");
        let num: BigUint = digits
            .parse()
            .map_err(|_| Error::invalid(format!("bad decimal `{text}`")))?;
        let den = BigUint::from(10u32).pow(frac.len() as u32);
        Self::new(num, den)
    }

    /// Like [`parse`](Self::parse) but also requires the value to lie in `[0, 1]`.
    pub fn parse_probability(text: &str) -> Result<Self> {
        let p = Self::parse(text)?;
        if !p.is_probability() {
            return Err(Error::invalid(format!("`{text}` is not in [0, 1]")));
        }
        Ok(p)
    }

    pub fn numer(&self) -> &BigUint {
        &self.num
    }

    pub fn denom(&self) -> &BigUint {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_probability(&self) -> bool {
        self.num <= self.den
    }

    /// Lowest terms.
    pub fn reduced(&self) -> Self {
        let g = self.num.gcd(&self.den);
        if g.is_one() || g.is_zero() {
            return self.clone();
        }
        Self {
            num: &self.num / &g,
            den: &self.den / &g,
        }
    }

    /// `1 - p`; requires `p <= 1`.
    pub fn complement(&self) -> Self {
        assert!(self.is_probability(), "complement of a value above 1");
        Self {
            num: &self.den - &self.num,
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            num: &self.num * &other.num,
            den: &self.den * &other.den,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.den == other.den {
            return Self {
                num: &self.num + &other.num,
                den: self.den.clone(),
            };
        }
        Self {
            num: &self.num * &other.den + &other.num * &self.den,
            den: &self.den * &other.den,
        }
    }

    pub fn scale(&self, num: u64, den: u64) -> Self {
        Self {
            num: &self.num * BigUint::from(num),
            den: &self.den * BigUint::from(den),
        }
    }

    /// Smallest multiple of `2^-bits` that is `>= self`.
    pub fn round_up(&self, bits: u32) -> Self {
        let shifted = &self.num << bits as usize;
        let (q, r) = shifted.div_rem(&self.den);
        let num = if r.is_zero() { q } else { q + 1u32 };
        Self {
            num,
            den: BigUint::one() << bits as usize,
        }
    }

    /// Nearest `f64`; tiny values underflow to zero, use [`log2`](Self::log2) instead.
    pub fn to_f64(&self) -> f64 {
        if self.num.is_zero() {
            return 0.0;
        }
        let shift = self.den.bits() as i64 - self.num.bits() as i64 + 64;
        let q = if shift >= 0 {
            (&self.num << shift as usize) / &self.den
        } else {
            &self.num / (&self.den << (-shift) as usize)
        };
        q.to_f64().unwrap_or(f64::INFINITY) * (-(shift as f64)).exp2()
    }

    /// `log2(self)` with [`LOG2_FRACTION_BITS`] fractional bits.
    pub fn log2(&self) -> Log2Value {
        self.log2_with(LOG2_FRACTION_BITS)
    }

    /// `log2(self)` truncated to `frac_bits` fractional bits.
    pub fn log2_with(&self, frac_bits: u32) -> Log2Value {
        if self.num.is_zero() {
            return Log2Value {
                fixed: None,
                frac_bits,
            };
        }
        Log2Value {
            fixed: Some(log2_fixed(&self.num, &self.den, frac_bits)),
            frac_bits,
        }
    }

    /// Decimal digits of the lowest-terms numerator and denominator.
    pub fn to_fraction_strings(&self) -> (String, String) {
        let r = self.reduced();
        (r.num.to_str_radix(10), r.den.to_str_radix(10))
    }
}

impl PartialEq for ExactProb {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ExactProb {}

impl PartialOrd for ExactProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExactProb {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl fmt::Debug for ExactProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.bits() < 128 && self.den.bits() < 128 {
            let r = self.reduced();
            write!(f, "ExactProb({}/{})", r.num, r.den)
        } else {
            write!(
                f,
                "ExactProb(~{:e}, {}-bit/{}-bit)",
                self.to_f64(),
                self.num.bits(),
                self.den.bits()
            )
        }
    }
}

/// Fixed-point `log2(num/den) * 2^frac_bits`, truncated toward minus infinity
/// up to a working-precision error far below one unit.
fn log2_fixed(num: &BigUint, den: &BigUint, frac_bits: u32) -> BigInt {
    let work = frac_bits as usize + 64;
    let mut exponent = num.bits() as i64 - den.bits() as i64;
    let mantissa = |e: i64| -> BigUint {
        if e >= 0 {
            (num << work) / (den << e as usize)
        } else {
            (num << (work + (-e) as usize)) / den
        }
    };
    let one = BigUint::one() << work;
    let two = BigUint::one() << (work + 1);
    let mut m = mantissa(exponent);
    if m < one {
        exponent -= 1;
        m = mantissa(exponent);
    }
    debug_assert!(m >= one && m < two);

    let mut result = BigInt::from(exponent) << frac_bits as usize;
    let mut frac = BigUint::zero();
    for i in 1..=frac_bits {
        m = (&m * &m) >> work;
        if m >= two {
            m >>= 1;
            frac.set_bit((frac_bits - i) as u64, true);
        }
    }
    result += BigInt::from(frac);
    result
}

/// A base-2 logarithm held as a fixed-point number.
#[derive(Clone, PartialEq, Eq)]
pub struct Log2Value {
    /// `None` encodes `log2(0) = -inf`.
    fixed: Option<BigInt>,
    frac_bits: u32,
}

impl Log2Value {
    pub fn is_neg_infinity(&self) -> bool {
        self.fixed.is_none()
    }

    pub fn to_f64(&self) -> f64 {
        match &self.fixed {
            None => f64::NEG_INFINITY,
            Some(v) => {
                let shift = v.bits() as i64 - 60;
                if shift > 0 {
                    let top = (v >> shift as usize).to_f64().unwrap_or(0.0);
                    top * ((shift - self.frac_bits as i64) as f64).exp2()
                } else {
                    v.to_f64().unwrap_or(0.0) * (-(self.frac_bits as f64)).exp2()
                }
            }
        }
    }

    /// Decimal rendering rounded half-to-even at `decimals` places.
    pub fn round_decimal(&self, decimals: u32) -> String {
        let Some(v) = &self.fixed else {
            return "-inf".to_string();
        };
        let scaled = v * BigInt::from(10u32).pow(decimals);
        let unit = BigInt::one() << self.frac_bits as usize;
        let (mut q, r) = scaled.div_mod_floor(&unit);
        let twice = &r * 2u32;
        match twice.cmp(&unit) {
            Ordering::Greater => q += 1,
            Ordering::Equal if q.is_odd() => q += 1,
            _ => {}
        }
        let negative = q.sign() == Sign::Minus;
        let digits = q.magnitude().to_str_radix(10);
        let d = decimals as usize;
        let padded = format!("{digits:0>width$}", width = d + 1);
        let (int, frac) = padded.split_at(padded.len() - d);
        let sign = if negative { "-" } else { "" };
        if d == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }

    /// True iff the value is strictly below the integer `bound`.
    pub fn lt_integer(&self, bound: i64) -> bool {
        match &self.fixed {
            None => true,
            Some(v) => *v < (BigInt::from(bound) << self.frac_bits as usize),
        }
    }
}

impl fmt::Debug for Log2Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Log2Value({})", self.round_decimal(6))
    }
}

impl fmt::Display for Log2Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.round_decimal(f.precision().unwrap_or(2) as u32))
    }
}

impl Serialize for Log2Value {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.to_f64())
    }
}

thread_local! {
    static BINOMIALS: RefCell<HashMap<(u64, u64), BigUint>> = RefCell::new(HashMap::new());
}

/// `C(n, k)` by multiplicative running product, memoized per thread.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    if k == 0 {
        return BigUint::one();
    }
    if let Some(v) = BINOMIALS.with(|m| m.borrow().get(&(n, k)).cloned()) {
        return v;
    }
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc *= n - k + i;
        acc /= i;
    }
    BINOMIALS.with(|m| m.borrow_mut().insert((n, k), acc.clone()));
    acc
}

/// Row `C(n, 0) ..= C(n, n)`.
pub fn binomial_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for j in 0..n {
        c = c * (n - j) / (j + 1);
        row.push(c.clone());
    }
    row
}

/// Powers `base^0 ..= base^max`.
pub(crate) fn powers(base: &BigUint, max: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = BigUint::one();
    out.push(acc.clone());
    for _ in 0..max {
        acc *= base;
        out.push(acc.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_decimals_exactly() {
        let p = ExactProb::parse("0.3196").unwrap();
        assert_eq!(p, ExactProb::from_ratio(3196, 10000).unwrap());
        assert_eq!(p.to_fraction_strings(), ("799".into(), "2500".into()));
        assert_eq!(
            ExactProb::parse("3/4").unwrap(),
            ExactProb::from_ratio(75, 100).unwrap()
        );
        assert_eq!(
            ExactProb::parse(".5").unwrap(),
            ExactProb::from_ratio(1, 2).unwrap()
        );
        assert!(ExactProb::parse("-0.1").is_err());
        assert!(ExactProb::parse("abc").is_err());
        assert!(ExactProb::parse_probability("1.5").is_err());
        assert!(ExactProb::parse("1/0").is_err());
    }

    #[test]
    fn arithmetic_and_ordering() {
        let a = ExactProb::from_ratio(1, 3).unwrap();
        let b = ExactProb::from_ratio(1, 6).unwrap();
        assert_eq!(a.add(&b), ExactProb::from_ratio(1, 2).unwrap());
        assert_eq!(a.mul(&b), ExactProb::from_ratio(1, 18).unwrap());
        assert_eq!(a.complement(), ExactProb::from_ratio(2, 3).unwrap());
        assert!(b < a);
        let up = a.round_up(10);
        assert!(up >= a);
        assert!(up < a.add(&ExactProb::from_ratio(1, 1024).unwrap()));
    }

    #[test]
    fn log2_values() {
        let half = ExactProb::from_ratio(1, 2).unwrap();
        assert_eq!(half.log2().round_decimal(4), "-1.0000");
        assert_eq!(ExactProb::one().log2().round_decimal(2), "0.00");
        assert!(ExactProb::zero().log2().is_neg_infinity());
        let third = ExactProb::from_ratio(1, 3).unwrap();
        assert!((third.log2().to_f64() - (1.0f64 / 3.0).log2()).abs() < 1e-14);
        let big = ExactProb::from_ratio(1000, 7).unwrap();
        assert!((big.log2().to_f64() - (1000.0f64 / 7.0).log2()).abs() < 1e-12);
        // 2^-300 survives where f64 would not
        let tiny = ExactProb::new(BigUint::one(), BigUint::one() << 1300usize).unwrap();
        assert_eq!(tiny.log2().round_decimal(3), "-1300.000");
        assert!(tiny.log2().lt_integer(-1299));
        assert!(!tiny.log2().lt_integer(-1300));
    }

    #[test]
    fn log2_precision_against_known_constant() {
        // log2(3) = 1.5849625007211561814537389439478165087598144076924810604557526545...
        let three = ExactProb::from_ratio(3, 1).unwrap();
        assert_eq!(
            three.log2().round_decimal(60),
            "1.584962500721156181453738943947816508759814407692481060455753"
        );
    }

    #[test]
    fn half_even_rounding() {
        // 2.5 and 3.5 at zero decimals, -0.125 at two decimals
        let v = |num: u64, den: u64| ExactProb::from_ratio(num, den).unwrap();
        let exact = |x: i64, bits: u32| Log2Value {
            fixed: Some(BigInt::from(x) << (bits as usize)),
            frac_bits: bits + 3,
        };
        assert_eq!(exact(20, 0).round_decimal(0), "2");
        assert_eq!(exact(28, 0).round_decimal(0), "4");
        assert_eq!(exact(-1, 0).round_decimal(2), "-0.12");
        assert_eq!(v(8, 1).log2().round_decimal(1), "3.0");
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigUint::from(10u32));
        assert_eq!(binomial(5, 7), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
        let row = binomial_row(10);
        for (k, c) in row.iter().enumerate() {
            assert_eq!(c, &binomial(10, k as u64));
        }
        let total: BigUint = binomial_row(64).iter().sum();
        assert_eq!(total, BigUint::one() << 64usize);
    }
}
