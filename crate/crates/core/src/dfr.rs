//! Upper bounds on the decryption failure rate.
//!
//! * inner code, simple union bound over the 255 nonzero RM codewords;
//! * inner code, improved bound crediting the coin flip between two
//!   equidistant codewords;
//! * outer code, binomial tail of inner failures beyond `delta_e`.
//!
//! All values are exact rationals. [`end_to_end_dfr`] feeds the exact `p*` of
//! a parameter set through both stages; to keep operand sizes manageable it
//! encloses `p*` between two neighbouring multiples of `2^-bits` and bounds
//! each `p^i (1-p)^j` term from above, then rounds the inner bound up before
//! the outer stage. Every rounding is upward, so the result is still an
//! upper bound on the exact composition.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::error_model::{profile_p_star, FractionJson};
use crate::exact::{binomial, binomial_row, powers, ExactProb, Log2Value};
use crate::params::HqcParams;

/// Number of nonzero codewords of the inner code.
const NONZERO_CODEWORDS: u64 = 255;

/// Which inner-code bound to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerBound {
    Simple,
    Improved,
}

impl std::str::FromStr for InnerBound {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(InnerBound::Simple),
            "improved" => Ok(InnerBound::Improved),
            _ => Err(Error::invalid(format!(
                "unknown bound `{s}` (simple|improved)"
            ))),
        }
    }
}

/// Channel probability as `p = p_num/den`, with `q_num/den` standing in for `1 - p`.
///
/// Exact channels have `q_num = den - p_num`. An enclosure uses the upper
/// neighbour for `p` and the complement of the lower neighbour for `1 - p`.
struct Channel {
    p_num: BigUint,
    q_num: BigUint,
    den: BigUint,
}

impl Channel {
    fn exact(p: &ExactProb) -> Result<Self> {
        if !p.is_probability() {
            return Err(Error::invalid("channel probability must lie in [0, 1]"));
        }
        Ok(Self {
            p_num: p.numer().clone(),
            q_num: p.denom() - p.numer(),
            den: p.denom().clone(),
        })
    }

    fn enclosing(p: &ExactProb, bits: u32) -> Result<Self> {
        if !p.is_probability() {
            return Err(Error::invalid("channel probability must lie in [0, 1]"));
        }
        let up = p.round_up(bits);
        let den = up.denom().clone();
        let mut down = up.numer().clone();
        if up != *p {
            down -= 1u32;
        }
        Ok(Self {
            p_num: up.numer().clone(),
            q_num: &den - down,
            den,
        })
    }
}

fn check_distance(d_i: u64) -> Result<()> {
    if d_i == 0 || !d_i.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "inner distance must be even and positive, got {d_i}"
        )));
    }
    Ok(())
}

fn simple_bound(ch: &Channel, d: u64) -> ExactProb {
    let row = binomial_row(d);
    let pp = powers(&ch.p_num, d as usize);
    let pq = powers(&ch.q_num, d as usize);
    let mut num = BigUint::zero();
    for j in (d / 2)..=d {
        let j = j as usize;
        num += &row[j] * &pp[j] * &pq[d as usize - j];
    }
    num *= NONZERO_CODEWORDS;
    ExactProb::new(num, ch.den.pow(d as u32)).expect("den > 0")
}

fn improved_bound(ch: &Channel, d: u64) -> ExactProb {
    let h = d / 2;
    let (du, hu) = (d as usize, h as usize);
    let row = binomial_row(d);
    let half_row = binomial_row(h);
    let pp = powers(&ch.p_num, du);
    let pq = powers(&ch.q_num, du + hu);
    let den_h = ch.den.pow(h as u32);

    // everything over 2 * den^(d + h)
    let mut num = BigUint::zero();

    // ties with a single nearest nonzero codeword: 1/2 * 255 * C(d, h) p^h (1-p)^h
    num += BigUint::from(NONZERO_CODEWORDS) * &row[hu] * &pp[hu] * &pq[hu] * &den_h;

    // strictly closer nonzero codeword: 255 * sum_{j > h} C(d, j) p^j (1-p)^(d-j)
    let mut closer = BigUint::zero();
    for j in hu + 1..=du {
        closer += &row[j] * &pp[j] * &pq[du - j];
    }
    num += closer * BigUint::from(2 * NONZERO_CODEWORDS) * &den_h;

    // several tied codewords: 1/2 * C(255, 2) * sum_j C(h, j)^3 p^(d-j) (1-p)^(h+j)
    let mut pairs = BigUint::zero();
    for j in 0..=hu {
        let c = &half_row[j];
        pairs += c * c * c * &pp[du - j] * &pq[hu + j];
    }
    num += pairs * binomial(NONZERO_CODEWORDS, 2);

    let den = ch.den.pow((d + h) as u32) * 2u32;
    ExactProb::new(num, den).expect("den > 0")
}

/// Union bound on the ML decoding failure of the duplicated RM code with
/// minimum distance `d_i` over BSC(`p`):
/// `255 * sum_{j = d_i/2}^{d_i} C(d_i, j) p^j (1-p)^(d_i-j)`.
pub fn rm_dfr_simple(p: &ExactProb, d_i: u64) -> Result<ExactProb> {
    check_distance(d_i)?;
    Ok(simple_bound(&Channel::exact(p)?, d_i))
}

/// Improved bound on the same failure probability:
///
/// ```text
///   1/2 * 255 * C(d, d/2) p^(d/2) (1-p)^(d/2)
/// +       255 * sum_{j > d/2} C(d, j) p^j (1-p)^(d-j)
/// + 1/2 * C(255, 2) * sum_{j=0}^{d/2} C(d/2, j)^3 p^(d-j) (1-p)^(d/2+j)
/// ```
pub fn rm_dfr_improved(p: &ExactProb, d_i: u64) -> Result<ExactProb> {
    check_distance(d_i)?;
    Ok(improved_bound(&Channel::exact(p)?, d_i))
}

pub fn rm_dfr(p: &ExactProb, d_i: u64, bound: InnerBound) -> Result<ExactProb> {
    match bound {
        InnerBound::Simple => rm_dfr_simple(p, d_i),
        InnerBound::Improved => rm_dfr_improved(p, d_i),
    }
}

/// Outer-code failure bound `sum_{l = delta_e + 1}^{n_e} C(n_e, l) p_i^l (1 - p_i)^(n_e - l)`.
///
/// An inner bound above 1 is replaced by 1, which keeps the result an upper bound.
pub fn concat_dfr(n_e: u64, delta_e: u64, p_i: &ExactProb) -> Result<ExactProb> {
    if delta_e >= n_e {
        return Err(Error::invalid(format!(
            "delta_e = {delta_e} must be below n_e = {n_e}"
        )));
    }
    let p = if p_i.is_probability() {
        p_i.clone()
    } else {
        ExactProb::one()
    };
    let a = p.numer();
    let c = p.denom() - a;
    let row = binomial_row(n_e);
    let pa = powers(a, n_e as usize);
    let pc = powers(&c, n_e as usize);
    let mut num = BigUint::zero();
    for l in (delta_e + 1) as usize..=n_e as usize {
        num += &row[l] * &pa[l] * &pc[n_e as usize - l];
    }
    ExactProb::new(num, p.denom().pow(n_e as u32))
}

/// Default dyadic precision for [`end_to_end_dfr`].
pub const END_TO_END_PRECISION_BITS: u32 = 512;

/// Pipeline values for one parameter set.
#[derive(Clone, Debug)]
pub struct EndToEnd {
    pub bound: InnerBound,
    pub p_star: ExactProb,
    /// Inner failure bound (upper bound on the exact-`p*` value).
    pub p_i: ExactProb,
    pub dfr: ExactProb,
}

/// `p*` of `params` through the chosen inner bound and the outer binomial tail.
pub fn end_to_end_dfr(params: &HqcParams, bound: InnerBound) -> Result<EndToEnd> {
    end_to_end_dfr_with(params, bound, END_TO_END_PRECISION_BITS)
}

pub fn end_to_end_dfr_with(params: &HqcParams, bound: InnerBound, bits: u32) -> Result<EndToEnd> {
    params.validate()?;
    let p_star = profile_p_star(&params.error_profile())?;
    let d_i = params.inner.min_distance() as u64;
    let channel = Channel::enclosing(&p_star, bits)?;
    let inner = match bound {
        InnerBound::Simple => simple_bound(&channel, d_i),
        InnerBound::Improved => improved_bound(&channel, d_i),
    };
    let p_i = inner.round_up(bits);
    let dfr = concat_dfr(params.outer.length() as u64, params.delta() as u64, &p_i)?;
    Ok(EndToEnd {
        bound,
        p_star,
        p_i,
        dfr,
    })
}

/// JSON report of the analytic pipeline.
#[derive(Clone, Debug, Serialize)]
pub struct DfrReport {
    pub params_id: String,
    pub bound: InnerBound,
    pub p_star: FractionJson,
    pub p_i_simple: Log2Value,
    pub p_i_improved: Log2Value,
    pub dfr_log2: Log2Value,
    pub dfr_log2_rounded: String,
    pub target_log2: i64,
    pub meets_target: bool,
}

pub fn dfr_report(params: &HqcParams, bound: InnerBound, decimals: u32) -> Result<DfrReport> {
    let simple = end_to_end_dfr(params, InnerBound::Simple)?;
    let improved = end_to_end_dfr(params, InnerBound::Improved)?;
    let chosen = match bound {
        InnerBound::Simple => &simple,
        InnerBound::Improved => &improved,
    };
    let dfr_log2 = chosen.dfr.log2();
    let target = -(params.security_bits as i64);
    Ok(DfrReport {
        params_id: params.name.clone(),
        bound,
        p_star: FractionJson::from(&chosen.p_star),
        p_i_simple: simple.p_i.log2(),
        p_i_improved: improved.p_i.log2(),
        dfr_log2_rounded: dfr_log2.round_decimal(decimals),
        meets_target: dfr_log2.lt_integer(target),
        dfr_log2,
        target_log2: target,
    })
}
