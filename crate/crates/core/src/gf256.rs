//! GF(256) in polynomial basis modulo `x^8 + x^4 + x^3 + x^2 + 1` (0x11D),
//! with primitive element `alpha = 0x02`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign};

/// Field polynomial, including the `x^8` term.
pub const FIELD_POLY: u16 = 0x11D;

const fn build_tables() -> ([u8; 512], [u8; 256]) {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x: u16 = 1;
    let mut i = 0;
    while i < 255 {
        exp[i] = x as u8;
        log[x as usize] = i as u8;
        x <<= 1;
        if x & 0x100 != 0 {
            x ^= FIELD_POLY;
        }
        i += 1;
    }
    // doubled so that exp[a + b] needs no reduction for a, b < 255
    while i < 512 {
        exp[i] = exp[i - 255];
        i += 1;
    }
    (exp, log)
}

const TABLES: ([u8; 512], [u8; 256]) = build_tables();
static EXP: [u8; 512] = TABLES.0;
static LOG: [u8; 256] = TABLES.1;

/// An element of GF(256). The byte is the polynomial representation,
/// bit 0 being the constant term.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf256(pub u8);

impl Gf256 {
    pub const ZERO: Gf256 = Gf256(0);
    pub const ONE: Gf256 = Gf256(1);
    pub const GENERATOR: Gf256 = Gf256(2);

    /// `alpha^e`, for any exponent (reduced modulo 255).
    #[inline]
    pub fn alpha_pow(e: usize) -> Gf256 {
        Gf256(EXP[e % 255])
    }

    /// Discrete logarithm base `alpha`; `None` for zero.
    #[inline]
    pub fn log(self) -> Option<usize> {
        (self.0 != 0).then(|| LOG[self.0 as usize] as usize)
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Multiplicative inverse; panics on zero.
    #[inline]
    pub fn inv(self) -> Gf256 {
        assert!(self.0 != 0, "inverse of zero in GF(256)");
        Gf256(EXP[255 - LOG[self.0 as usize] as usize])
    }

    pub fn pow(self, e: usize) -> Gf256 {
        if e == 0 {
            return Gf256::ONE;
        }
        match self.log() {
            None => Gf256::ZERO,
            Some(l) => Gf256(EXP[(l * e) % 255]),
        }
    }
}

/// Product in GF(256).
#[inline]
pub fn gf_mul(a: Gf256, b: Gf256) -> Gf256 {
    if a.0 == 0 || b.0 == 0 {
        return Gf256::ZERO;
    }
    Gf256(EXP[LOG[a.0 as usize] as usize + LOG[b.0 as usize] as usize])
}

impl Add for Gf256 {
    type Output = Gf256;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf256) -> Gf256 {
        Gf256(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf256 {
    #[inline]
    #[allow(clippy::suspicious_op_assign_impl)]
    fn add_assign(&mut self, rhs: Gf256) {
        self.0 ^= rhs.0;
    }
}

impl Mul for Gf256 {
    type Output = Gf256;
    #[inline]
    fn mul(self, rhs: Gf256) -> Gf256 {
        gf_mul(self, rhs)
    }
}

impl MulAssign for Gf256 {
    #[inline]
    fn mul_assign(&mut self, rhs: Gf256) {
        *self = gf_mul(*self, rhs);
    }
}

impl Div for Gf256 {
    type Output = Gf256;
    #[inline]
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Gf256) -> Gf256 {
        self * rhs.inv()
    }
}

impl fmt::Debug for Gf256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf256({:#04x})", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // carry-less multiply then reduce by long division
    fn slow_mul(a: u8, b: u8) -> u8 {
        let mut prod: u16 = 0;
        for i in 0..8 {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u16) << i;
            }
        }
        for bit in (8..16).rev() {
            if (prod >> bit) & 1 == 1 {
                prod ^= FIELD_POLY << (bit - 8);
            }
        }
        prod as u8
    }

    #[test]
    fn examples() {
        for a in 0..=255u8 {
            assert_eq!(gf_mul(Gf256(a), Gf256::ONE), Gf256(a));
        }
        assert_eq!(gf_mul(Gf256(0x02), Gf256(0x80)), Gf256(0x1D));
    }

    #[test]
    fn table_multiplication_matches_long_division() {
        for a in 0..=255u8 {
            for b in 0..=255u8 {
                assert_eq!(gf_mul(Gf256(a), Gf256(b)).0, slow_mul(a, b));
            }
        }
    }

    #[test]
    fn generator_has_order_255() {
        let mut x = Gf256::ONE;
        for i in 1..=255 {
            x *= Gf256::GENERATOR;
            if i < 255 {
                assert_ne!(x, Gf256::ONE, "premature cycle at {i}");
            }
        }
        assert_eq!(x, Gf256::ONE);
    }

    #[test]
    fn inverses() {
        for a in 1..=255u8 {
            assert_eq!(Gf256(a) * Gf256(a).inv(), Gf256::ONE);
        }
    }

    proptest! {
        #[test]
        fn field_axioms(a: u8, b: u8, c: u8) {
            let (a, b, c) = (Gf256(a), Gf256(b), Gf256(c));
            prop_assert_eq!(a * b, b * a);
            prop_assert_eq!((a * b) * c, a * (b * c));
            prop_assert_eq!(a * (b + c), a * b + a * c);
        }
    }
}
