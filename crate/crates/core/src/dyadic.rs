//! Exact rationals whose denominator is a power of two.
//!
//! Bisecting angles only ever halves and adds, so every coefficient that
//! appears in an [`AngleForm`](crate::symbolic::AngleForm) lives in this ring.
//! Values are kept canonical (odd numerator, or zero over `2^0`) so that
//! derived `Eq` and `Hash` agree with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigInt,
    log2_denominator: u32,
}

impl DyadicRational {
    pub fn new(numerator: impl Into<BigInt>, log2_denominator: u32) -> Self {
        let mut value = Self {
            numerator: numerator.into(),
            log2_denominator,
        };
        value.canonicalize();
        value
    }

    pub fn zero() -> Self {
        Self {
            numerator: BigInt::zero(),
            log2_denominator: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        Self::new(value, 0)
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn log2_denominator(&self) -> u32 {
        self.log2_denominator
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.numerator.is_negative()
    }

    /// `self / 2`, exact.
    pub fn halve(&self) -> Self {
        Self::new(self.numerator.clone(), self.log2_denominator + 1)
    }

    pub fn mul_integer(&self, factor: &BigInt) -> Self {
        Self::new(&self.numerator * factor, self.log2_denominator)
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            self.numerator.clone(),
            BigInt::one() << self.log2_denominator,
        )
    }

    pub fn to_f64(&self) -> f64 {
        if let Some(n) = self.numerator.to_i64() {
            if n.unsigned_abs() < (1u64 << 53) && self.log2_denominator < 1000 {
                return n as f64 / 2f64.powi(self.log2_denominator as i32);
            }
        }
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }

    fn canonicalize(&mut self) {
        if self.numerator.is_zero() {
            self.log2_denominator = 0;
            return;
        }
        let twos = self.numerator.trailing_zeros().unwrap_or(0);
        let shift = twos.min(u64::from(self.log2_denominator));
        if shift > 0 {
            self.numerator >>= shift;
            self.log2_denominator -= shift as u32;
        }
    }

    /// Numerators of `self` and `other` over the common denominator `2^max(k1, k2)`.
    fn aligned(&self, other: &Self) -> (BigInt, BigInt, u32) {
        let exp = self.log2_denominator.max(other.log2_denominator);
        let lhs = &self.numerator << (exp - self.log2_denominator);
        let rhs = &other.numerator << (exp - other.log2_denominator);
        (lhs, rhs, exp)
    }
}

impl Default for DyadicRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl Add for &DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: &DyadicRational) -> DyadicRational {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        let (lhs, rhs, exp) = self.aligned(rhs);
        DyadicRational::new(lhs + rhs, exp)
    }
}

impl Add for DyadicRational {
    type Output = DyadicRational;

    fn add(self, rhs: DyadicRational) -> DyadicRational {
        &self + &rhs
    }
}

impl Sub for &DyadicRational {
    type Output = DyadicRational;

    fn sub(self, rhs: &DyadicRational) -> DyadicRational {
        let (lhs, rhs, exp) = self.aligned(rhs);
        DyadicRational::new(lhs - rhs, exp)
    }
}

impl Sub for DyadicRational {
    type Output = DyadicRational;

    fn sub(self, rhs: DyadicRational) -> DyadicRational {
        &self - &rhs
    }
}

impl Neg for DyadicRational {
    type Output = DyadicRational;

    fn neg(self) -> DyadicRational {
        DyadicRational {
            numerator: -self.numerator,
            log2_denominator: self.log2_denominator,
        }
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.log2_denominator == other.log2_denominator {
            return self.numerator.cmp(&other.numerator);
        }
        let (lhs, rhs, _) = self.aligned(other);
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.log2_denominator == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, BigInt::one() << self.log2_denominator)
        }
    }
}
