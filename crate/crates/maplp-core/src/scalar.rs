//! Arithmetic abstraction shared by every numeric routine in this crate.
//!
//! All algorithms are generic over [`Scalar`], with two implementations:
//! arbitrary-precision rationals ([`Rat`]) for exact computation, and `f64`
//! for fast approximate runs. Exactness-sensitive code branches on
//! [`Scalar::EXACT`]; the float-mode tolerances live in [`tol`] so that every
//! cutoff used anywhere in the crate is pinned in one place.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational scalar.
pub type Rat = num_rational::BigRational;

/// Float-mode tolerances. Rational mode ignores all of these.
pub mod tol {
    /// Feasibility/pivot tolerance of the simplex solver.
    pub const LP_FEAS: f64 = 1e-9;
    /// Relative tolerance on the zero-sum test of a delta-distribution:
    /// `|sum q| <= DELTA_SUM_REL * (1 + sum |q|)`.
    pub const DELTA_SUM_REL: f64 = 1e-9;
    /// Absolute tolerance on L1-mass saturation: `|sum|q| - 2| <= DELTA_SATURATION_ABS`.
    pub const DELTA_SATURATION_ABS: f64 = 1e-7;
    /// Relative positivity cutoff of the greedy decoder: a marginal entry
    /// counts as supported when it exceeds `DECODE_MASS_REL * max |table|`.
    pub const DECODE_MASS_REL: f64 = 1e-7;
    /// Generic relative tolerance for consistency checks on float tables.
    pub const CONSISTENCY_REL: f64 = 1e-9;
    /// Agreement required between rational and float LP optima.
    pub const MODE_AGREE: f64 = 1e-6;
}

/// Numeric type usable throughout the library.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// True when arithmetic is exact (no rounding anywhere).
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(v: i64) -> Self;
    /// Conversion from an exact rational (the parse-time representation).
    fn from_rat(r: &Rat) -> Self;
    /// Nearest representable value to a float; only used for tolerance
    /// thresholds, never for data.
    fn from_f64_approx(v: f64) -> Self;
    fn to_f64(&self) -> f64;

    fn is_zero(&self) -> bool;
    fn is_positive(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn abs(&self) -> Self;

    // Borrowed-operand arithmetic for hot loops; avoids cloning big integers.
    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn div_ref(&self, rhs: &Self) -> Self;
    /// `self - a * b` in one call.
    fn sub_mul_ref(&self, a: &Self, b: &Self) -> Self {
        self.sub_ref(&a.mul_ref(b))
    }
    fn add_assign_ref(&mut self, rhs: &Self) {
        *self = self.add_ref(rhs);
    }

    /// Exact reciprocal; caller guarantees the value is nonzero.
    fn recip(&self) -> Self {
        Self::one().div_ref(self)
    }

    /// Exact rational view of the value (binary-exact for floats).
    fn to_rat(&self) -> Rat;

    /// Canonical text rendering: exact for rationals, shortest round-trip
    /// for floats.
    fn render(&self) -> String {
        self.to_string()
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_int(v: i64) -> Self {
        Rat::from_integer(BigInt::from(v))
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn from_f64_approx(v: f64) -> Self {
        Rat::from_float(v).unwrap_or_else(Zero::zero)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_positive(&self) -> bool {
        Signed::is_positive(self)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div_ref(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn to_rat(&self) -> Rat {
        self.clone()
    }
    fn render(&self) -> String {
        crate::formats::render_number(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_rat(r: &Rat) -> Self {
        Scalar::to_f64(r)
    }
    fn from_f64_approx(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn is_positive(&self) -> bool {
        *self > 0.0
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div_ref(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn to_rat(&self) -> Rat {
        Rat::from_float(*self).unwrap_or_else(Zero::zero)
    }
}

/// `base^exp` as a checked integer power; the exponent is a site count so
/// overflow means a table far past any configured cap.
pub fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    base.checked_pow(u32::try_from(exp).ok()?)
}

/// `L^exp` as a scalar (used for the normalizing denominators of margins).
pub fn scalar_pow<T: Scalar>(base: usize, exp: usize) -> T {
    let mut acc = T::one();
    let b = T::from_int(base as i64);
    for _ in 0..exp {
        acc = acc.mul_ref(&b);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic_is_exact() {
        let third: Rat = Rat::from_int(1).div_ref(&Rat::from_int(3));
        let one = third.mul_ref(&Rat::from_int(3));
        assert_eq!(one, <Rat as Scalar>::one());
    }

    #[test]
    fn pow_helpers() {
        assert_eq!(checked_pow(2, 10), Some(1024));
        assert_eq!(checked_pow(3, 0), Some(1));
        assert_eq!(scalar_pow::<f64>(2, 5), 32.0);
        assert_eq!(scalar_pow::<Rat>(3, 3), Rat::from_int(27));
    }
}
