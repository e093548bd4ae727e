//! Exact arithmetic: rational-function coefficients, Laurent polynomials in
//! the space shifts and polynomials in the time shift.

mod coeff;
mod grid;
mod monomial;
mod param;
mod poly;
mod shift;
mod sparse;

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use coeff::Coeff;
pub use grid::{apply_operator, apply_space_operator, Grid, GridHistory};
pub use monomial::Monomial;
pub use param::Param;
pub use poly::Poly;
pub use shift::{LaurentPoly, OpKey, OperatorPoly, SpaceShift};
pub(crate) use shift::render_terms;
pub use sparse::{Key, Sparse};

/// Commutative ring with unit.
///
/// The methods take references so that big-number backed values are not
/// cloned on every operation. Implementors should not also implement the
/// `std::ops` traits under the same method names in scope of generic code.
pub trait Ring: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn from_int(n: i64) -> Self {
        let mut acc = Self::zero();
        let one = Self::one();
        for _ in 0..n.unsigned_abs() {
            acc = acc.add(&one);
        }
        if n < 0 {
            acc.neg()
        } else {
            acc
        }
    }

    fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// A ring containing the rationals, so that division by nonzero integers is exact.
pub trait QAlgebra: Ring {
    fn scale(&self, factor: &BigRational) -> Self;

    fn div_int(&self, n: i64) -> Self {
        self.scale(&BigRational::new(1.into(), n.into()))
    }
}

/// A field: every nonzero element has an inverse.
pub trait Field: QAlgebra {
    fn inv(&self) -> Option<Self>;
}

impl Ring for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
}

impl QAlgebra for BigRational {
    fn scale(&self, factor: &BigRational) -> Self {
        self * factor
    }
}

impl Field for BigRational {
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
}

impl QAlgebra for f64 {
    fn scale(&self, factor: &BigRational) -> Self {
        self * rational_to_f64(factor)
    }
}

impl Field for f64 {
    fn inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
}

/// Converts an exact rational to the nearest double, tolerating huge
/// numerators and denominators.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Scale both down by the same power of two.
            let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
            let n = (r.numer().abs() >> shift).to_f64().unwrap_or(f64::MAX);
            let d = (r.denom() >> shift).to_f64().unwrap_or(f64::MAX);
            let v = n / d;
            if r.is_negative() {
                -v
            } else {
                v
            }
        }
    }
}

/// Shorthand for an exact rational `n / d`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}
