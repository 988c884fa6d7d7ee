//! Coefficient rings for series and matrix arithmetic.
//!
//! Everything downstream (truncated series, jet groups, connection
//! matrices) is generic over a [`Ring`]. Two rings are provided: the
//! rationals [`QRing`] and the localized rational-function ring of a
//! chart (see [`crate::curve::ChartRing`]).

use std::fmt;

use num::{BigRational, One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("element `{elem}` is not a unit of {ring}")]
    NotAUnit { ring: String, elem: String },
    #[error("division by zero in {ring}")]
    DivisionByZero { ring: String },
}

/// A commutative ring with exact arithmetic, a decidable unit test and
/// division by units.
///
/// `exact_div` is division in the ambient fraction field; it is a
/// computational device for linear algebra and may succeed on non-units
/// (the result then need not lie in the ring). `inv` is the
/// ring-theoretic inverse and fails on non-units.
pub trait Ring: Clone + PartialEq + fmt::Debug {
    type Elem: Clone + PartialEq + fmt::Debug;

    /// Human-readable ring name, used in error messages.
    fn name(&self) -> String;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_unit(&self, a: &Self::Elem) -> bool;

    /// Inverse of a unit.
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, RingError>;

    /// Division in the ambient fraction field. `None` iff `b` is zero.
    fn exact_div(&self, a: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem>;

    /// Embedding of the base field ℚ.
    fn from_rational(&self, q: &BigRational) -> Self::Elem;

    fn from_i64(&self, n: i64) -> Self::Elem {
        self.from_rational(&BigRational::from_integer(n.into()))
    }

    /// Integer power of a unit (negative exponents invert).
    fn unit_pow(&self, a: &Self::Elem, k: i64) -> Result<Self::Elem, RingError> {
        let base = if k < 0 { self.inv(a)? } else { a.clone() };
        let mut acc = self.one();
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(&acc, &base);
        }
        Ok(acc)
    }

    /// Canonical textual rendering of an element.
    fn display(&self, a: &Self::Elem) -> String;

    /// Signed rendering used by the series pretty-printer: `(negated,
    /// magnitude, atomic)`. Atomic elements can prefix `·z^k` without
    /// parentheses.
    fn display_signed(&self, a: &Self::Elem) -> (bool, String, bool);
}

/// The field of rational numbers with arbitrary-precision arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QRing;

impl Ring for QRing {
    type Elem = BigRational;

    fn name(&self) -> String {
        "Q".to_string()
    }

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }

    fn one(&self) -> BigRational {
        BigRational::one()
    }

    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }

    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }

    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }

    fn is_unit(&self, a: &BigRational) -> bool {
        !a.is_zero()
    }

    fn inv(&self, a: &BigRational) -> Result<BigRational, RingError> {
        if a.is_zero() {
            return Err(RingError::NotAUnit {
                ring: self.name(),
                elem: "0".to_string(),
            });
        }
        Ok(a.recip())
    }

    fn exact_div(&self, a: &BigRational, b: &BigRational) -> Option<BigRational> {
        if b.is_zero() {
            None
        } else {
            Some(a / b)
        }
    }

    fn from_rational(&self, q: &BigRational) -> BigRational {
        q.clone()
    }

    fn display(&self, a: &BigRational) -> String {
        a.to_string()
    }

    fn display_signed(&self, a: &BigRational) -> (bool, String, bool) {
        (a.is_negative(), a.abs().to_string(), true)
    }
}
