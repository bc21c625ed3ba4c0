//! Number types the coefficient routines are generic over.
//!
//! Everything public runs in `f64`. The exact instance (`Rational64`) exists
//! so that integer-valued controls can be checked against tabulated values
//! without tolerances.

use num_rational::Rational64;
use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Exact rational used by the integer-arithmetic test paths.
pub type Exact = Rational64;

pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_int(v: i64) -> Self;
    fn to_f64(self) -> f64;

    fn half(self) -> Self {
        self / Self::from_int(2)
    }

    fn quarter(self) -> Self {
        self / Self::from_int(4)
    }
}

impl Scalar for f64 {
    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Scalar for Rational64 {
    fn from_int(v: i64) -> Self {
        Rational64::from_integer(v)
    }

    fn to_f64(self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}
