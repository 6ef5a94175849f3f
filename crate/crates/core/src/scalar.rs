//! Scalar abstraction: the whole library is generic over the float type.

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by every kernel in this crate.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Converts an `f64` literal (tolerances, weights) into the working scalar.
#[inline]
pub(crate) fn real<F: Scalar>(x: f64) -> F {
    F::from_f64(x).expect("f64 literal must convert to the scalar type")
}

/// Converts a count into the working scalar.
#[inline]
pub(crate) fn real_usize<F: Scalar>(x: usize) -> F {
    real(x as f64)
}
