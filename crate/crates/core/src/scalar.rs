//! Scalar abstraction: every numerical routine in this crate is generic over
//! the floating-point type through [`Scalar`].

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar type (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + 'static
{
    /// Conversion from an `f64` constant.
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 constant")
    }

    /// Conversion to `f64` for reporting and serialization.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for `T::from_f64_lossy` used for numeric literals in generic code.
#[inline]
pub(crate) fn sc<T: Scalar>(value: f64) -> T {
    T::from_f64_lossy(value)
}
