//! Scalar abstraction: all numeric code is generic over `Real` (f32 or f64).

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar for every numeric routine in this crate.
///
/// `f64` is the intended production type (the tolerances in [`crate::tol`]
/// assume it); `f32` builds and is useful for memory-bound experiments.
pub trait Real: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {}

impl<T> Real for T where T: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {}

/// Lift an `f64` constant into the working scalar type.
#[inline]
pub fn cast<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("constant not representable in scalar type")
}
