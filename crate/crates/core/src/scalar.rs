use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating point scalar used by every model, solver and verifier: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts a literal. Panics only if the value cannot be represented at all.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).expect("integer representable in scalar type")
    }

    /// Tolerance for probability vectors summing to one.
    fn prob_tol() -> Self;

    /// Absolute tolerance for comparing support endpoints.
    fn endpoint_tol() -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn prob_tol() -> Self {
        1e-12
    }

    #[inline]
    fn endpoint_tol() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    #[inline]
    fn prob_tol() -> Self {
        1e-5
    }

    #[inline]
    fn endpoint_tol() -> Self {
        1e-4
    }
}
