//! Scalar abstraction for the generic numerical core.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::Debug;

/// Floating-point scalar usable by the generic kernels (quadrature,
/// determinants, Skorokhod projection).
pub trait Real: Float + FromPrimitive + FloatConst + Debug + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    /// Conversion from a small count.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }
}

impl<T> Real for T where T: Float + FromPrimitive + FloatConst + Debug + Send + Sync + 'static {}
