//! Floating-point scalar abstraction shared by every numeric kernel.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

/// A real scalar the evaluators, dense kernels and Newton solver run over.
///
/// Symbolic expressions store their literals as `f64`; evaluation converts
/// them with [`Scalar::lit`]. `f32` works everywhere, but the identity suites
/// are calibrated for `f64` rounding.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
}
