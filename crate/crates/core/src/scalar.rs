//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point type the algorithms are generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + LinalgScalar
    + ScalarOperand
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every literal used in the crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Tolerance used for orthonormality checks on `n x k` bases.
    fn orthonormal_tol(n: usize) -> Self {
        let floor = Self::lit(1e-8);
        let scaled = Self::epsilon() * Self::lit(100.0 * (n.max(1) as f64));
        floor.max(scaled)
    }

    /// Relative threshold under which an eigenvalue counts as numerically zero.
    fn rank_tol() -> Self {
        Self::lit(1e-10).max(Self::epsilon() * Self::lit(1000.0))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
