//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use rustfft::FftNum;
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar usable by the profiles, closed forms and solvers.
///
/// Implemented for `f32` and `f64`. The tolerances quoted throughout the crate
/// assume `f64`; `f32` is supported for fast low-accuracy exploration.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + FftNum
    + Default
    + Display
    + Debug
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }

    /// `1 - exp(-x)` without cancellation for small `x`.
    #[inline]
    fn one_minus_exp_neg(x: Self) -> Self {
        -(-x).exp_m1()
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_minus_exp_neg_small_argument() {
        let x = 1e-12_f64;
        let v = f64::one_minus_exp_neg(x);
        assert!((v / x - 1.0).abs() < 1e-11);
        assert_eq!(f32::lit(0.5), 0.5_f32);
    }
}
