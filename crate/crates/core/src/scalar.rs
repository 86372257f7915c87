//! Scalar abstractions.
//!
//! Probability vectors are generic over [`Probability`] so that the same
//! containers work with `f32`, `f64` and exact rationals. The composition
//! calculus is generic over [`Real`], which needs transcendental functions.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// A floating-point scalar usable by the closed-form parameter calculators.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Send + Sync + 'static {
    /// Lossless-enough conversion from an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A scalar that can hold a probability mass.
pub trait Probability: Num + Signed + PartialOrd + Clone + Debug + ToPrimitive + Send + Sync {
    /// Largest accepted deviation of a probability vector's sum from one.
    fn normalization_tolerance(len: usize) -> Self;
}

impl Probability for f64 {
    fn normalization_tolerance(len: usize) -> Self {
        1e-12_f64.max(4.0 * f64::EPSILON * len as f64)
    }
}

impl Probability for f32 {
    fn normalization_tolerance(len: usize) -> Self {
        4.0 * f32::EPSILON * (len.max(1) as f32)
    }
}

impl Probability for Ratio<i64> {
    fn normalization_tolerance(_len: usize) -> Self {
        Ratio::from_integer(0)
    }
}

impl Probability for Ratio<i128> {
    fn normalization_tolerance(_len: usize) -> Self {
        Ratio::from_integer(0)
    }
}
