//! Scalar abstraction for all chart and structure-function math.
//!
//! Everything numerical in this crate is written against [`Real`] so the same
//! formulas run at `f64`, `f32`, and (nested) dual numbers. `f64` is the
//! working type for dynamics and the CLI; duals supply exact-to-roundoff
//! derivatives for the bracket engine and curvature formulas.

use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Field operations plus the elementary functions the sphere charts need.
///
/// `value` returns the primal part (the underlying `f64` once all derivative
/// layers are stripped); domain checks and tolerances always go through it so
/// that dual perturbations never influence branching.
pub trait Real:
    Copy
    + Debug
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Primal part as `f64`.
    fn value(self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn asin(self) -> Self;
    fn acos(self) -> Self;
    /// Four-quadrant arctangent; `self` is the ordinate.
    fn atan2(self, x: Self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn abs(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn recip(self) -> Self {
        Self::one() / self
    }
}

macro_rules! impl_real_float {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn value(self) -> f64 {
                self as f64
            }
            #[inline]
            fn sqrt(self) -> Self {
                <$t>::sqrt(self)
            }
            #[inline]
            fn sin(self) -> Self {
                <$t>::sin(self)
            }
            #[inline]
            fn cos(self) -> Self {
                <$t>::cos(self)
            }
            #[inline]
            fn asin(self) -> Self {
                <$t>::asin(self)
            }
            #[inline]
            fn acos(self) -> Self {
                <$t>::acos(self)
            }
            #[inline]
            fn atan2(self, x: Self) -> Self {
                <$t>::atan2(self, x)
            }
            #[inline]
            fn exp(self) -> Self {
                <$t>::exp(self)
            }
            #[inline]
            fn ln(self) -> Self {
                <$t>::ln(self)
            }
            #[inline]
            fn abs(self) -> Self {
                <$t>::abs(self)
            }
            #[inline]
            fn powi(self, n: i32) -> Self {
                <$t>::powi(self, n)
            }
        }
    };
}

impl_real_float!(f64);
impl_real_float!(f32);

#[cfg(test)]
mod tests {
    use super::*;

    fn poly<T: Real>(x: T) -> T {
        x * x + T::from_f64(2.0) * x.sin()
    }

    #[test]
    fn f32_and_f64_agree_on_primal() {
        let a = poly(0.7_f64);
        let b = poly(0.7_f32);
        assert!((a - b.value()).abs() < 1e-6);
    }
}
