//! Forward-mode dual numbers with a fixed number of derivative directions.
//!
//! `Dual<f64, N>` carries a value and `N` first partials; arithmetic applies
//! the chain rule exactly, so gradients are accurate to roundoff. Nesting
//! (`Dual<Dual<f64, 1>, 1>`) yields exact second derivatives, which the
//! curvature formulas use. Finite differences appear in this crate only as
//! test oracles against these duals.

use crate::scalar::Real;
use num_traits::{One, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value plus `N` first-order partials.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T, const N: usize> {
    pub re: T,
    pub eps: [T; N],
}

impl<T: Real, const N: usize> Dual<T, N> {
    /// A constant: derivative zero in every direction.
    #[inline]
    pub fn constant(re: T) -> Self {
        Dual {
            re,
            eps: [T::zero(); N],
        }
    }

    /// The `i`-th independent variable seeded with unit derivative.
    #[inline]
    pub fn variable(re: T, i: usize) -> Self {
        let mut eps = [T::zero(); N];
        eps[i] = T::one();
        Dual { re, eps }
    }

    #[inline]
    fn map_eps(self, re: T, factor: T) -> Self {
        let mut eps = self.eps;
        for e in &mut eps {
            *e = *e * factor;
        }
        Dual { re, eps }
    }
}

impl<T: Real, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut eps = self.eps;
        for (e, r) in eps.iter_mut().zip(rhs.eps) {
            *e = *e + r;
        }
        Dual {
            re: self.re + rhs.re,
            eps,
        }
    }
}

impl<T: Real, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut eps = self.eps;
        for (e, r) in eps.iter_mut().zip(rhs.eps) {
            *e = *e - r;
        }
        Dual {
            re: self.re - rhs.re,
            eps,
        }
    }
}

impl<T: Real, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [T::zero(); N];
        for i in 0..N {
            eps[i] = self.eps[i] * rhs.re + self.re * rhs.eps[i];
        }
        Dual {
            re: self.re * rhs.re,
            eps,
        }
    }
}

impl<T: Real, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.re.recip();
        let re = self.re * inv;
        let mut eps = [T::zero(); N];
        for i in 0..N {
            eps[i] = (self.eps[i] - re * rhs.eps[i]) * inv;
        }
        Dual { re, eps }
    }
}

impl<T: Real, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        let mut eps = self.eps;
        for e in &mut eps {
            *e = -*e;
        }
        Dual { re: -self.re, eps }
    }
}

impl<T: Real, const N: usize> Zero for Dual<T, N> {
    #[inline]
    fn zero() -> Self {
        Dual::constant(T::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.iter().all(Zero::is_zero)
    }
}

impl<T: Real, const N: usize> One for Dual<T, N> {
    #[inline]
    fn one() -> Self {
        Dual::constant(T::one())
    }
}

impl<T: Real, const N: usize> Real for Dual<T, N> {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Dual::constant(T::from_f64(v))
    }

    #[inline]
    fn value(self) -> f64 {
        self.re.value()
    }

    #[inline]
    fn sqrt(self) -> Self {
        let r = self.re.sqrt();
        self.map_eps(r, (T::from_f64(2.0) * r).recip())
    }

    #[inline]
    fn sin(self) -> Self {
        self.map_eps(self.re.sin(), self.re.cos())
    }

    #[inline]
    fn cos(self) -> Self {
        self.map_eps(self.re.cos(), -self.re.sin())
    }

    #[inline]
    fn asin(self) -> Self {
        let d = (T::one() - self.re * self.re).sqrt().recip();
        self.map_eps(self.re.asin(), d)
    }

    #[inline]
    fn acos(self) -> Self {
        let d = -(T::one() - self.re * self.re).sqrt().recip();
        self.map_eps(self.re.acos(), d)
    }

    #[inline]
    fn atan2(self, x: Self) -> Self {
        let denom = (self.re * self.re + x.re * x.re).recip();
        let mut eps = [T::zero(); N];
        for i in 0..N {
            eps[i] = (x.re * self.eps[i] - self.re * x.eps[i]) * denom;
        }
        Dual {
            re: self.re.atan2(x.re),
            eps,
        }
    }

    #[inline]
    fn exp(self) -> Self {
        let e = self.re.exp();
        self.map_eps(e, e)
    }

    #[inline]
    fn ln(self) -> Self {
        self.map_eps(self.re.ln(), self.re.recip())
    }

    #[inline]
    fn abs(self) -> Self {
        if self.re.value() >= 0.0 {
            self
        } else {
            -self
        }
    }

    #[inline]
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let factor = T::from_f64(n as f64) * self.re.powi(n - 1);
        self.map_eps(self.re.powi(n), factor)
    }
}
