//! Real/complex scalar abstraction used by the exponents and the Riccati solver.

use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

/// Arithmetic needed to evaluate the mechanisms and integrate the Riccati system
/// for real or complex arguments with the same code path.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + Mul<f64, Output = Self>
    + 'static
{
    fn from_re(x: f64) -> Self;
    fn re(self) -> f64;
    fn im(self) -> f64;
    fn abs(self) -> f64;
    fn exp(self) -> Self;
    fn is_finite(self) -> bool;
    /// Principal power. Callers guarantee a base with nonnegative real part.
    fn powf(self, p: f64) -> Self;
    /// Replace the real part, keeping the imaginary part.
    fn with_re(self, x: f64) -> Self;
    fn zero() -> Self {
        Self::from_re(0.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_re(x: f64) -> Self {
        x
    }
    #[inline]
    fn re(self) -> f64 {
        self
    }
    #[inline]
    fn im(self) -> f64 {
        0.0
    }
    #[inline]
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        if self == 0.0 {
            0.0
        } else {
            f64::powf(self, p)
        }
    }
    #[inline]
    fn with_re(self, x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    #[inline]
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    #[inline]
    fn re(self) -> f64 {
        self.re
    }
    #[inline]
    fn im(self) -> f64 {
        self.im
    }
    #[inline]
    fn abs(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn exp(self) -> Self {
        Complex64::exp(self)
    }
    #[inline]
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn powf(self, p: f64) -> Self {
        if self.re == 0.0 && self.im == 0.0 {
            Complex64::new(0.0, 0.0)
        } else if self.im == 0.0 && self.re > 0.0 {
            // keep real inputs bit-identical to the f64 path
            Complex64::new(self.re.powf(p), 0.0)
        } else {
            Complex64::powf(self, p)
        }
    }
    #[inline]
    fn with_re(self, x: f64) -> Self {
        Complex64::new(x, self.im)
    }
}
