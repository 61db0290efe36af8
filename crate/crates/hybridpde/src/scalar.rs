//! Generic scalar abstraction over plain `f64` and taped [`crate::tape::Ad`] values.
//!
//! Every numerical kernel in this crate (WENO reconstruction, ETD steps, the
//! convolutional corrector, losses) is written once, generically over
//! [`Scalar`]. Instantiated with `f64` it runs eagerly; instantiated with
//! [`crate::tape::Ad`] the same arithmetic is recorded on a tape for
//! reverse-mode differentiation. Because both instantiations execute the
//! identical sequence of floating-point operations, taped forward values are
//! bit-identical to eager ones.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_f64(v: f64) -> Self;

    /// Current floating-point value (identity for `f64`).
    fn value(self) -> f64;

    /// Stop-gradient: same value, but treated as a constant by the tape.
    ///
    /// Used for quantities that are deliberately not differentiated, such as
    /// the Lax-Friedrichs speed `max|u|` and adaptive step sizes.
    fn detach(self) -> Self;

    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn relu(self) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline]
    fn value(self) -> f64 {
        self
    }

    #[inline]
    fn detach(self) -> Self {
        self
    }

    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }

    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }

    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }

    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }

    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    #[inline]
    fn relu(self) -> Self {
        if self > 0.0 {
            self
        } else {
            0.0
        }
    }
}
