//! Complex values over a generic [`Scalar`], so spectral arithmetic can run
//! both eagerly and on the differentiation tape.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug)]
pub struct CVal<S> {
    pub re: S,
    pub im: S,
}

/// Plain `f64` complex number.
pub type Cplx = CVal<f64>;

impl Cplx {
    /// e^{i theta}
    pub fn cis(theta: f64) -> Cplx {
        CVal {
            re: theta.cos(),
            im: theta.sin(),
        }
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }
}

impl<S: Scalar> CVal<S> {
    pub fn new(re: S, im: S) -> Self {
        CVal { re, im }
    }

    pub fn zero() -> Self {
        CVal {
            re: S::zero(),
            im: S::zero(),
        }
    }

    pub fn from_re(re: S) -> Self {
        CVal {
            re,
            im: S::zero(),
        }
    }

    pub fn conj(self) -> Self {
        CVal {
            re: self.re,
            im: -self.im,
        }
    }

    pub fn scale(self, c: f64) -> Self {
        CVal {
            re: self.re * c,
            im: self.im * c,
        }
    }

    /// Multiplication by a constant complex factor (twiddles, symbol tables).
    pub fn mul_c(self, w: Cplx) -> Self {
        CVal {
            re: self.re * w.re - self.im * w.im,
            im: self.re * w.im + self.im * w.re,
        }
    }

    /// Squared magnitude of the forward values (diagnostics only).
    pub fn norm_sqr_value(self) -> f64 {
        let r = self.re.value();
        let i = self.im.value();
        r * r + i * i
    }
}

impl<S: Scalar> Add for CVal<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        CVal {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl<S: Scalar> Sub for CVal<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        CVal {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl<S: Scalar> Mul for CVal<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        CVal {
            re: self.re * rhs.re - self.im * rhs.im,
            im: self.re * rhs.im + self.im * rhs.re,
        }
    }
}

impl<S: Scalar> Neg for CVal<S> {
    type Output = Self;
    fn neg(self) -> Self {
        CVal {
            re: -self.re,
            im: -self.im,
        }
    }
}
