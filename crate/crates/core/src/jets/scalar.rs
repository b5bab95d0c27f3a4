use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number-like values the integrator pipeline can be evaluated on.
///
/// Implemented by `f64`, by [`Dual`](super::Dual) (first derivatives with
/// respect to seeded variables) and by [`Jet`](super::Jet) (truncated Taylor
/// series in time). Both wrappers are generic over an inner `Scalar`, so
/// nesting such as `Jet<Dual<f64>>` or `Dual<Dual<f64>>` composes.
pub trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Lift a real constant.
    fn from_f64(x: f64) -> Self;

    /// The underlying real part (constant term of all nested layers).
    fn value(&self) -> f64;

    fn scale(&self, c: f64) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn powi(&self, k: i32) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn sin_cos(&self) -> (Self, Self) {
        (self.sin(), self.cos())
    }
}

impl Scalar for f64 {
    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn value(&self) -> f64 {
        *self
    }

    #[inline]
    fn scale(&self, c: f64) -> Self {
        self * c
    }

    #[inline]
    fn sin(&self) -> Self {
        f64::sin(*self)
    }

    #[inline]
    fn cos(&self) -> Self {
        f64::cos(*self)
    }

    #[inline]
    fn exp(&self) -> Self {
        f64::exp(*self)
    }

    #[inline]
    fn powi(&self, k: i32) -> Self {
        f64::powi(*self, k)
    }

    #[inline]
    fn sin_cos(&self) -> (Self, Self) {
        f64::sin_cos(*self)
    }
}

/// Real parts of a slice of scalars.
pub fn values<S: Scalar>(xs: &[S]) -> Vec<f64> {
    xs.iter().map(Scalar::value).collect()
}

/// Lift a real vector into any scalar type.
pub fn lift<S: Scalar>(xs: &[f64]) -> Vec<S> {
    xs.iter().map(|&x| S::from_f64(x)).collect()
}
