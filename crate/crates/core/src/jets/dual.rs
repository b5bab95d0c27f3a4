//! Forward-mode dual numbers carrying a gradient with respect to a set of
//! seeded variables.

use std::ops::{Add, Div, Mul, Neg, Sub};

use super::Scalar;

/// A value together with its partial derivatives with respect to `p` seed
/// variables.
///
/// An empty `partials` vector stands for a constant and combines with any
/// seeded value; two non-empty partial vectors must have the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual<S = f64> {
    pub value: S,
    pub partials: Vec<S>,
}

impl<S: Scalar> Dual<S> {
    pub fn constant(value: S) -> Self {
        Self {
            value,
            partials: Vec::new(),
        }
    }

    /// Seed variable `index` out of `count`.
    pub fn variable(value: S, index: usize, count: usize) -> Self {
        let mut partials = vec![S::zero(); count];
        partials[index] = S::one();
        Self { value, partials }
    }

    /// Seed a whole vector, placing its variables at `offset..offset+len`
    /// out of `count` seeds.
    pub fn seed(values: &[S], offset: usize, count: usize) -> Vec<Self> {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| Self::variable(v.clone(), offset + i, count))
            .collect()
    }

    /// Partial derivative `i`, treating constants as having zero gradient.
    pub fn partial(&self, i: usize) -> S {
        self.partials.get(i).cloned().unwrap_or_else(S::zero)
    }

    fn map_partials(&self, f: impl Fn(&S) -> S) -> Vec<S> {
        self.partials.iter().map(f).collect()
    }

    fn zip_partials(&self, rhs: &Self, f: impl Fn(&S, &S) -> S) -> Vec<S> {
        match (self.partials.is_empty(), rhs.partials.is_empty()) {
            (true, true) => Vec::new(),
            (false, true) => self.map_partials(|a| f(a, &S::zero())),
            (true, false) => rhs.map_partials(|b| f(&S::zero(), b)),
            (false, false) => {
                assert_eq!(
                    self.partials.len(),
                    rhs.partials.len(),
                    "dual numbers seeded with different variable counts"
                );
                self.partials
                    .iter()
                    .zip(&rhs.partials)
                    .map(|(a, b)| f(a, b))
                    .collect()
            }
        }
    }

    /// Chain rule for a unary function with value `fv` and derivative `dfv`.
    fn chain(&self, fv: S, dfv: S) -> Self {
        Self {
            value: fv,
            partials: self.map_partials(|d| dfv.clone() * d.clone()),
        }
    }
}

/// Jacobian of a vector of duals: row `i` holds the partials of output `i`.
pub fn jacobian<S: Scalar>(outputs: &[Dual<S>], seeds: usize) -> Vec<Vec<S>> {
    outputs
        .iter()
        .map(|o| (0..seeds).map(|j| o.partial(j)).collect())
        .collect()
}

/// Real parts of the dual values.
pub fn primal<S: Scalar>(outputs: &[Dual<S>]) -> Vec<S> {
    outputs.iter().map(|o| o.value.clone()).collect()
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let partials = self.zip_partials(&rhs, |a, b| a.clone() + b.clone());
        Self {
            value: self.value + rhs.value,
            partials,
        }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let partials = self.zip_partials(&rhs, |a, b| a.clone() - b.clone());
        Self {
            value: self.value - rhs.value,
            partials,
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.value, &rhs.value);
        let partials = self.zip_partials(&rhs, |da, db| {
            a.clone() * db.clone() + b.clone() * da.clone()
        });
        Self {
            value: self.value.clone() * rhs.value.clone(),
            partials,
        }
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let value = self.value.clone() / rhs.value.clone();
        let (q, b) = (&value, &rhs.value);
        let partials = self.zip_partials(&rhs, |da, db| {
            (da.clone() - q.clone() * db.clone()) / b.clone()
        });
        Self { value, partials }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            partials: self.map_partials(|d| -d.clone()),
            value: -self.value,
        }
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn from_f64(x: f64) -> Self {
        Self::constant(S::from_f64(x))
    }

    fn value(&self) -> f64 {
        self.value.value()
    }

    fn scale(&self, c: f64) -> Self {
        Self {
            value: self.value.scale(c),
            partials: self.map_partials(|d| d.scale(c)),
        }
    }

    fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c)
    }

    fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s)
    }

    fn sin_cos(&self) -> (Self, Self) {
        let (s, c) = self.value.sin_cos();
        (self.chain(s.clone(), c.clone()), self.chain(c, -s))
    }

    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e.clone(), e)
    }

    fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Self::one();
        }
        let d = self.value.powi(k - 1).scale(k as f64);
        self.chain(self.value.powi(k), d)
    }
}
