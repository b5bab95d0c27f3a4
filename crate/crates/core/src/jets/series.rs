//! Truncated Taylor series in one time variable.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use super::Scalar;
use crate::error::{Error, Result};

/// Truncated Taylor series `c_0 + c_1 t + ... + c_K t^K`.
///
/// The `j`-th time derivative at `t = 0` is `j! c_j`. Jets of different
/// truncation orders never mix, except that an order-0 jet behaves as an
/// exact constant and combines with a jet of any order. Operator overloads
/// panic on an order mismatch; the `checked_*` methods report it instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<S = f64> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet<S> {
    /// Build from coefficients `c_0..c_K`. Panics on an empty slice.
    pub fn new(coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Self { coeffs }
    }

    /// The constant `value` carried at truncation `order`.
    pub fn constant(value: S, order: usize) -> Self {
        let mut coeffs = vec![S::zero(); order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The identity curve `value + t` at truncation `order`.
    pub fn variable(value: S, order: usize) -> Self {
        let mut j = Self::constant(value, order);
        if order >= 1 {
            j.coeffs[1] = S::one();
        }
        j
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// Coefficient `c_k`; zero past the truncation order of a constant.
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    /// The `j`-th derivative value `j! c_j`.
    pub fn derivative(&self, j: usize) -> Result<S> {
        let c = self.coeffs.get(j).ok_or_else(|| {
            Error::usage(format!(
                "derivative order {j} exceeds jet order {}",
                self.order()
            ))
        })?;
        Ok(c.scale(factorial(j)))
    }

    /// Jet of the time derivative; loses one order.
    pub fn differentiate(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::constant(S::zero(), 0);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(k, c)| c.scale((k + 1) as f64))
            .collect();
        Self { coeffs }
    }

    /// Drop coefficients above `order` (or pad a constant with zeros).
    pub fn truncate(&self, order: usize) -> Self {
        let coeffs = (0..=order).map(|k| self.coeff(k)).collect();
        Self { coeffs }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(self.clone() + rhs.clone())
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self> {
        self.check_compatible(rhs)?;
        Ok(self.clone() * rhs.clone())
    }

    fn check_compatible(&self, rhs: &Self) -> Result<()> {
        if self.order() != rhs.order() {
            return Err(Error::usage(format!(
                "jet order mismatch: {} vs {}",
                self.order(),
                rhs.order()
            )));
        }
        Ok(())
    }

    /// Apply one of the supported analytic functions.
    pub fn apply(&self, f: &Analytic) -> Self {
        match f {
            Analytic::Sin => self.sin(),
            Analytic::Cos => self.cos(),
            Analytic::Exp => self.exp(),
            Analytic::Pow(k) => self.powi(*k),
            Analytic::Polynomial(c) => {
                let mut acc = Self::from_f64(*c.last().unwrap_or(&0.0));
                for &ck in c.iter().rev().skip(1) {
                    acc = acc * self.clone() + Self::from_f64(ck);
                }
                acc
            }
        }
    }

    /// Compose with a function given by its derivatives at `c_0`:
    /// `derivs[k] = g^(k)(c_0)`. Derivatives beyond those supplied are taken
    /// as zero, so supply at least `order + 1` of them.
    ///
    /// This is the extension hook for functions outside [`Analytic`].
    pub fn compose(&self, derivs: &[S]) -> Self {
        let mut delta = self.clone();
        delta.coeffs[0] = S::zero();
        let order = self.order();
        let terms = derivs.len().min(order + 1);
        let mut acc = Self::constant(S::zero(), order);
        for k in (0..terms).rev() {
            let ck = derivs[k].scale(1.0 / factorial(k));
            acc = acc * delta.clone() + Self::constant(ck, order);
        }
        acc
    }

    fn zip_with(self, rhs: Self, f: impl Fn(S, S) -> S) -> Self {
        let (la, lb) = (self.coeffs.len(), rhs.coeffs.len());
        let coeffs = if la == lb {
            self.coeffs
                .into_iter()
                .zip(rhs.coeffs)
                .map(|(a, b)| f(a, b))
                .collect()
        } else if la == 1 {
            let mut it = rhs.coeffs.into_iter();
            let b0 = it.next().unwrap();
            let mut out = vec![f(self.coeffs[0].clone(), b0)];
            out.extend(it.map(|b| f(S::zero(), b)));
            out
        } else if lb == 1 {
            let mut it = self.coeffs.into_iter();
            let a0 = it.next().unwrap();
            let mut out = vec![f(a0, rhs.coeffs[0].clone())];
            out.extend(it.map(|a| f(a, S::zero())));
            out
        } else {
            panic!("jet order mismatch: {} vs {}", la - 1, lb - 1)
        };
        Self { coeffs }
    }

    fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// `(1/k) sum_{j=1..k} j a_j b_{k-j}`, the shared core of the exp and
    /// sin/cos recurrences.
    fn weighted_convolution(a: &[S], b: &[S], k: usize) -> S {
        let mut acc = S::zero();
        for j in 1..=k {
            acc = acc + (a[j].clone() * b[k - j].clone()).scale(j as f64);
        }
        acc.scale(1.0 / k as f64)
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl<S: Scalar> Add for Jet<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<S: Scalar> Sub for Jet<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<S: Scalar> Mul for Jet<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (la, lb) = (self.coeffs.len(), rhs.coeffs.len());
        if la == 1 {
            let a = &self.coeffs[0];
            return rhs.map(|b| a.clone() * b.clone());
        }
        if lb == 1 {
            let b = &rhs.coeffs[0];
            return self.map(|a| a.clone() * b.clone());
        }
        assert_eq!(la, lb, "jet order mismatch: {} vs {}", la - 1, lb - 1);
        let coeffs = (0..la)
            .map(|k| {
                let mut acc = self.coeffs[0].clone() * rhs.coeffs[k].clone();
                for i in 1..=k {
                    acc = acc + self.coeffs[i].clone() * rhs.coeffs[k - i].clone();
                }
                acc
            })
            .collect();
        Self { coeffs }
    }
}

impl<S: Scalar> Div for Jet<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let (la, lb) = (self.coeffs.len(), rhs.coeffs.len());
        if lb == 1 {
            let b = &rhs.coeffs[0];
            return self.map(|a| a.clone() / b.clone());
        }
        let len = if la == 1 { lb } else { la };
        assert_eq!(len, lb, "jet order mismatch: {} vs {}", la - 1, lb - 1);
        let a = self.truncate(len - 1).coeffs;
        let b = &rhs.coeffs;
        let mut q: Vec<S> = Vec::with_capacity(len);
        for k in 0..len {
            let mut num = a[k].clone();
            for i in 1..=k {
                num = num - b[i].clone() * q[k - i].clone();
            }
            q.push(num / b[0].clone());
        }
        Self { coeffs: q }
    }
}

impl<S: Scalar> Neg for Jet<S> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|c| -c.clone())
    }
}

impl<S: Scalar> Scalar for Jet<S> {
    fn from_f64(x: f64) -> Self {
        Self {
            coeffs: vec![S::from_f64(x)],
        }
    }

    fn value(&self) -> f64 {
        self.coeffs[0].value()
    }

    fn scale(&self, c: f64) -> Self {
        self.map(|a| a.scale(c))
    }

    fn sin(&self) -> Self {
        self.sin_cos().0
    }

    fn cos(&self) -> Self {
        self.sin_cos().1
    }

    fn sin_cos(&self) -> (Self, Self) {
        let a = &self.coeffs;
        let (s0, c0) = a[0].sin_cos();
        let mut s = vec![s0];
        let mut c = vec![c0];
        for k in 1..a.len() {
            let sk = Self::weighted_convolution(a, &c, k);
            let ck = -Self::weighted_convolution(a, &s, k);
            s.push(sk);
            c.push(ck);
        }
        (Self { coeffs: s }, Self { coeffs: c })
    }

    fn exp(&self) -> Self {
        let a = &self.coeffs;
        let mut e = vec![a[0].exp()];
        for k in 1..a.len() {
            let ek = Self::weighted_convolution(a, &e, k);
            e.push(ek);
        }
        Self { coeffs: e }
    }

    fn powi(&self, k: i32) -> Self {
        let order = self.order();
        if k < 0 {
            return Self::constant(S::one(), order) / self.powi(-k);
        }
        let mut result = Self::constant(S::one(), order);
        let mut base = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        result
    }
}

/// Analytic functions with built-in jet recurrences.
#[derive(Debug, Clone, PartialEq)]
pub enum Analytic {
    Sin,
    Cos,
    Exp,
    /// Integer power `x^k`.
    Pow(i32),
    /// `sum_i c_i x^i`, coefficients in ascending order.
    Polynomial(Vec<f64>),
}

impl FromStr for Analytic {
    type Err = Error;

    /// Accepts `sin`, `cos`, `exp`, `pow_<k>` and `polynomial:<c0>,<c1>,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "sin" => return Ok(Analytic::Sin),
            "cos" => return Ok(Analytic::Cos),
            "exp" => return Ok(Analytic::Exp),
            _ => {}
        }
        if let Some(k) = s.strip_prefix("pow_") {
            return k
                .parse()
                .map(Analytic::Pow)
                .map_err(|_| Error::usage(format!("bad power in `{s}`")));
        }
        if let Some(list) = s.strip_prefix("polynomial:") {
            let coeffs = list
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::usage(format!("bad polynomial coefficients in `{s}`")))?;
            return Ok(Analytic::Polynomial(coeffs));
        }
        Err(Error::usage(format!("unsupported analytic function `{s}`")))
    }
}

impl fmt::Display for Analytic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Analytic::Sin => write!(f, "sin"),
            Analytic::Cos => write!(f, "cos"),
            Analytic::Exp => write!(f, "exp"),
            Analytic::Pow(k) => write!(f, "pow_{k}"),
            Analytic::Polynomial(c) => {
                let parts: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "polynomial:{}", parts.join(","))
            }
        }
    }
}

/// Derivative values `j! c_j` of every component of a vector-valued curve.
pub fn derivative_values<S: Scalar>(curve: &[Jet<S>], j: usize) -> Result<Vec<S>> {
    curve.iter().map(|c| c.derivative(j)).collect()
}
