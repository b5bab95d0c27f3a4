//! Two-point Hermite interpolation of degree `2n - 1` on `[0, h]`.
//!
//! Curves are stored in the monomial basis of the scaled variable `u = t/h`.
//! The basis polynomials have integer coefficients in `u` once the factor
//! `h^j / j!` is pulled out, so they are generated exactly in integer
//! arithmetic and converted to floating point only at the end.

use crate::error::{Error, Result};
use crate::jets::{factorial, Scalar};

/// Exact binomial coefficient.
pub(crate) fn binomial(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

fn poly_mul(a: &[i128], b: &[i128]) -> Vec<i128> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `p(1 - u)` expanded in powers of `u`.
fn reflect(p: &[i128]) -> Vec<i128> {
    let mut out = vec![0i128; p.len()];
    for (k, &a) in p.iter().enumerate() {
        // (1 - u)^k = sum_i C(k, i) (-u)^i
        for (i, slot) in out.iter_mut().enumerate().take(k + 1) {
            let sign = if i % 2 == 0 { 1 } else { -1 };
            *slot += a * sign * binomial(k as u32, i as u32);
        }
    }
    out
}

/// `H_{n,j}(t) = (t^j / j!) (1 - t/h)^n sum_{s=0}^{n-j-1} C(n+s-1, s) (t/h)^s`.
pub fn basis_eval(n: usize, j: usize, t: f64, h: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::usage("Hermite order n must be at least 1"));
    }
    if j >= n {
        return Err(Error::usage(format!("basis index j = {j} must be below n = {n}")));
    }
    let u = t / h;
    let sum: f64 = (0..n - j)
        .map(|s| binomial((n + s - 1) as u32, s as u32) as f64 * u.powi(s as i32))
        .sum();
    Ok(t.powi(j as i32) / factorial(j) * (1.0 - u).powi(n as i32) * sum)
}

/// Integer coefficient tables of the scaled basis for a given `n`.
///
/// `left[j]` holds `u^j (1-u)^n sum_s C(n+s-1, s) u^s` and `right[j]` the
/// mirrored `(-1)^j left[j](1 - u)`, each padded to `2n` entries. The
/// interpolant is `sum_j h^j/j! (A0[j] left[j](u) + A1[j] right[j](u))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteBasis {
    n: usize,
    left: Vec<Vec<f64>>,
    right: Vec<Vec<f64>>,
}

impl HermiteBasis {
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=16).contains(&n) {
            return Err(Error::usage(format!("Hermite order n = {n} outside 1..=16")));
        }
        let len = 2 * n;
        let mut one_minus_u_n = vec![1i128];
        for _ in 0..n {
            one_minus_u_n = poly_mul(&one_minus_u_n, &[1, -1]);
        }
        let mut left = Vec::with_capacity(n);
        let mut right = Vec::with_capacity(n);
        for j in 0..n {
            let series: Vec<i128> = (0..n - j)
                .map(|s| binomial((n + s - 1) as u32, s as u32))
                .collect();
            let mut p = vec![0i128; j];
            p.push(1);
            let mut p = poly_mul(&poly_mul(&p, &one_minus_u_n), &series);
            p.resize(len, 0);
            let mut r = reflect(&p);
            if j % 2 == 1 {
                r.iter_mut().for_each(|c| *c = -*c);
            }
            left.push(p.iter().map(|&c| c as f64).collect());
            right.push(r.iter().map(|&c| c as f64).collect());
        }
        Ok(Self { n, left, right })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Monomial coefficients (in `u`) of the left basis polynomial `j`.
    pub fn left(&self, j: usize) -> &[f64] {
        &self.left[j]
    }

    pub fn right(&self, j: usize) -> &[f64] {
        &self.right[j]
    }

    /// Assemble from scaled endpoint data `alpha[j] = h^j/j! A0[j]`,
    /// `beta[j] = h^j/j! A1[j]`; returns the `u`-coefficients per component.
    pub(crate) fn assemble_scaled<S: Scalar>(&self, alpha: &[Vec<S>], beta: &[Vec<S>]) -> Vec<Vec<S>> {
        let dim = alpha[0].len();
        (0..2 * self.n)
            .map(|k| {
                (0..dim)
                    .map(|i| {
                        let mut acc = S::zero();
                        for j in 0..self.n {
                            let (l, r) = (self.left[j][k], self.right[j][k]);
                            if l != 0.0 {
                                acc = acc + alpha[j][i].scale(l);
                            }
                            if r != 0.0 {
                                acc = acc + beta[j][i].scale(r);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }
}

/// Endpoint derivative data: `a0[j] = q^(j)(0)`, `a1[j] = q^(j)(h)` for
/// `j = 0..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteData<S = f64> {
    n: usize,
    h: f64,
    a0: Vec<Vec<S>>,
    a1: Vec<Vec<S>>,
}

impl<S: Scalar> HermiteData<S> {
    /// `h` may be negative (backward steps), but not zero.
    pub fn new(h: f64, a0: Vec<Vec<S>>, a1: Vec<Vec<S>>) -> Result<Self> {
        let n = a0.len();
        if n == 0 || a1.len() != n {
            return Err(Error::usage("endpoint data must have the same nonzero length"));
        }
        let dim = a0[0].len();
        if dim == 0 || a0.iter().chain(&a1).any(|v| v.len() != dim) {
            return Err(Error::usage("endpoint derivative vectors differ in dimension"));
        }
        if h == 0.0 || !h.is_finite() {
            return Err(Error::usage("step size h must be finite and nonzero"));
        }
        Ok(Self { n, h, a0, a1 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.a0[0].len()
    }

    pub fn left(&self) -> &[Vec<S>] {
        &self.a0
    }

    pub fn right(&self) -> &[Vec<S>] {
        &self.a1
    }

    pub fn assemble(&self) -> Result<PolynomialCurve<S>> {
        Ok(self.assemble_with(&HermiteBasis::new(self.n)?))
    }

    pub fn assemble_with(&self, basis: &HermiteBasis) -> PolynomialCurve<S> {
        assert_eq!(basis.n(), self.n, "basis built for a different n");
        let scale = |data: &[Vec<S>]| -> Vec<Vec<S>> {
            data.iter()
                .enumerate()
                .map(|(j, v)| {
                    let w = self.h.powi(j as i32) / factorial(j);
                    v.iter().map(|x| x.scale(w)).collect()
                })
                .collect()
        };
        let coeffs = basis.assemble_scaled(&scale(&self.a0), &scale(&self.a1));
        PolynomialCurve { h: self.h, coeffs }
    }
}

/// Value of a curve derivative, flagged when sampled outside `[0, h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample<S = f64> {
    pub values: Vec<S>,
    pub extrapolated: bool,
}

/// Polynomial curve `q(t) = sum_k c_k (t/h)^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialCurve<S = f64> {
    h: f64,
    coeffs: Vec<Vec<S>>,
}

impl<S: Scalar> PolynomialCurve<S> {
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Coefficients in `u = t/h`, indexed `[power][component]`.
    pub fn coeffs(&self) -> &[Vec<S>] {
        &self.coeffs
    }

    /// `r`-th time derivative at `t`.
    pub fn eval_deriv(&self, t: f64, r: usize) -> CurveSample<S> {
        let u = t / self.h;
        let dim = self.coeffs[0].len();
        let extrapolated = !(-1e-12..=1.0 + 1e-12).contains(&u);
        if r > self.degree() {
            return CurveSample {
                values: vec![S::zero(); dim],
                extrapolated,
            };
        }
        let inv_h_r = self.h.powi(-(r as i32));
        let values = (0..dim)
            .map(|i| {
                // Horner on the r-th derivative in u
                let mut acc = S::zero();
                for k in (r..=self.degree()).rev() {
                    let falling: f64 = ((k - r + 1)..=k).map(|x| x as f64).product();
                    acc = acc.scale(u) + self.coeffs[k][i].scale(falling);
                }
                acc.scale(inv_h_r)
            })
            .collect();
        CurveSample { values, extrapolated }
    }

    /// `h^r / r!` times the `r`-th derivative at `t = 0` (`at_end = false`)
    /// or `t = h` (`at_end = true`), read directly off the coefficients.
    pub fn scaled_endpoint_derivative(&self, r: usize, at_end: bool) -> Vec<S> {
        let dim = self.coeffs[0].len();
        if r > self.degree() {
            return vec![S::zero(); dim];
        }
        if !at_end {
            return self.coeffs[r].clone();
        }
        (0..dim)
            .map(|i| {
                (r..=self.degree()).fold(S::zero(), |acc, k| {
                    acc + self.coeffs[k][i].scale(binomial(k as u32, r as u32) as f64)
                })
            })
            .collect()
    }
}
