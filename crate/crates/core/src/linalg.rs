//! Small dense linear algebra over any [`Scalar`].
//!
//! Systems here are at most a few times the configuration dimension, and the
//! solves must run on dual numbers as well as on `f64`, so a plain Gaussian
//! elimination is used.

use crate::jets::Scalar;

/// Row-major square matrix.
pub type Matrix<S> = Vec<Vec<S>>;

/// Solve `a x = b` by Gaussian elimination with partial pivoting on the real
/// parts. Returns `None` when a pivot vanishes relative to the matrix scale.
#[allow(clippy::needless_range_loop)]
pub fn solve<S: Scalar>(a: &Matrix<S>, b: &[S]) -> Option<Vec<S>> {
    let n = b.len();
    assert_eq!(a.len(), n, "matrix/vector size mismatch");
    let scale = a
        .iter()
        .flat_map(|r| r.iter().map(|x| x.value().abs()))
        .fold(0.0, f64::max);
    if n == 0 {
        return Some(Vec::new());
    }
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let mut m: Vec<Vec<S>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| {
                m[i][col]
                    .value()
                    .abs()
                    .total_cmp(&m[j][col].value().abs())
            })
            .unwrap();
        if m[piv][col].value().abs() <= 1e-14 * scale {
            return None;
        }
        m.swap(col, piv);
        for row in col + 1..n {
            let factor = m[row][col].clone() / m[col][col].clone();
            for k in col..=n {
                let t = factor.clone() * m[col][k].clone();
                m[row][k] = m[row][k].clone() - t;
            }
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = m[row][n].clone();
        for k in row + 1..n {
            acc = acc - m[row][k].clone() * x[k].clone();
        }
        x[row] = acc / m[row][row].clone();
    }
    Some(x)
}

/// Solve `a X = B` column by column for a matrix right-hand side.
pub fn solve_many<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Option<Matrix<S>> {
    let rows = b.len();
    let cols = b.first().map_or(0, Vec::len);
    let mut out = vec![Vec::with_capacity(cols); rows];
    for c in 0..cols {
        let rhs: Vec<S> = b.iter().map(|r| r[c].clone()).collect();
        let x = solve(a, &rhs)?;
        for (r, xr) in x.into_iter().enumerate() {
            out[r].push(xr);
        }
    }
    Some(out)
}

/// `a x` for a real matrix and scalar vector.
pub fn mat_vec<S: Scalar>(a: &[Vec<f64>], x: &[S]) -> Vec<S> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(x)
                .fold(S::zero(), |acc, (&aij, xj)| acc + xj.scale(aij))
        })
        .collect()
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Cholesky factor of a symmetric positive-definite matrix, or `None`.
pub fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if d <= 0.0 || !d.is_finite() {
                    return None;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

/// Inverse of a nonsingular real matrix.
pub fn inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let id: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    solve_many(&a.to_vec(), &id)
}
