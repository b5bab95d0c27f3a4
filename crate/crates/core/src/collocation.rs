//! Prolongation-collocation: endpoint velocities for the Hermite interpolant.
//!
//! Given `q0`, `q1` and trial velocities `v0`, `v1`, the endpoint data of the
//! degree `2n - 1` interpolant are taken from the solution jets through
//! `(q0, v0)` and `(q1, v1)`. Derivatives `2..n-1` then satisfy the
//! prolonged Euler–Lagrange equations by construction, and only the order-`n`
//! conditions at both ends remain. Those are solved for `(v0, v1)` by Newton's
//! method with an exact Jacobian from dual numbers.

use crate::error::{Error, Result};
use crate::hermite::{HermiteBasis, HermiteData};
use crate::jets::{factorial, jacobian, lift, primal, Dual, Scalar};
use crate::linalg::{self, norm_inf};
use crate::prolongation::{solution_jet, ProlongationJet};
use crate::systems::{MechanicalSystem, Potential};

/// Stopping rule for a Newton iteration.
///
/// The iteration stops once the residual is below `tol` times the problem
/// scale; the Newton update computed at that point is still applied, so the
/// returned solution is accurate to roughly `tol^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl NewtonOptions {
    pub const COLLOCATION: NewtonOptions = NewtonOptions {
        tol: 1e-12,
        max_iter: 25,
    };
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self::COLLOCATION
    }
}

/// Converged endpoint velocities and the interpolant data they generate.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationSolution {
    pub v0: Vec<f64>,
    pub v1: Vec<f64>,
    pub data: HermiteData<f64>,
    /// Newton updates taken while the residual was above tolerance.
    pub iterations: usize,
    /// Infinity norm of the scaled residual at the last evaluation.
    pub residual_norm: f64,
}

/// Collocation problem for a fixed system, interpolation order `n` and step.
#[derive(Debug, Clone)]
pub struct Collocation<'a, P> {
    system: &'a MechanicalSystem<P>,
    n: usize,
    h: f64,
    jet_order: usize,
    basis: HermiteBasis,
}

impl<'a, P: Potential> Collocation<'a, P> {
    pub fn new(system: &'a MechanicalSystem<P>, n: usize, h: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::usage(format!("collocation needs n >= 2, got {n}")));
        }
        if h == 0.0 || !h.is_finite() {
            return Err(Error::usage("step size h must be finite and nonzero"));
        }
        Ok(Self {
            system,
            n,
            h,
            jet_order: n.max(2 * (n / 2)) + 1,
            basis: HermiteBasis::new(n)?,
        })
    }

    pub fn system(&self) -> &'a MechanicalSystem<P> {
        self.system
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Truncation order of the endpoint solution jets.
    pub fn jet_order(&self) -> usize {
        self.jet_order
    }

    pub(crate) fn endpoint_jets<S: Scalar>(
        &self,
        q0: &[S],
        q1: &[S],
        v0: &[S],
        v1: &[S],
    ) -> Result<(ProlongationJet<S>, ProlongationJet<S>)> {
        let left = solution_jet(self.system, q0, v0, self.jet_order)?;
        let right = solution_jet(self.system, q1, v1, self.jet_order)?;
        Ok((left, right))
    }

    /// Order-`n` mismatch at both ends, multiplied by `h^n / n!`, stacked as
    /// `[left; right]`.
    pub(crate) fn scaled_residual<S: Scalar>(
        &self,
        left: &ProlongationJet<S>,
        right: &ProlongationJet<S>,
    ) -> Vec<S> {
        let n = self.n;
        let scaled = |jet: &ProlongationJet<S>, j: usize| -> Vec<S> {
            let w = self.h.powi(j as i32);
            jet.coefficient(j).iter().map(|c| c.scale(w)).collect()
        };
        let alpha: Vec<Vec<S>> = (0..n).map(|j| scaled(left, j)).collect();
        let beta: Vec<Vec<S>> = (0..n).map(|j| scaled(right, j)).collect();
        let coeffs = self.basis.assemble_scaled(&alpha, &beta);
        let dim = left.components().len();
        let target0 = scaled(left, n);
        let target1 = scaled(right, n);
        let mut out = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            out.push(coeffs[n][i].clone() - target0[i].clone());
        }
        for i in 0..dim {
            let at_end = (n..2 * n).fold(S::zero(), |acc, k| {
                acc + coeffs[k][i].scale(crate::hermite::binomial(k as u32, n as u32) as f64)
            });
            out.push(at_end - target1[i].clone());
        }
        out
    }

    /// Endpoint data `A0`, `A1` of the interpolant generated by two jets.
    pub(crate) fn hermite_data<S: Scalar>(
        &self,
        left: &ProlongationJet<S>,
        right: &ProlongationJet<S>,
    ) -> Result<HermiteData<S>> {
        let data = |jet: &ProlongationJet<S>| -> Result<Vec<Vec<S>>> {
            (0..self.n).map(|j| jet.derivative(j)).collect()
        };
        HermiteData::new(self.h, data(left)?, data(right)?)
    }

    /// `(q_d^(n)(0) - P_n(q0, v0), q_d^(n)(h) - P_n(q1, v1))`.
    pub fn residual<S: Scalar>(
        &self,
        q0: &[S],
        q1: &[S],
        v0: &[S],
        v1: &[S],
    ) -> Result<(Vec<S>, Vec<S>)> {
        let (left, right) = self.endpoint_jets(q0, q1, v0, v1)?;
        let r = self.scaled_residual(&left, &right);
        let unscale = factorial(self.n) / self.h.powi(self.n as i32);
        let dim = q0.len();
        let r: Vec<S> = r.into_iter().map(|x| x.scale(unscale)).collect();
        Ok((r[..dim].to_vec(), r[dim..].to_vec()))
    }

    /// Scaled residual and its Jacobian with respect to `(v0, v1)`.
    fn residual_and_jacobian(
        &self,
        q0: &[f64],
        q1: &[f64],
        v0: &[f64],
        v1: &[f64],
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let dim = q0.len();
        let seeds = 2 * dim;
        let q0d: Vec<Dual> = lift(q0);
        let q1d: Vec<Dual> = lift(q1);
        let v0d = Dual::seed(v0, 0, seeds);
        let v1d = Dual::seed(v1, dim, seeds);
        let (left, right) = self.endpoint_jets(&q0d, &q1d, &v0d, &v1d)?;
        let r = self.scaled_residual(&left, &right);
        Ok((primal(&r), jacobian(&r, seeds)))
    }

    /// Solve for `(v0, v1)`; the default guess is the divided difference.
    pub fn solve(
        &self,
        q0: &[f64],
        q1: &[f64],
        guess: Option<(&[f64], &[f64])>,
        opts: NewtonOptions,
    ) -> Result<CollocationSolution> {
        self.system.check_dim("q0", q0)?;
        self.system.check_dim("q1", q1)?;
        let dim = q0.len();
        let (mut v0, mut v1) = match guess {
            Some((a, b)) => {
                self.system.check_dim("v0 guess", a)?;
                self.system.check_dim("v1 guess", b)?;
                (a.to_vec(), b.to_vec())
            }
            None => {
                let dd: Vec<f64> = q0.iter().zip(q1).map(|(a, b)| (b - a) / self.h).collect();
                (dd.clone(), dd)
            }
        };
        let scale = 1f64.max(norm_inf(q0)).max(norm_inf(q1));
        let tol = opts.tol * scale;
        let mut iterations = 0;
        let residual_norm = loop {
            let (r, jac) = self.residual_and_jacobian(q0, q1, &v0, &v1)?;
            let rn = norm_inf(&r);
            if !rn.is_finite() {
                return Err(Error::solver("collocation residual is not finite", iterations, rn));
            }
            let converged = rn < tol;
            if !converged && iterations >= opts.max_iter {
                return Err(Error::solver("collocation Newton did not converge", iterations, rn));
            }
            let neg_r: Vec<f64> = r.iter().map(|x| -x).collect();
            match linalg::solve(&jac, &neg_r) {
                Some(dx) => {
                    for i in 0..dim {
                        v0[i] += dx[i];
                        v1[i] += dx[dim + i];
                    }
                }
                None if converged => {}
                None => {
                    return Err(Error::solver("singular collocation Jacobian", iterations, rn));
                }
            }
            if converged {
                break rn;
            }
            iterations += 1;
        };
        let (left, right) = self.endpoint_jets(q0, q1, &v0, &v1)?;
        let data = self.hermite_data(&left, &right)?;
        Ok(CollocationSolution {
            v0,
            v1,
            data,
            iterations,
            residual_norm,
        })
    }
}

/// Unscaled collocation residual for a system, `n` and step `h`.
pub fn residual<S: Scalar, P: Potential>(
    system: &MechanicalSystem<P>,
    n: usize,
    h: f64,
    q0: &[S],
    q1: &[S],
    v0: &[S],
    v1: &[S],
) -> Result<(Vec<S>, Vec<S>)> {
    Collocation::new(system, n, h)?.residual(q0, q1, v0, v1)
}

/// Solve the collocation conditions with default Newton settings.
pub fn solve<P: Potential>(
    system: &MechanicalSystem<P>,
    n: usize,
    h: f64,
    q0: &[f64],
    q1: &[f64],
    guess: Option<(&[f64], &[f64])>,
) -> Result<CollocationSolution> {
    Collocation::new(system, n, h)?.solve(q0, q1, guess, NewtonOptions::default())
}
