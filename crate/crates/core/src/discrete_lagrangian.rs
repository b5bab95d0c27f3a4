//! Discrete Lagrangian from the collocated Hermite curve and Euler–Maclaurin
//! quadrature, with exact partial derivatives through the collocation solve.
//!
//! With `Phi(q0, q1, v0, v1)` the quadrature of `L` built from the endpoint
//! solution jets and `R(q0, q1, v0, v1) = 0` the collocation conditions,
//! `L_d(q0, q1) = Phi(q0, q1, v(q0, q1))` and
//!
//! ```text
//! D_i L_d = dPhi/dq_i + dPhi/dv . w_i,     (dR/dv) w_i = -dR/dq_i
//! ```
//!
//! All partials of `Phi` and `R` come from one dual-number evaluation.

use crate::collocation::{Collocation, CollocationSolution, NewtonOptions};
use crate::error::{Error, Result};
use crate::jets::{Dual, Jet, Scalar};
use crate::linalg::{self, Matrix};
use crate::prolongation::ProlongationJet;
use crate::systems::{MechanicalSystem, Potential};

/// Even Bernoulli numbers `B_2 .. B_12` as exact fractions.
pub const BERNOULLI_EVEN: [(i64, i64); 6] = [
    (1, 6),
    (-1, 30),
    (1, 42),
    (-1, 30),
    (5, 66),
    (-691, 2730),
];

/// Largest number of correction terms the table supports.
pub const MAX_CORRECTIONS: usize = BERNOULLI_EVEN.len();

/// `B_{2l}` for `l = 1..=6`.
pub fn bernoulli_even(l: usize) -> f64 {
    let (num, den) = BERNOULLI_EVEN[l - 1];
    num as f64 / den as f64
}

fn check_corrections(m: usize) -> Result<()> {
    if m > MAX_CORRECTIONS {
        return Err(Error::usage(format!(
            "at most {MAX_CORRECTIONS} Euler-Maclaurin corrections are supported, got {m}"
        )));
    }
    Ok(())
}

/// `sum_l B_{2l}/(2l)! theta^{2l} (f^{(2l-1)}(b) - f^{(2l-1)}(a))`, from
/// the Taylor coefficients of the integrand at both ends.
fn correction<S: Scalar>(left: &Jet<S>, right: &Jet<S>, theta: f64, m: usize) -> Result<S> {
    check_corrections(m)?;
    let need = if m == 0 { 0 } else { 2 * m - 1 };
    if left.order() < need || right.order() < need {
        return Err(Error::Capability(format!(
            "Euler-Maclaurin with {m} corrections needs integrand jets of order {need}"
        )));
    }
    let mut acc = S::zero();
    for l in 1..=m {
        let k = 2 * l - 1;
        // f^(k) = k! c_k, and k!/(2l)! = 1/(2l)
        let w = bernoulli_even(l) / (2 * l) as f64 * theta.powi(2 * l as i32);
        acc = acc + (right.coeff(k) - left.coeff(k)).scale(w);
    }
    Ok(acc)
}

/// One-interval Euler–Maclaurin rule on `[0, h]` with `m` corrections.
///
/// `left` and `right` are the Taylor jets of the integrand at `0` and `h`;
/// they must carry derivatives up to order `2m - 1`.
pub fn euler_maclaurin<S: Scalar>(left: &Jet<S>, right: &Jet<S>, h: f64, m: usize) -> Result<S> {
    let trap = (left.coeff(0) + right.coeff(0)).scale(0.5 * h);
    Ok(trap - correction(left, right, h, m)?)
}

/// Composite Euler–Maclaurin rule on `[a, b]` with `intervals` panels:
/// the trapezoid sum over `f` plus end corrections from the jets of the
/// integrand at `a` and `b`.
pub fn euler_maclaurin_composite(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    intervals: usize,
    left: &Jet,
    right: &Jet,
    m: usize,
) -> Result<f64> {
    if intervals == 0 {
        return Err(Error::usage("composite rule needs at least one interval"));
    }
    let theta = (b - a) / intervals as f64;
    let interior: f64 = (1..intervals).map(|k| f(a + k as f64 * theta)).sum();
    let trap = theta * (0.5 * (left.coeff(0) + right.coeff(0)) + interior);
    Ok(trap - correction(left, right, theta, m)?)
}

/// Jet of `t -> L(q(t), q'(t))` from a jet of `q`; one order is lost to the
/// velocity.
pub fn lagrangian_jet<S: Scalar, P: Potential>(
    system: &MechanicalSystem<P>,
    q: &[Jet<S>],
) -> Result<Jet<S>> {
    system.check_dim("position jet", q)?;
    let order = q[0].order();
    if order == 0 || q.iter().any(|c| c.order() != order) {
        return Err(Error::Capability(
            "position jets must share an order of at least 1".into(),
        ));
    }
    let v: Vec<Jet<S>> = q.iter().map(Jet::differentiate).collect();
    let q: Vec<Jet<S>> = q.iter().map(|c| c.truncate(order - 1)).collect();
    Ok(system.lagrangian(&q, &v))
}

/// Discrete Lagrangian value with optional gradients and the collocation
/// solution behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct LdEvaluation {
    pub value: f64,
    pub d1: Option<Vec<f64>>,
    pub d2: Option<Vec<f64>>,
    pub colloc: CollocationSolution,
    pub n: usize,
    pub m: usize,
    pub h: f64,
}

/// Everything the one-step map needs at a point `(q0, q1, v0, v1)`, which
/// need not satisfy the collocation conditions.
#[derive(Debug, Clone)]
pub(crate) struct LocalGradients<S> {
    pub value: S,
    pub d1: Vec<S>,
    pub d2: Vec<S>,
    /// Scaled collocation residual `[left; right]`.
    pub residual: Vec<S>,
    /// `dv/dq`, rows `(v0, v1)`, columns `(q0, q1)`.
    pub dv_dq: Matrix<S>,
}

/// The discrete Lagrangian `L_d(q0, q1, h)` for orders `(n, m)`.
#[derive(Debug, Clone)]
pub struct DiscreteLagrangian<'a, P> {
    colloc: Collocation<'a, P>,
    m: usize,
}

impl<'a, P: Potential> DiscreteLagrangian<'a, P> {
    pub fn new(system: &'a MechanicalSystem<P>, n: usize, m: usize, h: f64) -> Result<Self> {
        if m > n / 2 {
            return Err(Error::usage(format!(
                "m = {m} exceeds floor(n/2) = {} for n = {n}",
                n / 2
            )));
        }
        check_corrections(m)?;
        Ok(Self {
            colloc: Collocation::new(system, n, h)?,
            m,
        })
    }

    /// Uses the maximal number of corrections, `m = floor(n/2)`.
    pub fn with_default_m(system: &'a MechanicalSystem<P>, n: usize, h: f64) -> Result<Self> {
        Self::new(system, n, n / 2, h)
    }

    pub fn collocation(&self) -> &Collocation<'a, P> {
        &self.colloc
    }

    pub fn n(&self) -> usize {
        self.colloc.n()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.colloc.h()
    }

    fn quadrature<S: Scalar>(&self, left: &ProlongationJet<S>, right: &ProlongationJet<S>) -> Result<S> {
        let system = self.colloc.system();
        let l0 = lagrangian_jet(system, left.components())?;
        let l1 = lagrangian_jet(system, right.components())?;
        euler_maclaurin(&l0, &l1, self.h(), self.m)
    }

    /// Quadrature value at arbitrary `(q0, q1, v0, v1)`.
    pub fn value_at<S: Scalar>(&self, q0: &[S], q1: &[S], v0: &[S], v1: &[S]) -> Result<S> {
        let (left, right) = self.colloc.endpoint_jets(q0, q1, v0, v1)?;
        self.quadrature(&left, &right)
    }

    /// Implicit-function gradients at arbitrary `(q0, q1, v0, v1)`; they equal
    /// `D1 L_d`, `D2 L_d` wherever the collocation residual vanishes.
    pub(crate) fn local_gradients<S: Scalar>(
        &self,
        q0: &[S],
        q1: &[S],
        v0: &[S],
        v1: &[S],
    ) -> Result<LocalGradients<S>> {
        let d = q0.len();
        let seeds = 4 * d;
        let q0s = Dual::seed(q0, 0, seeds);
        let q1s = Dual::seed(q1, d, seeds);
        let v0s = Dual::seed(v0, 2 * d, seeds);
        let v1s = Dual::seed(v1, 3 * d, seeds);
        let (left, right) = self.colloc.endpoint_jets(&q0s, &q1s, &v0s, &v1s)?;
        let phi = self.quadrature(&left, &right)?;
        let r = self.colloc.scaled_residual(&left, &right);

        let r_v: Matrix<S> = r
            .iter()
            .map(|ri| (2 * d..4 * d).map(|j| ri.partial(j)).collect())
            .collect();
        let neg_r_q: Matrix<S> = r
            .iter()
            .map(|ri| (0..2 * d).map(|j| -ri.partial(j)).collect())
            .collect();
        let dv_dq = linalg::solve_many(&r_v, &neg_r_q).ok_or_else(|| {
            Error::solver("singular collocation Jacobian in gradient", 0, f64::NAN)
        })?;
        let total = |col: usize| -> S {
            (0..2 * d).fold(phi.partial(col), |acc, k| {
                acc + phi.partial(2 * d + k) * dv_dq[k][col].clone()
            })
        };
        let d1 = (0..d).map(total).collect();
        let d2 = (d..2 * d).map(total).collect();
        Ok(LocalGradients {
            value: phi.value,
            d1,
            d2,
            residual: r.into_iter().map(|x| x.value).collect(),
            dv_dq,
        })
    }

    /// Solve the collocation problem and evaluate `L_d`, optionally with
    /// `D1 L_d` and `D2 L_d`.
    pub fn evaluate(
        &self,
        q0: &[f64],
        q1: &[f64],
        guess: Option<(&[f64], &[f64])>,
        with_gradient: bool,
        opts: NewtonOptions,
    ) -> Result<LdEvaluation> {
        let colloc = self.colloc.solve(q0, q1, guess, opts)?;
        let (value, d1, d2) = if with_gradient {
            let g = self.local_gradients(q0, q1, &colloc.v0, &colloc.v1)?;
            (g.value, Some(g.d1), Some(g.d2))
        } else {
            let v = self.value_at(q0, q1, &colloc.v0, &colloc.v1)?;
            (v, None, None)
        };
        Ok(LdEvaluation {
            value,
            d1,
            d2,
            colloc,
            n: self.n(),
            m: self.m,
            h: self.h(),
        })
    }
}

/// `L_d(q0, q1, h)` with default collocation settings (no gradients).
pub fn eval_ld<P: Potential>(
    system: &MechanicalSystem<P>,
    n: usize,
    m: usize,
    h: f64,
    q0: &[f64],
    q1: &[f64],
) -> Result<LdEvaluation> {
    DiscreteLagrangian::new(system, n, m, h)?.evaluate(q0, q1, None, false, NewtonOptions::default())
}

/// `(D1 L_d, D2 L_d)` at `(q0, q1)`.
pub fn grad_ld<P: Potential>(
    system: &MechanicalSystem<P>,
    n: usize,
    m: usize,
    h: f64,
    q0: &[f64],
    q1: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let e = DiscreteLagrangian::new(system, n, m, h)?.evaluate(
        q0,
        q1,
        None,
        true,
        NewtonOptions::default(),
    )?;
    Ok((e.d1.unwrap(), e.d2.unwrap()))
}

/// Jet of the integrand `L` at one end of the collocated curve, for
/// inspection and plotting.
pub fn endpoint_lagrangian_jet<P: Potential>(
    system: &MechanicalSystem<P>,
    q: &[f64],
    v: &[f64],
    order: usize,
) -> Result<Jet> {
    let jet = crate::prolongation::solution_jet(system, q, v, order)?;
    lagrangian_jet(system, jet.components())
}
