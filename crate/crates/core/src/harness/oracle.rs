//! Independent references: exact flows and the exact discrete Lagrangian.

use crate::error::{Error, Result};
use crate::integrator::reference::{rk4, second_order_field};
use crate::integrator::PhasePoint;
use crate::jets::{jacobian, lift, Dual, Scalar};
use crate::linalg::{self, norm_inf};
use crate::systems::{MechanicalSystem, Potential};

/// Exact oscillator flow for unit mass and stiffness.
pub fn sho_flow(start: &PhasePoint, t: f64) -> PhasePoint {
    let (s, c) = t.sin_cos();
    let q = start.q.iter().zip(&start.p).map(|(q, p)| c * q + s * p).collect();
    let p = start.q.iter().zip(&start.p).map(|(q, p)| -s * q + c * p).collect();
    PhasePoint::new(q, p, start.t + t)
}

/// Exact discrete Lagrangian of the unit oscillator,
/// `((q0^2 + q1^2) cos h - 2 q0 q1) / (2 sin h)`, rearranged to avoid
/// cancellation for small `h`.
pub fn sho_exact_ld(q0: f64, q1: f64, h: f64) -> f64 {
    let s2 = (0.5 * h).sin();
    ((q0 - q1).powi(2) * h.cos() - 4.0 * q0 * q1 * s2 * s2) / (2.0 * h.sin())
}

/// Exact discrete Lagrangian with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLd {
    pub value: f64,
    pub error_estimate: f64,
    /// Initial velocity of the boundary-value solution.
    pub v0: f64,
}

/// Action and endpoint position along RK4 with `steps` steps, on any scalar.
fn shoot<S: Scalar, P: Potential>(
    system: &MechanicalSystem<P>,
    q0: &[f64],
    v0: &[S],
    h: f64,
    steps: usize,
) -> (Vec<S>, S) {
    let d = system.dim();
    let field = second_order_field::<S, P>(system);
    let augmented = |y: &[S]| {
        let mut dy = field(&y[..2 * d]);
        dy.push(system.lagrangian(&y[..d], &y[d..2 * d]));
        dy
    };
    let y0: Vec<S> = lift::<S>(q0)
        .into_iter()
        .chain(v0.iter().cloned())
        .chain(std::iter::once(S::zero()))
        .collect();
    let y = rk4(augmented, &y0, h / steps as f64, steps);
    (y[..d].to_vec(), y[2 * d].clone())
}

/// Shooting on `v0` so that `q(h) = q1` at resolution `steps`.
fn shooting_solve<P: Potential>(
    system: &MechanicalSystem<P>,
    q0: &[f64],
    q1: &[f64],
    h: f64,
    steps: usize,
    mut v0: Vec<f64>,
) -> Result<(Vec<f64>, f64)> {
    let d = system.dim();
    let tol = 1e-12 * 1f64.max(norm_inf(q0)).max(norm_inf(q1));
    for iteration in 0..=30 {
        let seeded = Dual::seed(&v0, 0, d);
        let (end, _) = shoot(system, q0, &seeded, h, steps);
        let miss: Vec<Dual> = end.iter().zip(q1).map(|(a, b)| a.clone() - Dual::constant(*b)).collect();
        let res: Vec<f64> = miss.iter().map(|m| m.value).collect();
        let rn = norm_inf(&res);
        let neg: Vec<f64> = res.iter().map(|x| -x).collect();
        let dv = linalg::solve(&jacobian(&miss, d), &neg)
            .ok_or_else(|| Error::Oracle("singular shooting Jacobian (conjugate point?)".into()))?;
        v0.iter_mut().zip(dv).for_each(|(a, b)| *a += b);
        if rn < tol {
            let (_, action) = shoot(system, q0, &v0, h, steps);
            return Ok((v0, action));
        }
        if !rn.is_finite() || iteration == 30 {
            break;
        }
    }
    Err(Error::Oracle(format!(
        "shooting did not reach q1 = {q1:?} from q0 = {q0:?} over h = {h}"
    )))
}

/// `L_d^E(q0, q1, h)`: action of the Euler–Lagrange solution with
/// `q(0) = q0`, `q(h) = q1`. RK4 with at least 1000 steps carries the action
/// as an extra state; two resolutions are combined by Richardson
/// extrapolation.
pub fn exact_ld<P: Potential>(
    system: &MechanicalSystem<P>,
    q0: &[f64],
    q1: &[f64],
    h: f64,
) -> Result<ExactLd> {
    system.check_dim("q0", q0)?;
    system.check_dim("q1", q1)?;
    if h == 0.0 || !h.is_finite() {
        return Err(Error::usage("step size h must be finite and nonzero"));
    }
    let steps = 1000;
    let guess: Vec<f64> = q0.iter().zip(q1).map(|(a, b)| (b - a) / h).collect();
    let (v_coarse, coarse) = shooting_solve(system, q0, q1, h, steps, guess)?;
    let (v_fine, fine) = shooting_solve(system, q0, q1, h, 2 * steps, v_coarse)?;
    let correction = (fine - coarse) / 15.0;
    Ok(ExactLd {
        value: fine + correction,
        error_estimate: correction.abs(),
        v0: v_fine[0],
    })
}

/// Phase point of the exact flow: closed form for the oscillator, RK4
/// with step `h_ref` otherwise.
pub fn exact_flow<P: Potential>(
    system: &MechanicalSystem<P>,
    start: &PhasePoint,
    t: f64,
    h_ref: f64,
) -> Result<PhasePoint> {
    if is_unit_oscillator(system) {
        Ok(sho_flow(start, t))
    } else {
        crate::integrator::reference::flow(system, start, t, h_ref)
    }
}

/// True for the builtin oscillator, which has closed-form references.
pub fn is_unit_oscillator<P: Potential>(system: &MechanicalSystem<P>) -> bool {
    system.name() == "sho" && system.dim() == 1 && system.mass().matrix()[0][0] == 1.0 && {
        let q = [0.37];
        (system.force(&q)[0] + 0.37).abs() < 1e-15
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{builtin, Builtin};

    fn textbook(q0: f64, q1: f64, h: f64) -> f64 {
        ((q0 * q0 + q1 * q1) * h.cos() - 2.0 * q0 * q1) / (2.0 * h.sin())
    }

    #[test]
    fn stable_form_equals_textbook_form() {
        for &(q0, q1, h) in &[(1.0, 0.9, 0.3), (-0.4, 0.7, 1.1), (0.2, 0.2, 0.05)] {
            let (a, b) = (sho_exact_ld(q0, q1, h), textbook(q0, q1, h));
            assert!((a - b).abs() < 1e-13 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn numerical_oracle_matches_sho_closed_form() {
        let sys = builtin("sho").unwrap();
        for &(q0, q1, h) in &[(1.0, 0.995, 0.1), (0.3, -0.2, 0.4), (0.0, 0.0, 0.2), (1.0, 0.98, 0.025)] {
            let e = exact_ld(&sys, &[q0], &[q1], h).unwrap();
            assert!((e.value - sho_exact_ld(q0, q1, h)).abs() < 1e-12, "{q0} {q1} {h}");
        }
        assert_eq!(exact_ld(&sys, &[0.0], &[0.0], 0.1).unwrap().value, 0.0);
    }

    #[test]
    fn oracle_is_symmetric() {
        for b in Builtin::ALL {
            let sys = b.system();
            let a = exact_ld(&sys, &[0.6], &[0.66], 0.1).unwrap().value;
            let c = exact_ld(&sys, &[0.66], &[0.6], 0.1).unwrap().value;
            assert!((a - c).abs() < 1e-10, "{b}: {a} vs {c}");
        }
    }

    #[test]
    fn sho_flow_is_exact() {
        let x = sho_flow(&PhasePoint::new(vec![1.0], vec![0.0], 0.0), 0.1);
        assert_eq!(x.q[0], 0.1f64.cos());
        assert_eq!(x.p[0], -(0.1f64.sin()));
        assert!(is_unit_oscillator(&builtin("sho").unwrap()));
        assert!(!is_unit_oscillator(&builtin("pendulum").unwrap()));
    }
}
