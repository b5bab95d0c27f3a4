//! Implicit Runge–Kutta reference methods on Hamilton's equations
//! `q' = M^{-1} p`, `p' = -grad V(q)`.

use super::{Method, MethodConfig, PhasePoint};
use crate::error::{Error, Result};
use crate::jets::{jacobian, Dual, Scalar};
use crate::linalg::{self, norm_inf};
use crate::systems::{MechanicalSystem, Potential};

/// Result of one Runge–Kutta step.
#[derive(Debug, Clone)]
pub struct RkStep {
    pub point: PhasePoint,
    pub iterations: usize,
    pub residual: f64,
}

struct Tableau {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
}

fn tableau(method: Method) -> Tableau {
    match method {
        Method::Gauss2 => {
            let r = 3f64.sqrt() / 6.0;
            Tableau {
                a: vec![vec![0.25, 0.25 - r], vec![0.25 + r, 0.25]],
                b: vec![0.5, 0.5],
            }
        }
        Method::Midpoint => Tableau {
            a: vec![vec![0.5]],
            b: vec![1.0],
        },
        Method::Hem { .. } => unreachable!("hem is not a Runge-Kutta method"),
    }
}

fn vector_field<S: Scalar, P: Potential>(system: &MechanicalSystem<P>, y: &[S]) -> Vec<S> {
    let d = system.dim();
    let qdot = system.mass().apply_inverse(&y[d..]);
    let pdot = system.potential().gradient(&y[..d]).into_iter().map(|g| -g);
    qdot.into_iter().chain(pdot).collect()
}

/// Stage equations `K_i - F(y + h sum_j a_ij K_j)` for stacked stages `k`.
fn stage_residual<S: Scalar, P: Potential>(
    system: &MechanicalSystem<P>,
    tab: &Tableau,
    y: &[f64],
    h: f64,
    k: &[S],
) -> Vec<S> {
    let n = y.len();
    let s = tab.b.len();
    let mut out = Vec::with_capacity(s * n);
    for i in 0..s {
        let yi: Vec<S> = (0..n)
            .map(|c| {
                (0..s).fold(S::from_f64(y[c]), |acc, j| {
                    acc + k[j * n + c].scale(h * tab.a[i][j])
                })
            })
            .collect();
        let f = vector_field(system, &yi);
        out.extend((0..n).map(|c| k[i * n + c].clone() - f[c].clone()));
    }
    out
}

pub(crate) fn step_with<P: Potential>(
    system: &MechanicalSystem<P>,
    cfg: &MethodConfig,
    method: Method,
    state: &PhasePoint,
    h: f64,
) -> Result<RkStep> {
    state.check(system)?;
    if h == 0.0 || !h.is_finite() {
        return Err(Error::usage("step size h must be finite and nonzero"));
    }
    let tab = tableau(method);
    let y = state.state();
    let n = y.len();
    let s = tab.b.len();
    let f0 = vector_field(system, &y);
    let mut k: Vec<f64> = (0..s).flat_map(|_| f0.iter().copied()).collect();
    let tol = cfg.tol * 1f64.max(norm_inf(&f0));
    let mut iterations = 0;
    let residual = loop {
        let seeded = Dual::seed(&k, 0, s * n);
        let r = stage_residual(system, &tab, &y, h, &seeded);
        let res: Vec<f64> = r.iter().map(|x| x.value).collect();
        let rn = norm_inf(&res);
        if !rn.is_finite() {
            return Err(Error::solver(format!("{method} stage residual is not finite"), iterations, rn));
        }
        let converged = rn < tol;
        if !converged && iterations >= cfg.max_iter {
            return Err(Error::solver(format!("{method} Newton did not converge"), iterations, rn));
        }
        let neg: Vec<f64> = res.iter().map(|x| -x).collect();
        match linalg::solve(&jacobian(&r, s * n), &neg) {
            Some(dk) => k.iter_mut().zip(dk).for_each(|(a, b)| *a += b),
            None if converged => {}
            None => return Err(Error::solver(format!("singular {method} Jacobian"), iterations, rn)),
        }
        if converged {
            break rn;
        }
        iterations += 1;
    };
    let y1: Vec<f64> = (0..n)
        .map(|c| y[c] + h * (0..s).map(|i| tab.b[i] * k[i * n + c]).sum::<f64>())
        .collect();
    let d = state.dim();
    Ok(RkStep {
        point: PhasePoint::new(y1[..d].to_vec(), y1[d..].to_vec(), state.t + h),
        iterations,
        residual,
    })
}

/// Two-stage Gauss–Legendre step (order 4).
pub fn step_gauss2<P: Potential>(
    system: &MechanicalSystem<P>,
    state: &PhasePoint,
    h: f64,
) -> Result<PhasePoint> {
    let cfg = MethodConfig::new(Method::Gauss2);
    Ok(step_with(system, &cfg, Method::Gauss2, state, h)?.point)
}

/// Implicit midpoint step (order 2).
pub fn step_midpoint<P: Potential>(
    system: &MechanicalSystem<P>,
    state: &PhasePoint,
    h: f64,
) -> Result<PhasePoint> {
    let cfg = MethodConfig::new(Method::Midpoint);
    Ok(step_with(system, &cfg, Method::Midpoint, state, h)?.point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::builtin;

    fn pt(q: f64, p: f64) -> PhasePoint {
        PhasePoint::new(vec![q], vec![p], 0.0)
    }

    #[test]
    fn equilibria_are_fixed() {
        let sho = builtin("sho").unwrap();
        let duffing = builtin("duffing").unwrap();
        for x in [step_gauss2(&sho, &pt(0.0, 0.0), 0.1), step_midpoint(&duffing, &pt(1.0, 0.0), 0.2)] {
            let x = x.unwrap();
            assert!(x.p[0].abs() < 1e-15);
        }
        assert_eq!(step_midpoint(&duffing, &pt(1.0, 0.0), 0.2).unwrap().q[0], 1.0);
    }

    #[test]
    fn gauss2_sho_step() {
        let sys = builtin("sho").unwrap();
        let x = step_gauss2(&sys, &pt(1.0, 0.0), 0.1).unwrap();
        assert!((x.q[0] - 0.1f64.cos()).abs() < 1e-7);
        assert!((x.p[0] + 0.1f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn midpoint_local_error_is_third_order() {
        let sys = builtin("sho").unwrap();
        let err = |h: f64| {
            let x = step_midpoint(&sys, &pt(1.0, 0.0), h).unwrap();
            ((x.q[0] - h.cos()).powi(2) + (x.p[0] + h.sin()).powi(2)).sqrt()
        };
        let slope = (err(0.1) / err(0.05)).log2();
        assert!((slope - 3.0).abs() < 0.2, "{slope}");
    }

    #[test]
    fn midpoint_matches_cayley_transform_on_sho() {
        // (I - hA/2)^{-1}(I + hA/2) with A = [[0, 1], [-1, 0]]
        let sys = builtin("sho").unwrap();
        let h = 0.3;
        let x = step_midpoint(&sys, &pt(1.0, 0.0), h).unwrap();
        let den = 1.0 + h * h / 4.0;
        assert!((x.q[0] - (1.0 - h * h / 4.0) / den).abs() < 1e-15);
        assert!((x.p[0] + h / den).abs() < 1e-15);
    }
}
