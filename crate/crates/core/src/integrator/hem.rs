//! The variational one-step map `p0 = -D1 L_d(q0, q1)`, `p1 = D2 L_d(q0, q1)`.

use super::{MethodConfig, PhasePoint, SolveMode};
use crate::collocation::{CollocationSolution, NewtonOptions};
use crate::discrete_lagrangian::DiscreteLagrangian;
use crate::error::{Error, Result};
use crate::jets::{lift, Dual};
use crate::linalg::{self, norm_inf};
use crate::systems::{MechanicalSystem, Potential};

/// `(q1, v0, v1, iterations)` from a step solve.
type Solved = (Vec<f64>, Vec<f64>, Vec<f64>, usize);

/// Result of one hem step.
#[derive(Debug, Clone)]
pub struct HemStep {
    pub point: PhasePoint,
    pub colloc: CollocationSolution,
    pub iterations: usize,
    /// `|p0 + D1 L_d(q0, q1)|_inf` at the returned `q1`.
    pub residual: f64,
}

/// hem step for a fixed step size, reusable across steps.
pub struct HemStepper<'a, P> {
    ld: DiscreteLagrangian<'a, P>,
    cfg: MethodConfig,
}

impl<'a, P: Potential> HemStepper<'a, P> {
    pub fn new(system: &'a MechanicalSystem<P>, cfg: &MethodConfig, h: f64) -> Result<Self> {
        cfg.validate()?;
        let (n, m) = match cfg.method {
            super::Method::Hem { n, m } => (n, m),
            other => return Err(Error::usage(format!("{other} is not a hem method"))),
        };
        Ok(Self {
            ld: DiscreteLagrangian::new(system, n, m, h)?,
            cfg: *cfg,
        })
    }

    pub fn discrete_lagrangian(&self) -> &DiscreteLagrangian<'a, P> {
        &self.ld
    }

    fn system(&self) -> &'a MechanicalSystem<P> {
        self.ld.collocation().system()
    }

    fn opts(&self) -> NewtonOptions {
        self.cfg.newton()
    }

    /// Advance `state` by one step. `v_hint` is a guess for the left
    /// endpoint velocity, typically the previous segment's right one.
    pub fn step(&self, state: &PhasePoint, v_hint: Option<&[f64]>) -> Result<HemStep> {
        state.check(self.system())?;
        let h = self.ld.h();
        let sys = self.system();
        let v_start = match v_hint {
            Some(v) => v.to_vec(),
            None => sys.velocity(&state.p),
        };
        let f0 = sys.force(&state.q);
        let q1: Vec<f64> = state
            .q
            .iter()
            .zip(sys.velocity(&state.p))
            .map(|(q, v)| q + h * v)
            .collect();
        let v1: Vec<f64> = v_start.iter().zip(&f0).map(|(v, f)| v + h * f).collect();
        let (q1, v0, v1, iterations) = match self.cfg.mode {
            SolveMode::Nested => self.solve_nested(state, q1, v_start, v1)?,
            SolveMode::Combined => self.solve_combined(state, q1, v_start, v1)?,
        };
        let colloc = self
            .ld
            .collocation()
            .solve(&state.q, &q1, Some((&v0, &v1)), self.opts())?;
        let g = self.ld.local_gradients(&state.q, &q1, &colloc.v0, &colloc.v1)?;
        let residual = state
            .p
            .iter()
            .zip(&g.d1)
            .map(|(p, d)| (p + d).abs())
            .fold(0.0, f64::max);
        Ok(HemStep {
            point: PhasePoint::new(q1, g.d2, state.t + h),
            colloc,
            iterations,
            residual,
        })
    }

    fn tolerance(&self, state: &PhasePoint) -> f64 {
        self.cfg.tol * 1f64.max(norm_inf(&state.p)).max(norm_inf(&state.q))
    }

    /// Newton on `G(q1) = p0 + D1 L_d(q0, q1)`, with `v(q1)` re-solved at
    /// every iterate and `dG/dq1` from duals over `(q1, v0, v1)`.
    fn solve_nested(
        &self,
        state: &PhasePoint,
        mut q1: Vec<f64>,
        mut v0: Vec<f64>,
        mut v1: Vec<f64>,
    ) -> Result<Solved> {
        let d = state.dim();
        let tol = self.tolerance(state);
        let q0: Vec<Dual> = lift(&state.q);
        let mut iterations = 0;
        loop {
            let col = self
                .ld
                .collocation()
                .solve(&state.q, &q1, Some((&v0, &v1)), self.opts())?;
            v0 = col.v0;
            v1 = col.v1;
            let seeds = 3 * d;
            let g = self.ld.local_gradients(
                &q0,
                &Dual::seed(&q1, 0, seeds),
                &Dual::seed(&v0, d, seeds),
                &Dual::seed(&v1, 2 * d, seeds),
            )?;
            let res: Vec<f64> = (0..d).map(|i| state.p[i] + g.d1[i].value).collect();
            let jac: Vec<Vec<f64>> = (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| {
                            (0..2 * d).fold(g.d1[i].partial(j), |acc, k| {
                                acc + g.d1[i].partial(d + k) * g.dv_dq[k][d + j].value
                            })
                        })
                        .collect()
                })
                .collect();
            let rn = norm_inf(&res);
            if self.newton_update(&mut q1, &jac, &res, rn, tol, iterations)? {
                return Ok((q1, v0, v1, iterations));
            }
            iterations += 1;
        }
    }

    /// Newton on `(q1, v0, v1)` for `[p0 + D1; R] = 0`.
    fn solve_combined(
        &self,
        state: &PhasePoint,
        q1: Vec<f64>,
        v0: Vec<f64>,
        v1: Vec<f64>,
    ) -> Result<Solved> {
        let d = state.dim();
        let tol = self.tolerance(state);
        let q0: Vec<Dual> = lift(&state.q);
        let mut z: Vec<f64> = q1.into_iter().chain(v0).chain(v1).collect();
        let mut iterations = 0;
        loop {
            let seeds = 3 * d;
            let zs = Dual::seed(&z, 0, seeds);
            let g = self
                .ld
                .local_gradients(&q0, &zs[..d], &zs[d..2 * d], &zs[2 * d..])?;
            let eqs: Vec<Dual> = (0..d)
                .map(|i| g.d1[i].clone() + Dual::constant(state.p[i]))
                .chain(g.residual.iter().cloned())
                .collect();
            let res: Vec<f64> = eqs.iter().map(|e| e.value).collect();
            let jac = crate::jets::jacobian(&eqs, seeds);
            let rn = norm_inf(&res);
            if self.newton_update(&mut z, &jac, &res, rn, tol, iterations)? {
                let v1 = z.split_off(2 * d);
                let v0 = z.split_off(d);
                return Ok((z, v0, v1, iterations));
            }
            iterations += 1;
        }
    }

    /// Apply one Newton update; returns `true` once converged. The update
    /// computed at the converged iterate is still applied.
    fn newton_update(
        &self,
        x: &mut [f64],
        jac: &[Vec<f64>],
        res: &[f64],
        rn: f64,
        tol: f64,
        iterations: usize,
    ) -> Result<bool> {
        if !rn.is_finite() {
            return Err(Error::solver("hem step residual is not finite", iterations, rn));
        }
        let converged = rn < tol;
        if !converged && iterations >= self.cfg.max_iter {
            return Err(Error::solver("hem step Newton did not converge", iterations, rn));
        }
        let neg: Vec<f64> = res.iter().map(|r| -r).collect();
        match linalg::solve(&jac.to_vec(), &neg) {
            Some(dx) => x.iter_mut().zip(dx).for_each(|(a, b)| *a += b),
            None if converged => {}
            None => return Err(Error::solver("singular hem step Jacobian", iterations, rn)),
        }
        Ok(converged)
    }
}

/// One step of `hem(n, m)` from `state`.
pub fn step_hem<P: Potential>(
    system: &MechanicalSystem<P>,
    cfg: &MethodConfig,
    state: &PhasePoint,
    h: f64,
) -> Result<PhasePoint> {
    Ok(HemStepper::new(system, cfg, h)?.step(state, None)?.point)
}

fn legendre<P: Potential>(
    system: &MechanicalSystem<P>,
    cfg: &MethodConfig,
    q0: &[f64],
    q1: &[f64],
    h: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let stepper = HemStepper::new(system, cfg, h)?;
    let e = stepper.ld.evaluate(q0, q1, None, true, stepper.opts())?;
    Ok((e.d1.unwrap(), e.d2.unwrap()))
}

/// `(q0, -D1 L_d(q0, q1))` at time 0.
pub fn legendre_minus<P: Potential>(
    system: &MechanicalSystem<P>,
    cfg: &MethodConfig,
    q0: &[f64],
    q1: &[f64],
    h: f64,
) -> Result<PhasePoint> {
    let (d1, _) = legendre(system, cfg, q0, q1, h)?;
    Ok(PhasePoint::new(q0.to_vec(), d1.into_iter().map(|x| -x).collect(), 0.0))
}

/// `(q1, D2 L_d(q0, q1))` at time `h`.
pub fn legendre_plus<P: Potential>(
    system: &MechanicalSystem<P>,
    cfg: &MethodConfig,
    q0: &[f64],
    q1: &[f64],
    h: f64,
) -> Result<PhasePoint> {
    let (_, d2) = legendre(system, cfg, q0, q1, h)?;
    Ok(PhasePoint::new(q1.to_vec(), d2, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{reference, run, Method};
    use crate::systems::{builtin, Builtin};

    fn pt(q: f64, p: f64) -> PhasePoint {
        PhasePoint::new(vec![q], vec![p], 0.0)
    }

    #[test]
    fn equilibrium_is_fixed() {
        let sys = builtin("sho").unwrap();
        for h in [0.1, 0.5, -0.3] {
            let x = step_hem(&sys, &MethodConfig::hem(3, 1), &pt(0.0, 0.0), h).unwrap();
            assert_eq!((x.q[0], x.p[0]), (0.0, 0.0));
        }
    }

    #[test]
    fn sho_step_tracks_exact_flow() {
        let sys = builtin("sho").unwrap();
        let x = step_hem(&sys, &MethodConfig::hem(3, 1), &pt(1.0, 0.0), 0.1).unwrap();
        assert!((x.q[0] - 0.1f64.cos()).abs() < 1e-5);
        assert!((x.p[0] + 0.1f64.sin()).abs() < 1e-5);
        assert_eq!(x.t, 0.1);
    }

    #[test]
    fn pendulum_step_matches_reference() {
        let sys = builtin("pendulum").unwrap();
        let x = step_hem(&sys, &MethodConfig::hem(2, 1), &pt(0.5, 0.0), 0.1).unwrap();
        let r = reference::flow(&sys, &pt(0.5, 0.0), 0.1, 1e-4).unwrap();
        assert!((x.q[0] - r.q[0]).abs() < 1e-4 && (x.p[0] - r.p[0]).abs() < 1e-4);
    }

    #[test]
    fn legendre_transforms() {
        let sys = builtin("sho").unwrap();
        let cfg = MethodConfig::hem(2, 1);
        assert_eq!(legendre_minus(&sys, &cfg, &[0.0], &[0.0], 0.1).unwrap().p[0], 0.0);
        assert_eq!(legendre_plus(&sys, &cfg, &[0.0], &[0.0], 0.1).unwrap().p[0], 0.0);
        let start = pt(0.7, -0.2);
        let x = step_hem(&sys, &cfg, &start, 0.1).unwrap();
        let back = legendre_minus(&sys, &cfg, &start.q, &x.q, 0.1).unwrap();
        assert!((back.p[0] - start.p[0]).abs() < 1e-12);
        let fwd = legendre_plus(&sys, &cfg, &start.q, &x.q, 0.1).unwrap();
        assert!((fwd.p[0] - x.p[0]).abs() < 1e-12);
    }

    #[test]
    fn nested_and_combined_agree() {
        for b in Builtin::ALL {
            let sys = b.system();
            for (n, m) in [(2, 1), (3, 1), (4, 2)] {
                let cfg = MethodConfig::hem(n, m);
                let a = step_hem(&sys, &cfg, &pt(0.6, 0.3), 0.1).unwrap();
                let c = step_hem(&sys, &cfg.with_mode(SolveMode::Combined), &pt(0.6, 0.3), 0.1).unwrap();
                assert!((a.q[0] - c.q[0]).abs() < 1e-12, "{b} {n}");
                assert!((a.p[0] - c.p[0]).abs() < 1e-12, "{b} {n}");
            }
        }
    }

    #[test]
    fn momentum_matches_across_steps() {
        let sys = builtin("duffing").unwrap();
        let cfg = MethodConfig::hem(3, 1);
        let traj = run(&sys, &cfg, &pt(0.5, 0.2), 0.2, 20).unwrap();
        for w in traj.points.windows(3) {
            let plus = legendre_plus(&sys, &cfg, &w[0].q, &w[1].q, 0.2).unwrap();
            let minus = legendre_minus(&sys, &cfg, &w[1].q, &w[2].q, 0.2).unwrap();
            assert!((plus.p[0] - minus.p[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn step_is_time_reversible() {
        let sys = builtin("pendulum").unwrap();
        let cfg = MethodConfig::hem(3, 1);
        let a = pt(0.9, -0.4);
        let b = step_hem(&sys, &cfg, &a, 0.15).unwrap();
        let c = step_hem(&sys, &cfg, &b, -0.15).unwrap();
        assert!((c.q[0] - a.q[0]).abs() < 1e-12 && (c.p[0] - a.p[0]).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hem_method() {
        let sys = builtin("sho").unwrap();
        assert!(HemStepper::new(&sys, &MethodConfig::new(Method::Gauss2), 0.1).is_err());
    }
}
