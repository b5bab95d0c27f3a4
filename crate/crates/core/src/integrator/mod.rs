//! One-step maps and the trajectory runner.
//!
//! `hem(n, m)` is the variational integrator generated by the discrete
//! Lagrangian of the same orders. `gauss2` (two-stage Gauss–Legendre) and
//! `midpoint` are implicit Runge–Kutta reference methods on Hamilton's
//! equations.

use std::fmt;
use std::str::FromStr;

use crate::collocation::CollocationSolution;
use crate::error::{Error, Result};
use crate::systems::{MechanicalSystem, Potential};

mod hem;
pub mod reference;
mod rk;

pub use hem::{legendre_minus, legendre_plus, step_hem, HemStep, HemStepper};
pub use rk::{step_gauss2, step_midpoint, RkStep};

/// A point `(q, p)` in phase space at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl PhasePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>, t: f64) -> Self {
        Self { q, p, t }
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// `(q, p)` flattened.
    pub fn state(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    pub(crate) fn check<P: Potential>(&self, system: &MechanicalSystem<P>) -> Result<()> {
        system.check_dim("q", &self.q)?;
        system.check_dim("p", &self.p)?;
        if self.q.iter().chain(&self.p).any(|x| !x.is_finite()) {
            return Err(Error::usage("phase point has non-finite entries"));
        }
        Ok(())
    }
}

/// Integration method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Hem { n: usize, m: usize },
    Gauss2,
    Midpoint,
}

impl Method {
    pub fn hem(n: usize, m: usize) -> Self {
        Method::Hem { n, m }
    }

    pub fn validate(&self) -> Result<()> {
        if let Method::Hem { n, m } = *self {
            if n < 2 {
                return Err(Error::usage(format!("hem needs n >= 2, got {n}")));
            }
            if m > n / 2 {
                return Err(Error::usage(format!("hem({n},{m}): m must not exceed floor(n/2)")));
            }
            if m > crate::discrete_lagrangian::MAX_CORRECTIONS {
                return Err(Error::usage(format!("hem({n},{m}): too many corrections")));
            }
        }
        Ok(())
    }

    /// Classical order of the one-step map.
    pub fn nominal_order(&self) -> usize {
        match *self {
            Method::Hem { n, m } => (2 * m + 2).min(2 * n - 1),
            Method::Gauss2 => 4,
            Method::Midpoint => 2,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Hem { n, m } => write!(f, "hem({n},{m})"),
            Method::Gauss2 => f.write_str("gauss2"),
            Method::Midpoint => f.write_str("midpoint"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts `gauss2`, `midpoint`, `hem` (n = 3, m = 1) and `hem(n,m)`.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let s = s.to_ascii_lowercase();
        let method = match s.as_str() {
            "gauss2" => Method::Gauss2,
            "midpoint" => Method::Midpoint,
            "hem" => Method::hem(3, 1),
            other => {
                let inner = other
                    .strip_prefix("hem(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::usage(format!("unknown method `{other}`")))?;
                let parts: Vec<&str> = inner.split(',').collect();
                let parse = |x: &str| {
                    x.parse::<usize>()
                        .map_err(|_| Error::usage(format!("bad hem order `{x}` in `{other}`")))
                };
                match parts.as_slice() {
                    [n, m] => Method::hem(parse(n)?, parse(m)?),
                    [n] => {
                        let n = parse(n)?;
                        Method::hem(n, n / 2)
                    }
                    _ => return Err(Error::usage(format!("unknown method `{other}`"))),
                }
            }
        };
        method.validate()?;
        Ok(method)
    }
}

/// How the implicit hem step is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveMode {
    /// Newton on `q'` with a collocation solve inside every evaluation.
    #[default]
    Nested,
    /// One Newton iteration on `(q', v0, v1)`.
    Combined,
}

impl FromStr for SolveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nested" => Ok(SolveMode::Nested),
            "combined" => Ok(SolveMode::Combined),
            other => Err(Error::usage(format!("unknown solve mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConfig {
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    pub mode: SolveMode,
}

impl MethodConfig {
    pub const DEFAULT_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_ITER: usize = 50;

    pub fn new(method: Method) -> Self {
        Self {
            method,
            tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            mode: SolveMode::Nested,
        }
    }

    pub fn hem(n: usize, m: usize) -> Self {
        Self::new(Method::hem(n, m))
    }

    pub fn with_mode(mut self, mode: SolveMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.method.validate()?;
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::usage("Newton tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::usage("max_iter must be at least 1"));
        }
        Ok(())
    }

    pub(crate) fn newton(&self) -> crate::collocation::NewtonOptions {
        crate::collocation::NewtonOptions {
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

/// Per-step solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    pub newton_iters: usize,
    pub residual: f64,
    /// `|v0 - v1(previous segment)|_inf` for hem; the first segment is
    /// compared with `M^{-1} p0`. Zero for the Runge–Kutta methods.
    pub v_defect: f64,
}

/// A computed trajectory. `diagnostics[k]` belongs to the step from
/// `points[k]` to `points[k + 1]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub method: Method,
    pub h: f64,
    pub points: Vec<PhasePoint>,
    pub diagnostics: Vec<StepDiagnostics>,
    /// Collocated segments for hem, one per step.
    pub segments: Vec<CollocationSolution>,
    /// Set when a step after the first failed; the trajectory ends there.
    pub truncated: Option<Error>,
}

impl Trajectory {
    pub fn last(&self) -> &PhasePoint {
        self.points.last().expect("trajectory has at least the initial point")
    }

    pub fn steps(&self) -> usize {
        self.points.len() - 1
    }

    /// Position on the collocated curve of segment `k` at local time `s`.
    pub fn dense_position(&self, k: usize, s: f64) -> Option<Vec<f64>> {
        let curve = self.segments.get(k)?.data.assemble().ok()?;
        Some(curve.eval_deriv(s, 0).values)
    }
}

/// Stepper that keeps warm-start state between steps.
enum Stepper<'a, P> {
    Hem(HemStepper<'a, P>),
    Rk(&'a MechanicalSystem<P>, Method),
}

/// One step of any method.
pub fn step<P: Potential>(
    system: &MechanicalSystem<P>,
    cfg: &MethodConfig,
    state: &PhasePoint,
    h: f64,
) -> Result<PhasePoint> {
    match cfg.method {
        Method::Hem { .. } => step_hem(system, cfg, state, h),
        Method::Gauss2 => Ok(rk::step_with(system, cfg, Method::Gauss2, state, h)?.point),
        Method::Midpoint => Ok(rk::step_with(system, cfg, Method::Midpoint, state, h)?.point),
    }
}

/// Integrate `steps` steps of size `h` from `initial`.
pub fn run<P: Potential>(
    system: &MechanicalSystem<P>,
    cfg: &MethodConfig,
    initial: &PhasePoint,
    h: f64,
    steps: usize,
) -> Result<Trajectory> {
    cfg.validate()?;
    initial.check(system)?;
    if steps == 0 {
        return Err(Error::usage("steps must be at least 1"));
    }
    if h == 0.0 || !h.is_finite() {
        return Err(Error::usage("step size h must be finite and nonzero"));
    }
    let stepper = match cfg.method {
        Method::Hem { .. } => Stepper::Hem(HemStepper::new(system, cfg, h)?),
        m => Stepper::Rk(system, m),
    };
    let mut traj = Trajectory {
        method: cfg.method,
        h,
        points: Vec::with_capacity(steps + 1),
        diagnostics: Vec::with_capacity(steps),
        segments: Vec::new(),
        truncated: None,
    };
    traj.points.push(initial.clone());
    let mut prev_v1 = system.velocity(&initial.p);
    for k in 0..steps {
        let current = traj.last().clone();
        let outcome = match &stepper {
            Stepper::Hem(s) => s.step(&current, Some(&prev_v1)).map(|st| {
                let defect = st
                    .colloc
                    .v0
                    .iter()
                    .zip(&prev_v1)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                prev_v1 = st.colloc.v1.clone();
                let diag = StepDiagnostics {
                    newton_iters: st.iterations,
                    residual: st.residual,
                    v_defect: defect,
                };
                (st.point, diag, Some(st.colloc))
            }),
            Stepper::Rk(sys, m) => rk::step_with(*sys, cfg, *m, &current, h).map(|st| {
                let diag = StepDiagnostics {
                    newton_iters: st.iterations,
                    residual: st.residual,
                    v_defect: 0.0,
                };
                (st.point, diag, None)
            }),
        };
        match outcome {
            Ok((mut point, diag, seg)) => {
                // uniform grid, free of accumulated rounding
                point.t = initial.t + (k + 1) as f64 * h;
                traj.points.push(point);
                traj.diagnostics.push(diag);
                if let Some(seg) = seg {
                    traj.segments.push(seg);
                }
            }
            Err(e) if k == 0 => return Err(e),
            Err(e) => {
                traj.truncated = Some(e);
                break;
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::builtin;

    #[test]
    fn method_parsing_round_trips() {
        for s in ["hem(2,1)", "hem(3,1)", "hem(4,2)", "hem(3,0)", "gauss2", "midpoint"] {
            let m: Method = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert_eq!("hem".parse::<Method>().unwrap(), Method::hem(3, 1));
        assert_eq!("HEM( 4 )".parse::<Method>().unwrap(), Method::hem(4, 2));
        for bad in ["rk4", "hem(1,0)", "hem(3,2)", "hem(a,b)", "hem(2,1,0)"] {
            assert!(matches!(bad.parse::<Method>(), Err(Error::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn run_produces_uniform_grid() {
        let sys = builtin("sho").unwrap();
        for method in [Method::hem(2, 1), Method::Gauss2, Method::Midpoint] {
            let cfg = MethodConfig::new(method);
            let traj = run(&sys, &cfg, &PhasePoint::new(vec![1.0], vec![0.0], 0.5), 0.1, 20).unwrap();
            assert_eq!(traj.points.len(), 21);
            assert_eq!(traj.diagnostics.len(), 20);
            for (k, pt) in traj.points.iter().enumerate() {
                assert_eq!(pt.t, 0.5 + k as f64 * 0.1);
            }
            assert!(traj.truncated.is_none());
        }
    }

    #[test]
    fn single_step_run_equals_step() {
        let sys = builtin("pendulum").unwrap();
        let start = PhasePoint::new(vec![0.5], vec![0.1], 0.0);
        for method in [Method::hem(3, 1), Method::Gauss2, Method::Midpoint] {
            let cfg = MethodConfig::new(method);
            let a = run(&sys, &cfg, &start, 0.1, 1).unwrap();
            let b = step(&sys, &cfg, &start, 0.1).unwrap();
            assert_eq!(a.points[1].q, b.q);
            assert_eq!(a.points[1].p, b.p);
        }
    }

    #[test]
    fn run_rejects_bad_input() {
        let sys = builtin("sho").unwrap();
        let cfg = MethodConfig::new(Method::Gauss2);
        let x = PhasePoint::new(vec![1.0], vec![0.0], 0.0);
        assert!(matches!(run(&sys, &cfg, &x, 0.1, 0), Err(Error::Usage(_))));
        assert!(matches!(run(&sys, &cfg, &x, 0.0, 3), Err(Error::Usage(_))));
        let bad = PhasePoint::new(vec![1.0, 0.0], vec![0.0], 0.0);
        assert!(matches!(run(&sys, &cfg, &bad, 0.1, 3), Err(Error::Usage(_))));
    }

    #[test]
    fn hem_records_small_velocity_defects() {
        let sys = builtin("pendulum").unwrap();
        let cfg = MethodConfig::hem(3, 1);
        let traj = run(&sys, &cfg, &PhasePoint::new(vec![0.8], vec![0.0], 0.0), 0.1, 30).unwrap();
        assert_eq!(traj.segments.len(), 30);
        assert!(traj.diagnostics.iter().all(|d| d.v_defect < 1e-5), "{:?}", traj.diagnostics[1]);
        let mid = traj.dense_position(3, 0.05).unwrap()[0];
        let (a, b) = (traj.points[3].q[0], traj.points[4].q[0]);
        assert!(mid < a.max(b) + 1e-3 && mid > a.min(b) - 1e-3);
    }

    #[test]
    fn failure_after_first_step_truncates() {
        let sys = builtin("duffing").unwrap();
        let cfg = MethodConfig {
            max_iter: 3,
            ..MethodConfig::new(Method::Midpoint)
        };
        // energetic state with a huge step; first step may already fail
        match run(&sys, &cfg, &PhasePoint::new(vec![3.0], vec![4.0], 0.0), 0.9, 50) {
            Ok(t) => {
                if t.truncated.is_some() {
                    assert!(t.points.len() < 51);
                }
            }
            Err(e) => assert!(matches!(e, Error::Solver { .. })),
        }
    }
}
