//! Experiment drivers: convergence, variational order, energy and
//! work-precision studies.

use std::time::Instant;

use rayon::prelude::*;

use super::oracle;
use crate::discrete_lagrangian::DiscreteLagrangian;
use crate::error::{Error, Result};
use crate::integrator::{run, Method, MethodConfig, PhasePoint, Trajectory};
use crate::linalg::norm2;
use crate::systems::{MechanicalSystem, Potential};

/// Log-log residual above which a fit is flagged as non-asymptotic.
pub const ASYMPTOTIC_RESIDUAL: f64 = 0.1;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual, in natural-log units.
    pub max_residual: f64,
    pub non_asymptotic: bool,
}

pub fn fit_slope(x: &[f64], y: &[f64]) -> Result<SlopeFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::usage("slope fit needs at least two (x, y) pairs"));
    }
    if x.iter().chain(y).any(|v| *v <= 0.0 || !v.is_finite()) {
        return Err(Error::usage("slope fit needs positive finite data"));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::usage("slope fit needs distinct x values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = lx
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).abs())
        .fold(0.0, f64::max);
    Ok(SlopeFit {
        slope,
        intercept,
        max_residual,
        non_asymptotic: max_residual > ASYMPTOTIC_RESIDUAL,
    })
}

/// Ordinary least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Which part of the phase point enters the global error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Component {
    /// Euclidean norm of `(dq, dp)`.
    #[default]
    Phase,
    /// Euclidean norm of `dq`.
    Position,
}

impl std::str::FromStr for Component {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "phase" | "qp" => Ok(Component::Phase),
            "q" | "position" => Ok(Component::Position),
            other => Err(Error::usage(format!("unknown error component `{other}` (expected q or phase)"))),
        }
    }
}

impl Component {
    pub fn error(self, a: &PhasePoint, b: &PhasePoint) -> f64 {
        let dq: Vec<f64> = a.q.iter().zip(&b.q).map(|(x, y)| x - y).collect();
        match self {
            Component::Position => norm2(&dq),
            Component::Phase => {
                let dp: Vec<f64> = a.p.iter().zip(&b.p).map(|(x, y)| x - y).collect();
                (norm2(&dq).powi(2) + norm2(&dp).powi(2)).sqrt()
            }
        }
    }
}

/// Check an `h` list for slope studies: strictly decreasing, positive, at
/// least three entries.
pub fn check_h_list(h_list: &[f64]) -> Result<()> {
    if h_list.len() < 3 {
        return Err(Error::usage("h-list needs at least three entries"));
    }
    if h_list.iter().any(|h| *h <= 0.0 || !h.is_finite()) {
        return Err(Error::usage("h-list entries must be positive"));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::usage("h-list must be strictly decreasing"));
    }
    Ok(())
}

/// Number of steps of size `h` that cover `t_end` exactly.
pub fn steps_for(t_end: f64, h: f64) -> Result<usize> {
    let k = t_end / h;
    let steps = k.round();
    if steps < 1.0 || (k - steps).abs() > 1e-9 * k.max(1.0) {
        return Err(Error::usage(format!("t_end = {t_end} is not a whole number of steps h = {h}")));
    }
    Ok(steps as usize)
}

/// Reference end state at `t_end` for global errors: the closed form for
/// the oscillator, otherwise gauss2 with step `h_ref`.
pub fn reference_end<P: Potential>(
    system: &MechanicalSystem<P>,
    initial: &PhasePoint,
    t_end: f64,
    h_ref: f64,
) -> Result<PhasePoint> {
    if oracle::is_unit_oscillator(system) {
        return Ok(oracle::sho_flow(initial, t_end));
    }
    let steps = (t_end / h_ref).ceil() as usize;
    let traj = run(system, &MethodConfig::new(Method::Gauss2), initial, t_end / steps as f64, steps)?;
    Ok(traj.last().clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub steps: usize,
    pub error: f64,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub system: String,
    pub method: Method,
    pub component: Component,
    pub t_end: f64,
    /// Sorted by decreasing `h`.
    pub rows: Vec<ConvergenceRow>,
    pub fit: SlopeFit,
}

/// Global error at `t_end` for each step size.
pub fn convergence<P: Potential>(
    system: &MechanicalSystem<P>,
    cfg: &MethodConfig,
    initial: &PhasePoint,
    h_list: &[f64],
    t_end: f64,
    component: Component,
) -> Result<ConvergenceReport> {
    check_h_list(h_list)?;
    cfg.validate()?;
    let steps: Vec<usize> = h_list.iter().map(|h| steps_for(t_end, *h)).collect::<Result<_>>()?;
    let h_min = h_list.iter().copied().fold(f64::INFINITY, f64::min);
    let exact = reference_end(system, initial, t_end, h_min / 100.0)?;
    let mut rows: Vec<ConvergenceRow> = h_list
        .par_iter()
        .zip(&steps)
        .map(|(&h, &n)| {
            let start = Instant::now();
            let traj = run(system, cfg, initial, h, n)?;
            if let Some(e) = traj.truncated {
                return Err(e);
            }
            Ok(ConvergenceRow {
                h,
                steps: n,
                error: component.error(traj.last(), &exact),
                wall_time: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| b.h.total_cmp(&a.h));
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    Ok(ConvergenceReport {
        system: system.name().to_string(),
        method: cfg.method,
        component,
        t_end,
        fit: fit_slope(&hs, &errs)?,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdOrderRow {
    pub h: f64,
    pub q1: Vec<f64>,
    pub ld: f64,
    pub exact: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdOrderReport {
    pub system: String,
    pub n: usize,
    pub m: usize,
    pub rows: Vec<LdOrderRow>,
    pub fit: SlopeFit,
}

/// `|L_d - L_d^E|` against `h` with `q1` taken from the exact flow through
/// the initial state.
pub fn ld_order<P: Potential>(
    system: &MechanicalSystem<P>,
    n: usize,
    m: usize,
    initial: &PhasePoint,
    h_list: &[f64],
) -> Result<LdOrderReport> {
    check_h_list(h_list)?;
    let sho = oracle::is_unit_oscillator(system);
    let mut rows: Vec<LdOrderRow> = h_list
        .par_iter()
        .map(|&h| {
            let q1 = oracle::exact_flow(system, initial, h, h / 1000.0)?.q;
            let ld = DiscreteLagrangian::new(system, n, m, h)?
                .evaluate(&initial.q, &q1, None, false, Default::default())?
                .value;
            let exact = if sho {
                oracle::sho_exact_ld(initial.q[0], q1[0], h)
            } else {
                oracle::exact_ld(system, &initial.q, &q1, h)?.value
            };
            Ok(LdOrderRow {
                h,
                q1,
                ld,
                exact,
                error: (ld - exact).abs(),
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| b.h.total_cmp(&a.h));
    let hs: Vec<f64> = rows.iter().map(|r| r.h).collect();
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    Ok(LdOrderReport {
        system: system.name().to_string(),
        n,
        m,
        fit: fit_slope(&hs, &errs)?,
        rows,
    })
}

#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    /// `H(t) - H(0)`.
    pub energy_error: Vec<f64>,
    pub max_abs_error: f64,
    /// Least-squares slope of `|H(t) - H(0)|` against `t`.
    pub drift_slope: f64,
    pub trajectory: Trajectory,
}

pub fn energy_study<P: Potential>(
    system: &MechanicalSystem<P>,
    cfg: &MethodConfig,
    initial: &PhasePoint,
    h: f64,
    steps: usize,
) -> Result<EnergyReport> {
    let trajectory = run(system, cfg, initial, h, steps)?;
    if let Some(e) = &trajectory.truncated {
        return Err(e.clone());
    }
    Ok(energy_report(system, trajectory))
}

pub(crate) fn energy_report<P: Potential>(system: &MechanicalSystem<P>, trajectory: Trajectory) -> EnergyReport {
    let h0 = system.hamiltonian(&trajectory.points[0].q, &trajectory.points[0].p);
    let times: Vec<f64> = trajectory.points.iter().map(|x| x.t).collect();
    let energy_error: Vec<f64> = trajectory
        .points
        .iter()
        .map(|x| system.hamiltonian(&x.q, &x.p) - h0)
        .collect();
    let abs: Vec<f64> = energy_error.iter().map(|e| e.abs()).collect();
    EnergyReport {
        max_abs_error: abs.iter().copied().fold(0.0, f64::max),
        drift_slope: linear_slope(&times, &abs),
        times,
        energy_error,
        trajectory,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkPrecisionRow {
    pub method: Method,
    pub h: f64,
    pub wall_time: f64,
    pub error: f64,
}

/// Wall time and final global error for every method and step size. Runs
/// are sequential so timings do not compete for cores.
pub fn work_precision<P: Potential>(
    system: &MechanicalSystem<P>,
    configs: &[MethodConfig],
    initial: &PhasePoint,
    h_list: &[f64],
    t_end: f64,
) -> Result<Vec<WorkPrecisionRow>> {
    check_h_list(h_list)?;
    let h_min = h_list.iter().copied().fold(f64::INFINITY, f64::min);
    let exact = reference_end(system, initial, t_end, h_min / 100.0)?;
    let mut rows = Vec::new();
    for cfg in configs {
        for &h in h_list {
            let steps = steps_for(t_end, h)?;
            let start = Instant::now();
            let traj = run(system, cfg, initial, h, steps)?;
            let wall_time = start.elapsed().as_secs_f64();
            if let Some(e) = traj.truncated {
                return Err(e);
            }
            rows.push(WorkPrecisionRow {
                method: cfg.method,
                h,
                wall_time,
                error: Component::Phase.error(traj.last(), &exact),
            });
        }
    }
    Ok(rows)
}
