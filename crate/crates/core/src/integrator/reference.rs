//! Classical explicit RK4 for tiny-step reference solutions.

use super::PhasePoint;
use crate::error::{Error, Result};
use crate::jets::Scalar;
use crate::systems::{MechanicalSystem, Potential};

/// One RK4 step of `y' = f(y)`.
pub fn rk4_step<S: Scalar>(f: &impl Fn(&[S]) -> Vec<S>, y: &[S], h: f64) -> Vec<S> {
    let axpy = |y: &[S], k: &[S], a: f64| -> Vec<S> {
        y.iter().zip(k).map(|(y, k)| y.clone() + k.scale(a)).collect()
    };
    let k1 = f(y);
    let k2 = f(&axpy(y, &k1, 0.5 * h));
    let k3 = f(&axpy(y, &k2, 0.5 * h));
    let k4 = f(&axpy(y, &k3, h));
    (0..y.len())
        .map(|i| {
            let incr = k1[i].clone() + (k2[i].clone() + k3[i].clone()).scale(2.0) + k4[i].clone();
            y[i].clone() + incr.scale(h / 6.0)
        })
        .collect()
}

/// `steps` RK4 steps of size `h`.
pub fn rk4<S: Scalar>(f: impl Fn(&[S]) -> Vec<S>, y0: &[S], h: f64, steps: usize) -> Vec<S> {
    let mut y = y0.to_vec();
    for _ in 0..steps {
        y = rk4_step(&f, &y, h);
    }
    y
}

/// Second-order form `y = (q, v)`, `y' = (v, f(q))`.
pub fn second_order_field<S: Scalar, P: Potential>(
    system: &MechanicalSystem<P>,
) -> impl Fn(&[S]) -> Vec<S> + '_ {
    move |y: &[S]| {
        let d = system.dim();
        let f = system.force(&y[..d]);
        y[d..2 * d].iter().cloned().chain(f).collect()
    }
}

/// Exact flow over time `t` approximated by RK4 with step at most `h_max`.
pub fn flow<P: Potential>(
    system: &MechanicalSystem<P>,
    start: &PhasePoint,
    t: f64,
    h_max: f64,
) -> Result<PhasePoint> {
    start.check(system)?;
    if h_max <= 0.0 || h_max.is_nan() {
        return Err(Error::usage("reference step must be positive"));
    }
    let steps = (t.abs() / h_max).ceil().max(1.0) as usize;
    let h = t / steps as f64;
    let d = system.dim();
    let y0: Vec<f64> = start.q.iter().copied().chain(system.velocity(&start.p)).collect();
    let y = rk4(second_order_field(system), &y0, h, steps);
    Ok(PhasePoint::new(y[..d].to_vec(), system.momentum(&y[d..]), start.t + t))
}
