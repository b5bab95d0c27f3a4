//! Taylor coefficients of the Euler–Lagrange flow through a phase point.
//!
//! For `q'' = f(q)` the exact local solution through `(q, v)` has
//! `c_0 = q`, `c_1 = v` and `(k+1)(k+2) c_{k+2} = [f(q(.))]_k`, where the
//! right-hand side is the `k`-th Taylor coefficient of the force along the
//! partially known series. It only involves `c_0..c_k`, so the coefficients
//! are filled in degree by degree.

use crate::error::{Error, Result};
use crate::jets::{Jet, Scalar};
use crate::systems::{MechanicalSystem, Potential};

/// Jet of the exact solution through `(q, v)`, one series per component.
#[derive(Debug, Clone, PartialEq)]
pub struct ProlongationJet<S = f64> {
    components: Vec<Jet<S>>,
}

impl<S: Scalar> ProlongationJet<S> {
    pub fn order(&self) -> usize {
        self.components[0].order()
    }

    pub fn components(&self) -> &[Jet<S>] {
        &self.components
    }

    /// Taylor coefficient vector `c_k`.
    pub fn coefficient(&self, k: usize) -> Vec<S> {
        self.components.iter().map(|c| c.coeff(k)).collect()
    }

    /// Derivative vector `q^(k) = k! c_k`.
    pub fn derivative(&self, k: usize) -> Result<Vec<S>> {
        self.components.iter().map(|c| c.derivative(k)).collect()
    }
}

/// Build the solution jet of order `order` through `(q, v)`.
pub fn solution_jet<S: Scalar, P: Potential>(
    system: &MechanicalSystem<P>,
    q: &[S],
    v: &[S],
    order: usize,
) -> Result<ProlongationJet<S>> {
    system.check_dim("q", q)?;
    system.check_dim("v", v)?;
    if order < 2 {
        return Err(Error::usage(format!("prolongation order must be at least 2, got {order}")));
    }
    if let Some(max) = system.potential().max_force_order() {
        if order - 2 > max {
            return Err(Error::Capability(format!(
                "system `{}` supports force derivatives up to order {max}, but order {} is needed",
                system.name(),
                order - 2
            )));
        }
    }
    let mut coeffs: Vec<Vec<S>> = q
        .iter()
        .zip(v)
        .map(|(qi, vi)| {
            let mut c = Vec::with_capacity(order + 1);
            c.push(qi.clone());
            c.push(vi.clone());
            c
        })
        .collect();
    for k in 0..=order - 2 {
        let partial: Vec<Jet<S>> = coeffs.iter().map(|c| Jet::new(c[..=k].to_vec())).collect();
        let f = system.force(&partial);
        let denom = ((k + 1) * (k + 2)) as f64;
        for (c, fi) in coeffs.iter_mut().zip(f) {
            c.push(fi.coeff(k).scale(1.0 / denom));
        }
    }
    Ok(ProlongationJet {
        components: coeffs.into_iter().map(Jet::new).collect(),
    })
}
