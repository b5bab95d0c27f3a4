//! Separable mechanical systems `L(q, v) = 1/2 v^T M v - V(q)`.
//!
//! A system is a constant mass matrix plus a [`Potential`] that can be
//! evaluated on any [`Scalar`]. The force `f(q) = -M^{-1} grad V(q)` is always
//! derived from the potential, so the two can never disagree.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrator::PhasePoint;
use crate::jets::{Dual, Scalar};
use crate::linalg;

/// Potential energy evaluable on plain values, duals and jets.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;

    fn energy<S: Scalar>(&self, q: &[S]) -> S;

    /// `grad V`; the default seeds duals through [`Potential::energy`].
    fn gradient<S: Scalar>(&self, q: &[S]) -> Vec<S> {
        let n = q.len();
        let seeded = Dual::seed(q, 0, n);
        let e = self.energy(&seeded);
        (0..n).map(|i| e.partial(i)).collect()
    }

    /// Highest time-derivative order of the force along a curve that this
    /// potential supports, or `None` if unlimited.
    fn max_force_order(&self) -> Option<usize> {
        None
    }
}

/// The example systems: harmonic oscillator, planar pendulum and unforced
/// undamped Duffing oscillator, all with unit mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Sho,
    Pendulum,
    Duffing,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Sho, Builtin::Pendulum, Builtin::Duffing];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Sho => "sho",
            Builtin::Pendulum => "pendulum",
            Builtin::Duffing => "duffing",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Builtin::Sho => "harmonic oscillator, H = p^2/2 + q^2/2",
            Builtin::Pendulum => "planar pendulum (m = l = 1), H = p^2/2 + 1 - cos q",
            Builtin::Duffing => "unforced undamped Duffing, H = p^2/2 - q^2/2 + q^4/4",
        }
    }

    pub fn system(self) -> MechanicalSystem<Builtin> {
        MechanicalSystem::new(self.name(), self, Mass::identity(1))
            .expect("builtin systems are well formed")
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sho" => Ok(Builtin::Sho),
            "pendulum" => Ok(Builtin::Pendulum),
            "duffing" => Ok(Builtin::Duffing),
            other => Err(Error::usage(format!(
                "unknown system `{other}` (expected sho, pendulum or duffing)"
            ))),
        }
    }
}

impl Potential for Builtin {
    fn dim(&self) -> usize {
        1
    }

    fn energy<S: Scalar>(&self, q: &[S]) -> S {
        let x = &q[0];
        match self {
            Builtin::Sho => x.powi(2).scale(0.5),
            // normalized so that V(0) = 0
            Builtin::Pendulum => S::one() - x.cos(),
            Builtin::Duffing => x.powi(4).scale(0.25) - x.powi(2).scale(0.5),
        }
    }

    fn gradient<S: Scalar>(&self, q: &[S]) -> Vec<S> {
        let x = &q[0];
        let g = match self {
            Builtin::Sho => x.clone(),
            Builtin::Pendulum => x.sin(),
            Builtin::Duffing => x.powi(3) - x.clone(),
        };
        vec![g]
    }
}

/// Look up a builtin system by name.
pub fn builtin(name: &str) -> Result<MechanicalSystem<Builtin>> {
    Ok(name.parse::<Builtin>()?.system())
}

/// Constant symmetric positive-definite mass matrix and its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Mass {
    matrix: Vec<Vec<f64>>,
    inverse: Vec<Vec<f64>>,
}

impl Mass {
    pub fn identity(dim: usize) -> Self {
        let id: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self {
            matrix: id.clone(),
            inverse: id,
        }
    }

    #[allow(clippy::needless_range_loop)]
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(Error::usage("mass matrix must be square and non-empty"));
        }
        for i in 0..n {
            for j in 0..i {
                let (a, b) = (matrix[i][j], matrix[j][i]);
                if (a - b).abs() > 1e-14 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::usage("mass matrix must be symmetric"));
                }
            }
        }
        if linalg::cholesky(&matrix).is_none() {
            return Err(Error::usage("mass matrix must be positive definite"));
        }
        let inverse = linalg::inverse(&matrix)
            .ok_or_else(|| Error::usage("mass matrix is numerically singular"))?;
        Ok(Self { matrix, inverse })
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.matrix
    }

    pub fn inverse(&self) -> &[Vec<f64>] {
        &self.inverse
    }

    pub fn apply<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        linalg::mat_vec(&self.matrix, x)
    }

    pub fn apply_inverse<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        linalg::mat_vec(&self.inverse, x)
    }
}

/// A separable mechanical system.
#[derive(Debug, Clone)]
pub struct MechanicalSystem<P = Builtin> {
    name: String,
    potential: P,
    mass: Mass,
}

impl<P: Potential> MechanicalSystem<P> {
    pub fn new(name: impl Into<String>, potential: P, mass: Mass) -> Result<Self> {
        if potential.dim() != mass.dim() {
            return Err(Error::usage(format!(
                "potential has dimension {} but mass matrix has {}",
                potential.dim(),
                mass.dim()
            )));
        }
        Ok(Self {
            name: name.into(),
            potential,
            mass,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    pub fn potential(&self) -> &P {
        &self.potential
    }

    pub fn mass(&self) -> &Mass {
        &self.mass
    }

    pub fn potential_energy<S: Scalar>(&self, q: &[S]) -> S {
        self.potential.energy(q)
    }

    /// `f(q) = -M^{-1} grad V(q)`.
    pub fn force<S: Scalar>(&self, q: &[S]) -> Vec<S> {
        let g = self.potential.gradient(q);
        self.mass.apply_inverse(&g).into_iter().map(|x| -x).collect()
    }

    /// `L(q, v) = 1/2 v^T M v - V(q)`.
    pub fn lagrangian<S: Scalar>(&self, q: &[S], v: &[S]) -> S {
        let mv = self.mass.apply(v);
        linalg::dot(v, &mv).scale(0.5) - self.potential.energy(q)
    }

    /// `H(q, p) = 1/2 p^T M^{-1} p + V(q)`.
    pub fn hamiltonian(&self, q: &[f64], p: &[f64]) -> f64 {
        let v = self.mass.apply_inverse(p);
        0.5 * linalg::dot(p, &v) + self.potential.energy(q)
    }

    pub fn velocity(&self, p: &[f64]) -> Vec<f64> {
        self.mass.apply_inverse(p)
    }

    pub fn momentum(&self, v: &[f64]) -> Vec<f64> {
        self.mass.apply(v)
    }

    pub(crate) fn check_dim(&self, what: &str, x: &[impl Sized]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::usage(format!(
                "{what} has length {} but the system dimension is {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Total energy `H(q, p)` at a phase point.
pub fn energy<P: Potential>(system: &MechanicalSystem<P>, state: &PhasePoint) -> Result<f64> {
    system.check_dim("q", &state.q)?;
    system.check_dim("p", &state.p)?;
    Ok(system.hamiltonian(&state.q, &state.p))
}
