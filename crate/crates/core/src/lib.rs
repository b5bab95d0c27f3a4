//! Prolongation-collocation variational integrators.
//!
//! The discrete Lagrangian `L_d(q0, q1, h)` is the Euler–Maclaurin quadrature
//! of the Lagrangian along a two-point Hermite interpolant whose endpoint
//! derivatives come from Taylor jets of the flow. Its partial derivatives
//! generate a symplectic one-step map.
//!
//! ```
//! use pcvi::integrator::{run, MethodConfig, PhasePoint};
//! use pcvi::systems::builtin;
//!
//! let sho = builtin("sho").unwrap();
//! let start = PhasePoint::new(vec![1.0], vec![0.0], 0.0);
//! let traj = run(&sho, &MethodConfig::hem(3, 1), &start, 0.1, 10).unwrap();
//! assert!((traj.last().q[0] - 1f64.cos()).abs() < 1e-5);
//! ```

pub mod collocation;
pub mod discrete_lagrangian;
pub mod error;
pub mod harness;
pub mod hermite;
pub mod integrator;
pub mod jets;
pub mod linalg;
pub mod prolongation;
pub mod systems;

pub use error::{Error, Result};
