//! Jet (truncated Taylor series) and dual-number arithmetic.
//!
//! Everything downstream is written once, generically over [`Scalar`], and
//! evaluated on `f64`, on [`Dual`] for exact Jacobians, or on nested
//! combinations such as `Jet<Dual<f64>>` when endpoint derivative data must
//! itself be differentiated.

mod dual;
mod scalar;
mod series;

pub use dual::{jacobian, primal, Dual};
pub use scalar::{lift, values, Scalar};
pub use series::{derivative_values, Analytic, Jet};

pub(crate) use series::factorial;
