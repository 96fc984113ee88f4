//! Lagrangian and particle discretizations of the periodic Camassa–Holm
//! equation and its two-component extension, with the classical comparison
//! schemes, exact reference solutions and a convergence harness.

pub mod error;
pub mod grid;
pub mod harness;
pub mod metrics;
pub mod multipeakon;
pub mod ode;
pub mod reference_schemes;
pub mod reference_solutions;
pub mod variational;

pub use error::{Error, Result};
