//! Numerical laboratory for hypocoercive decay of linear kinetic equations
//! `∂t f + T f = L f` around a global equilibrium.

pub mod cli;
pub mod equilibria;
pub mod error;
pub mod operators;
pub mod simulator;
pub mod spectral;
pub mod toy;

pub use error::{Error, Result};
