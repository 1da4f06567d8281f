//! Numerical experiments on restriction estimates for weighted Gauss sums
//! along monomial curves `x ↦ (x, x^k)`.

pub mod asymptotics;
pub mod error;
pub mod exp_core;
pub mod lower_bounds;
pub mod scaling;
pub mod spectral;

pub use error::{LabError, Result};
