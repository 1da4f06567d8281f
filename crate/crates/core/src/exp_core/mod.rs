//! Exponential sums, quadrature and oscillatory integrals.

pub mod coeffs;
pub(crate) mod kernel;
pub mod phase;
pub mod quadrature;
pub mod sums;

pub use coeffs::CoefficientVector;
pub use phase::{e, PhaseSpec, Polynomial, ScalarPhase};
pub use quadrature::{
    build_grid, grid_for_variation, GridLayout, GridOptions, QuadratureGrid, DEFAULT_NODE_BUDGET,
    DEFAULT_OVERSAMPLING,
};
pub use sums::{
    eval_chirps, eval_sum, lp_norm, oscillatory_integral, plateau, sample_sum, smooth_step, Cutoff,
    PhaseFunction, SumOperator, SumSample,
};
