//! Coefficient sequences that interfere constructively, and the norm ratios
//! they certify.

pub mod one_dim;
pub mod params;
pub mod planar;

pub use one_dim::{
    constant_coeff_ratio, interference_certificate, interference_coefficients,
    lipschitz_l2_check, lower_bound_ratio, Certificate, ConstantCoeffRatio, LipschitzProfile,
    LipschitzReport, CERTIFICATE_SAMPLES, SET_NODES_PER_HALF_WIDTH,
};
pub use params::{
    block_half_width, critical_point, ConstructionParams, InterferenceSet, SetFrame,
    TaylorBudget, DEFAULT_C_SMALL,
};
pub use planar::{
    cylinder_construction, moment_center, moment_curve_construction, moment_mixed_partial,
    PlanarConstruction, SeparableCoefficients,
};
