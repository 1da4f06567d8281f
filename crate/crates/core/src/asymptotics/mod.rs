//! Closed-form kernels of the upper-bound argument and numerical checks of
//! their size estimates.

pub mod correlation;
pub mod profile;
pub mod stationary;
pub mod sums;

pub use correlation::{
    correlation_crossover, correlation_d, correlation_matrix, kernel_bands, row_sum_scaling,
    row_sum_target, stationary_matrix, KernelBands,
};
pub use profile::{
    correlation_weight, critical_window_sum, phase_profile_checks, PhaseProfile, ProfileReport,
    WindowSum,
};
pub use stationary::{
    critical_phase, fit_c_sta, nonstationary_integral, profile_block_constant, stationary_c,
    stationary_integral, stationary_lambda, stationary_pairs, StationaryFit, StationaryModel,
    CUTOFF_HALF_WIDTH, KERNEL_BLOCK_CONSTANT,
};
pub use sums::{
    derivative_test_check, partial_summation_bound, run_suite, v1_norm, DerivativeTest, Suite,
    SuiteReport, SumPhase, DERIVATIVE_RATIO_CAP,
};
