//! Restriction constants as operator norms, and kernel norm bounds.

pub mod bounds;
pub mod eigen;
pub mod gram;
pub mod matrix;

pub use bounds::{schur_bound, ttstar_bound};
pub use eigen::{jacobi_eigenvalues, lanczos, power_iteration, start_vector, EigenEstimate, HermitianOperator};
pub use gram::{
    dense_gram, gram_entry, opnorm_dense, opnorm_iterative, opnorm_of_operator, GramOperator,
    IterativeOptions, OpNormMethod, OpNormResult, DENSE_CAP,
};
pub use matrix::{KernelMatrix, KernelTag};
