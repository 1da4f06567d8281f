//! Row-sum bounds for the spectral norm of a kernel.

use crate::error::Result;
use crate::spectral::matrix::KernelMatrix;

/// `max_n Σ_m |c_{n,m}| + max_m Σ_n |c_{n,m}|`. Dominates `|a*Ca| / ‖a‖²`
/// (twice the Schur test bound, which is what the `2|a_n||a_m| ≤ |a_n|² + |a_m|²`
/// argument gives directly).
pub fn schur_bound(c: &KernelMatrix) -> f64 {
    let rows = c.abs_row_sums().into_iter().fold(0.0, f64::max);
    let cols = c.abs_col_sums().into_iter().fold(0.0, f64::max);
    rows + cols
}

/// `(max_n Σ_m |d_{n,m}|)^{1/2}` with `d = C·C`; for Hermitian `C` this
/// dominates `|a*Ca| / ‖a‖²`.
pub fn ttstar_bound(c: &KernelMatrix) -> Result<f64> {
    c.require_hermitian()?;
    let d = c.square();
    Ok(d.abs_row_sums().into_iter().fold(0.0, f64::max).sqrt())
}
