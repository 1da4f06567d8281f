use num_complex::Complex64;
use serde::Serialize;

use crate::asymptotics::stationary::{stationary_c_unchecked, StationaryModel};
use crate::error::{LabError, Result};
use crate::scaling::{fit_points, FitModel, FitResult};
use crate::spectral::{KernelMatrix, KernelTag};

/// `c_{n,m}` on the whole block.
pub fn stationary_matrix(model: &StationaryModel) -> Result<KernelMatrix> {
    let (lo, hi) = model.block();
    let dim = (hi - lo + 1) as usize;
    KernelMatrix::hermitian_from_fn(lo, dim, KernelTag::StationaryC, |n, m| {
        stationary_c_unchecked(n, m, model)
    })
}

/// `d_{n,m} = Σ_x c_{n,x}·c_{x,m}` over the integers of the block.
pub fn correlation_d(n: i64, m: i64, model: &StationaryModel) -> Result<Complex64> {
    if !model.contains(n) || !model.contains(m) {
        let (lo, hi) = model.block();
        return Err(LabError::invalid(format!("({n}, {m}) is outside the block [{lo}, {hi}]")));
    }
    let (lo, hi) = model.block();
    Ok((lo..=hi)
        .map(|x| stationary_c_unchecked(n, x, model) * stationary_c_unchecked(x, m, model))
        .sum())
}

/// All of `d`, as the square of the `c` matrix.
pub fn correlation_matrix(model: &StationaryModel) -> Result<KernelMatrix> {
    Ok(stationary_matrix(model)?.square().with_tag(KernelTag::CorrelationD))
}

/// `N^{(2k−1)/(3(k−1))}`, where the two regimes of `d` meet.
pub fn correlation_crossover(n: u64, k: u32) -> f64 {
    let kf = k as f64;
    (n as f64).powf((2.0 * kf - 1.0) / (3.0 * (kf - 1.0)))
}

/// Normalized sizes of `c` and `d` at one scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelBands {
    pub n: u64,
    /// `max |d|·N^{1/(k−1)}` over `|n − m| ≤ crossover`.
    pub near: f64,
    /// `max |d|·|n−m|^{3/2} / N^{(2k−3)/(2(k−1))}` over `|n − m| ≥ crossover`.
    pub far: f64,
    /// `max_n Σ_m |d_{n,m}|`.
    pub row_sum: f64,
    /// `max_n Σ_m |c_{n,m}| / N^{(k−2)/(2(k−1))}`.
    pub schur_witness: f64,
    /// `|ttstar_bound(c) − √row_sum|`.
    pub ttstar_defect: f64,
}

pub fn kernel_bands(model: &StationaryModel) -> Result<KernelBands> {
    let c = stationary_matrix(model)?;
    let d = c.square();
    let k = model.k as f64;
    let nf = model.n as f64;
    let cross = correlation_crossover(model.n, model.k);
    let dim = d.dim();
    let (mut near, mut far) = (0.0f64, 0.0f64);
    for i in 0..dim {
        for j in 0..dim {
            let gap = (i as f64 - j as f64).abs();
            let v = d.at(i, j).norm();
            if gap <= cross {
                near = near.max(v * nf.powf(1.0 / (k - 1.0)));
            }
            if gap >= cross {
                far = far.max(v * gap.powf(1.5) / nf.powf((2.0 * k - 3.0) / (2.0 * (k - 1.0))));
            }
        }
    }
    let row_sum = d.abs_row_sums().into_iter().fold(0.0, f64::max);
    let schur = c.abs_row_sums().into_iter().fold(0.0, f64::max);
    let ttstar = crate::spectral::ttstar_bound(&c)?;
    Ok(KernelBands {
        n: model.n,
        near,
        far,
        row_sum,
        schur_witness: schur / nf.powf((k - 2.0) / (2.0 * (k - 1.0))),
        ttstar_defect: (ttstar - row_sum.sqrt()).abs(),
    })
}

/// `2(k−2)/(3(k−1))`.
pub fn row_sum_target(k: u32) -> f64 {
    let kf = k as f64;
    2.0 * (kf - 2.0) / (3.0 * (kf - 1.0))
}

/// `max_n Σ_m |d_{n,m}|` at each scale and its fitted growth exponent.
pub fn row_sum_scaling(
    model: &StationaryModel,
    scales: &[u64],
) -> Result<(Vec<(u64, f64)>, FitResult)> {
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::invalid("scales must be strictly increasing"));
    }
    let rows = scales
        .iter()
        .map(|&n| {
            let d = correlation_matrix(&model.at_scale(n)?)?;
            Ok((n, d.abs_row_sums().into_iter().fold(0.0, f64::max)))
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_points(&rows, FitModel::PurePower)?;
    Ok((rows, fit))
}
