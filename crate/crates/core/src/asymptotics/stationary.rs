use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exp_core::{
    e, grid_for_variation, oscillatory_integral, Cutoff, GridOptions, PhaseFunction,
};

/// Half-width of the cut-off around the critical point, in the rescaled
/// variable `t = (n+m)^{1/(k−1)}(x − x₀)`.
pub const CUTOFF_HALF_WIDTH: f64 = 0.75;

/// Block constant used for the coefficient kernels. Close-to-one values
/// leave no pair above the stationary threshold at desk scale.
pub const KERNEL_BLOCK_CONSTANT: f64 = 0.5;

/// Block constant for the phase-profile checks.
pub fn profile_block_constant(k: u32) -> f64 {
    1.0 - 1.0 / (10.0 * k as f64)
}

/// Leading-order model of the cut-off Gram entries on the block
/// `[C_k·N, N]` for the phase `n·x − n²·x^k/k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StationaryModel {
    pub k: u32,
    pub n: u64,
    pub c_sta: Complex64,
    pub c_k: f64,
    /// `max |true − model|·|n − m|` over the fitting sample, when fitted.
    pub fit_residual: Option<f64>,
}

impl StationaryModel {
    pub fn new(k: u32, n: u64, c_sta: Complex64, c_k: f64) -> Result<Self> {
        if k < 3 {
            return Err(LabError::invalid(format!("k must satisfy k >= 3, got {k}")));
        }
        if !(c_k > 0.0 && c_k < 1.0) {
            return Err(LabError::invalid(format!("C_k must lie in (0, 1), got {c_k}")));
        }
        if n < 4 {
            return Err(LabError::invalid(format!("N must be >= 4, got {n}")));
        }
        if !(c_sta.norm() > 0.0 && c_sta.re.is_finite() && c_sta.im.is_finite()) {
            return Err(LabError::invalid("C_sta must be finite and nonzero"));
        }
        Ok(StationaryModel { k, n, c_sta, c_k, fit_residual: None })
    }

    /// Same constants at another scale.
    pub fn at_scale(&self, n: u64) -> Result<Self> {
        Self::new(self.k, n, self.c_sta, self.c_k)
    }

    /// `N^{1/(k−1)}`.
    pub fn threshold(&self) -> f64 {
        (self.n as f64).powf(1.0 / (self.k - 1) as f64)
    }

    /// `[⌈C_k·N⌉, N]`.
    pub fn block(&self) -> (i64, i64) {
        ((self.c_k * self.n as f64).ceil() as i64, self.n as i64)
    }

    pub fn contains(&self, n: i64) -> bool {
        let (lo, hi) = self.block();
        (lo..=hi).contains(&n)
    }

    /// Whether `(n, m)` lies in the stationary regime `|n − m| ≥ N^{1/(k−1)}`.
    pub fn is_stationary(&self, n: i64, m: i64) -> bool {
        n != m && (n - m).abs() as f64 >= self.threshold() * (1.0 - 1e-12)
    }
}

fn inv(k: u32) -> f64 {
    1.0 / (k - 1) as f64
}

/// `e((k−1)(n−m) / (k(n+m)^{1/(k−1)}))`, the phase at the critical point.
pub fn critical_phase(n: i64, m: i64, k: u32) -> Complex64 {
    let (nf, mf, kf) = (n as f64, m as f64, k as f64);
    e((kf - 1.0) * (nf - mf) / (kf * (nf + mf).powf(inv(k))))
}

/// `|n−m|^{1/2}·|n+m|^{1/(2(k−1))}`.
fn amplitude_scale(n: i64, m: i64, k: u32) -> f64 {
    ((n - m).abs() as f64).sqrt() * ((n + m).abs() as f64).powf(0.5 * inv(k))
}

/// `λ = (m² − n²)/(n+m)^{k/(k−1)}`.
pub fn stationary_lambda(n: i64, m: i64, k: u32) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    (mf * mf - nf * nf) / (nf + mf).powf(k as f64 * inv(k))
}

/// The model coefficient; zero off the stationary regime.
pub fn stationary_c(n: i64, m: i64, model: &StationaryModel) -> Result<Complex64> {
    if !model.contains(n) || !model.contains(m) {
        let (lo, hi) = model.block();
        return Err(LabError::invalid(format!("({n}, {m}) is outside the block [{lo}, {hi}]")));
    }
    Ok(stationary_c_unchecked(n, m, model))
}

pub(crate) fn stationary_c_unchecked(n: i64, m: i64, model: &StationaryModel) -> Complex64 {
    if !model.is_stationary(n, m) {
        return Complex64::new(0.0, 0.0);
    }
    let c = if m < n { model.c_sta.conj() } else { model.c_sta };
    c * critical_phase(n, m, model.k) / amplitude_scale(n, m, model.k)
}

/// `∫ e((n−m)(x − (n+m)x^k/k))·η((n+m)^{1/(k−1)}(x − x₀)) dx` by quadrature.
pub fn stationary_integral(n: i64, m: i64, k: u32, opts: GridOptions) -> Result<Complex64> {
    if n == m || n + m <= 0 {
        return Err(LabError::invalid(format!("need n != m and n + m > 0, got ({n}, {m})")));
    }
    let (nf, mf, kf) = (n as f64, m as f64, k as f64);
    let scale = (nf + mf).powf(inv(k));
    let x0 = 1.0 / scale;
    let d = CUTOFF_HALF_WIDTH;
    let (lo, hi) = (x0 * (1.0 - d), x0 * (1.0 + d));
    // φ' = (n−m)(1 − (x/x₀)^{k−1}) is largest at an end of the support.
    let slope = (nf - mf).abs()
        * ((1.0 + d).powi(k as i32 - 1) - 1.0).max(1.0 - (1.0 - d).powi(k as i32 - 1));
    // The cut-off itself needs resolving: at least 64 cycles' worth of nodes.
    let grid = grid_for_variation(lo, hi, (slope * (hi - lo)).max(64.0), opts.oversampling, opts.node_budget)?;
    let f = PhaseFunction::Custom(std::sync::Arc::new(move |x: f64| {
        (nf - mf) * (x - (nf + mf) * x.powi(k as i32) / kf)
    }));
    let cutoff = Cutoff::Plateau { center: x0, scale, delta: d };
    oscillatory_integral(&f, &cutoff, lo, hi, &grid)
}

/// Non-stationary part: `∫_0^1 e(φ_{n,m})·(1 − η(…))`.
pub fn nonstationary_integral(n: i64, m: i64, k: u32, opts: GridOptions) -> Result<Complex64> {
    if n == m || n + m <= 0 {
        return Err(LabError::invalid(format!("need n != m and n + m > 0, got ({n}, {m})")));
    }
    let (nf, mf, kf) = (n as f64, m as f64, k as f64);
    let scale = (nf + mf).powf(inv(k));
    let slope = (nf - mf).abs() * (1.0 + nf + mf);
    let grid = grid_for_variation(0.0, 1.0, slope.max(64.0), opts.oversampling, opts.node_budget)?;
    let f = PhaseFunction::Custom(std::sync::Arc::new(move |x: f64| {
        (nf - mf) * (x - (nf + mf) * x.powi(k as i32) / kf)
    }));
    let cutoff = Cutoff::Complement { center: 1.0 / scale, scale, delta: CUTOFF_HALF_WIDTH };
    oscillatory_integral(&f, &cutoff, 0.0, 1.0, &grid)
}

/// `count` distinct random pairs `n < m` in the block with `m − n` above
/// the stationary threshold.
pub fn stationary_pairs(model: &StationaryModel, count: usize, seed: u64) -> Result<Vec<(i64, i64)>> {
    let (lo, hi) = model.block();
    let gap = model.threshold().ceil() as i64;
    if hi - lo < gap {
        return Err(LabError::invalid("block is narrower than the stationary threshold"));
    }
    let available = {
        let w = hi - lo - gap + 1;
        (w * (w + 1) / 2) as usize
    };
    if count > available {
        return Err(LabError::invalid(format!("only {available} stationary pairs exist")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::BTreeSet::new();
    while seen.len() < count {
        let n = rng.gen_range(lo..=hi - gap);
        let m = rng.gen_range(n + gap..=hi);
        if model.is_stationary(n, m) {
            seen.insert((n, m));
        }
    }
    Ok(seen.into_iter().collect())
}

/// Exponent of `λ` in the fitting weights.
pub const FIT_WEIGHT_POWER: f64 = 3.5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryFit {
    pub c_sta: Complex64,
    /// `max |true − model|·|n − m|` over the sample.
    pub residual: f64,
    /// Weighted spread of the normalized samples around `C_sta`, relative
    /// to `|C_sta|`.
    pub spread: f64,
    pub samples: usize,
}

/// Fits `C_sta` from quadrature of the true cut-off integrals.
///
/// After removing the critical phase and the amplitude, each sample is
/// `z = λ^{1/2}·∫e(λP)η`, a function of `λ` alone that tends to `C_sta`
/// with error `O(λ^{−1/2})` or better. Measured, `|z − C_sta|` falls off
/// like `λ^{−7/4}`, so the fit is the least-squares constant with the
/// matching inverse-variance weights `λ^{7/2}`. Unweighted, the pairs just
/// above the threshold (`λ` near 1) dominate and bias the constant.
pub fn fit_c_sta(
    n: u64,
    k: u32,
    c_k: f64,
    pairs: &[(i64, i64)],
    opts: GridOptions,
) -> Result<(StationaryModel, StationaryFit)> {
    if pairs.len() < 2 {
        return Err(LabError::invalid("fitting C_sta needs at least 2 sample pairs"));
    }
    let probe = StationaryModel::new(k, n, Complex64::new(1.0, 0.0), c_k)?;
    for &(a, b) in pairs {
        if !probe.contains(a) || !probe.contains(b) || !probe.is_stationary(a, b) {
            return Err(LabError::invalid(format!("pair ({a}, {b}) is not in the stationary regime")));
        }
    }
    let integrals = pairs
        .par_iter()
        .map(|&(a, b)| stationary_integral(a, b, k, opts))
        .collect::<Result<Vec<_>>>()?;
    let (mut weights, mut zs) = (Vec::new(), Vec::new());
    for (&(a, b), i) in pairs.iter().zip(&integrals) {
        let z = i * critical_phase(a, b, k).conj() * amplitude_scale(a, b, k);
        zs.push(if b < a { z.conj() } else { z });
        weights.push(stationary_lambda(a, b, k).powf(FIT_WEIGHT_POWER));
    }
    let total: f64 = weights.iter().sum();
    let c_sta = zs.iter().zip(&weights).map(|(z, w)| z * w).sum::<Complex64>() / total;
    let spread = (zs.iter().zip(&weights).map(|(z, w)| w * (z - c_sta).norm_sqr()).sum::<f64>()
        / total)
        .sqrt()
        / c_sta.norm();
    let mut model = StationaryModel::new(k, n, c_sta, c_k)?;
    let residual = pairs
        .iter()
        .zip(&integrals)
        .map(|(&(a, b), i)| (i - stationary_c_unchecked(a, b, &model)).norm() * (a - b).abs() as f64)
        .fold(0.0, f64::max);
    model.fit_residual = Some(residual);
    Ok((model, StationaryFit { c_sta, residual, spread, samples: pairs.len() }))
}
