use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exp_core::{
    build_grid, e, eval_sum, grid_for_variation, CoefficientVector, GridOptions, PhaseSpec,
    QuadratureGrid, SumOperator, DEFAULT_NODE_BUDGET, DEFAULT_OVERSAMPLING,
};
use crate::lower_bounds::params::{ConstructionParams, InterferenceSet};

/// Quadrature nodes per half-width on interference sets.
pub const SET_NODES_PER_HALF_WIDTH: usize = 64;

/// Uniform samples per axis used by certificates.
pub const CERTIFICATE_SAMPLES: usize = 257;

/// Grid on `[lo, hi]` with at least `SET_NODES_PER_HALF_WIDTH` nodes per
/// half-width and at least `ρ` nodes per cycle of `variation`.
pub(crate) fn set_grid(lo: f64, hi: f64, variation: f64) -> Result<QuadratureGrid> {
    let rho = DEFAULT_OVERSAMPLING;
    let floor = (2 * SET_NODES_PER_HALF_WIDTH) as f64 / rho;
    grid_for_variation(lo, hi, variation.max(floor), rho, DEFAULT_NODE_BUDGET)
}

pub(crate) fn samples(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Unimodular coefficients on the block `|n − n₀| ≤ M` whose phases cancel
/// the linear and quadratic Taylor terms of `ψ(x_N, ·)` at `n₀`, so that
/// all characters line up near `x_N`.
pub fn interference_coefficients(
    params: &ConstructionParams,
    phase: &PhaseSpec,
) -> Result<CoefficientVector> {
    phase.require_1d()?;
    let x = params.x_n;
    let n0 = params.center as f64;
    let phi = phase.profile(x);
    // ψ = n·x − n²·φ(x)
    let psi_n = x - 2.0 * n0 * phi;
    let psi_nn = -2.0 * phi;
    let (lo, hi) = params.block();
    CoefficientVector::from_fn(lo, hi, |n| {
        let t = (n - params.center) as f64;
        e(-psi_n * t - 0.5 * psi_nn * t * t)
    })
}

fn largest_index(a: &CoefficientVector) -> u64 {
    a.lo().unsigned_abs().max(a.hi().unsigned_abs())
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(LabError::invalid(format!("p must be finite and >= 1, got {p}")));
    }
    Ok(())
}

/// `(∫_set |S|^p)^{1/p} / ‖a‖₂`, a lower bound for the same ratio over any
/// interval containing the set.
pub fn lower_bound_ratio(
    a: &CoefficientVector,
    phase: &PhaseSpec,
    p: f64,
    set: &InterferenceSet,
) -> Result<f64> {
    check_exponent(p)?;
    if set.dimension() != 1 {
        return Err(LabError::invalid("one-dimensional phases need a one-dimensional set"));
    }
    let (lo, hi) = set.bounds(0);
    let variation = phase.slope_bound(largest_index(a), lo, hi) * (hi - lo);
    let grid = set_grid(lo, hi, variation)?;
    let op = SumOperator::new(phase, &grid, a.lo(), a.hi())?;
    Ok(op.integrate_abs_pow(a, p)?.powf(1.0 / p) / a.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    /// Smallest `|S|` over the sampled set.
    pub min_abs: f64,
    /// Number of nonzero coefficients.
    pub active: usize,
    pub threshold: f64,
    pub passed: bool,
}

impl Certificate {
    pub(crate) fn new(min_abs: f64, active: usize, threshold: f64) -> Self {
        Certificate { min_abs, active, threshold, passed: min_abs >= threshold * active as f64 }
    }

    /// `min |S| / active`.
    pub fn efficiency(&self) -> f64 {
        self.min_abs / self.active as f64
    }
}

/// Samples `|S|` on the set and checks `min |S| ≥ threshold·active`.
pub fn interference_certificate(
    a: &CoefficientVector,
    phase: &PhaseSpec,
    set: &InterferenceSet,
    threshold: f64,
) -> Result<Certificate> {
    if set.dimension() != 1 {
        return Err(LabError::invalid("one-dimensional phases need a one-dimensional set"));
    }
    let (lo, hi) = set.bounds(0);
    let values = eval_sum(a, phase, &samples(lo, hi, CERTIFICATE_SAMPLES))?;
    Ok(Certificate::new(min_abs(&values), a.active_count(), threshold))
}

/// Both ratios for `a_n ≡ 1` on `[−N, N]` and the standard phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantCoeffRatio {
    /// Over `|x| ≤ 1/N`.
    pub near_origin: f64,
    /// Over `(−1, 1)`.
    pub full_interval: f64,
}

/// `L^p/ℓ²` ratios for constant coefficients. `|S|` is even in `x` here,
/// so the full interval is integrated on `[0, 1]` and doubled.
pub fn constant_coeff_ratio(n: u64, k: u32, p: f64, opts: GridOptions) -> Result<ConstantCoeffRatio> {
    check_exponent(p)?;
    if p < 2.0 {
        return Err(LabError::invalid(format!("p must be >= 2, got {p}")));
    }
    if n == 0 {
        return Err(LabError::invalid("N must be positive"));
    }
    let phase = PhaseSpec::standard(k)?;
    let ni = n as i64;
    let a = CoefficientVector::constant(-ni, ni)?;
    let r = 1.0 / n as f64;
    let near_origin = lower_bound_ratio(&a, &phase, p, &InterferenceSet::interval(0.0, r))?;
    let grid = build_grid(&phase, n, 0.0, 1.0, opts)?;
    let op = SumOperator::new(&phase, &grid, -ni, ni)?;
    let full_interval = (2.0 * op.integrate_abs_pow(&a, p)?).powf(1.0 / p) / a.norm();
    Ok(ConstantCoeffRatio { near_origin, full_interval })
}

/// A Lipschitz map with its constant.
#[derive(Clone)]
pub struct LipschitzProfile {
    pub map: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub constant: f64,
    pub label: String,
}

impl fmt::Debug for LipschitzProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LipschitzProfile({}, L = {})", self.label, self.constant)
    }
}

impl LipschitzProfile {
    pub fn new(
        label: impl Into<String>,
        constant: f64,
        map: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(constant >= 0.0 && constant.is_finite()) {
            return Err(LabError::invalid(format!("Lipschitz constant must be >= 0, got {constant}")));
        }
        let profile = LipschitzProfile { map: Arc::new(map), constant, label: label.into() };
        profile.validate()?;
        Ok(profile)
    }

    /// Checks finiteness and the constant on a mesh of `[−1, 1]`.
    fn validate(&self) -> Result<()> {
        let xs = samples(-1.0, 1.0, 2049);
        let ys: Vec<f64> = xs.iter().map(|&x| (self.map)(x)).collect();
        if ys.iter().any(|y| !y.is_finite()) {
            return Err(LabError::invalid(format!("{} is not finite on [-1, 1]", self.label)));
        }
        let h = xs[1] - xs[0];
        for w in ys.windows(2) {
            if (w[1] - w[0]).abs() > self.constant * h * (1.0 + 1e-9) + 1e-15 {
                return Err(LabError::invalid(format!(
                    "{} violates its Lipschitz constant {}",
                    self.label, self.constant
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// `√(2·#indices)`, the trivial bound.
    pub ceiling: f64,
}

/// `‖Σ_{n=⌊N/2⌋}^{N} a_n e(n·φ(x) + n²·x)‖_{L²(−1,1)} / ‖a‖₂` for random
/// unit vectors `a`.
pub fn lipschitz_l2_check(
    profile: &LipschitzProfile,
    n: u64,
    trials: usize,
    seed: u64,
) -> Result<LipschitzReport> {
    if n < 2 || trials == 0 {
        return Err(LabError::invalid("need N >= 2 and at least one trial"));
    }
    let (lo, hi) = ((n / 2) as i64, n as i64);
    let nf = n as f64;
    let variation = 2.0 * (nf * profile.constant + nf * nf);
    let grid = grid_for_variation(-1.0, 1.0, variation, DEFAULT_OVERSAMPLING, DEFAULT_NODE_BUDGET)?;
    let linear: Vec<f64> = grid.nodes().iter().map(|&x| (profile.map)(x)).collect();
    let op = SumOperator::from_chirps(&linear, grid.nodes(), grid.weights(), lo, hi)?;
    let ratios = (0..trials as u64)
        .map(|t| {
            let a = CoefficientVector::random_unit(lo, hi, seed.wrapping_add(t))?;
            Ok(op.integrate_abs_pow(&a, 2.0)?.sqrt() / a.norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let ceiling = (2.0 * (hi - lo + 1) as f64).sqrt();
    Ok(LipschitzReport { ratios, max_ratio, ceiling })
}

/// Smallest `|S|` in a list of values.
pub(crate) fn min_abs(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min)
}
