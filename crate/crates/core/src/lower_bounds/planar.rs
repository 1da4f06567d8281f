use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exp_core::{e, eval_chirps, CoefficientVector, PhaseSpec};
use crate::lower_bounds::one_dim::{
    interference_coefficients, min_abs, samples, set_grid, Certificate,
};
use crate::lower_bounds::params::{ConstructionParams, InterferenceSet, SetFrame};

/// Samples per axis for planar certificates.
const PLANAR_SAMPLES: usize = 65;

fn check_scale(n: u64) -> Result<()> {
    if n < 64 {
        return Err(LabError::invalid(format!("planar constructions need N >= 64, got {n}")));
    }
    Ok(())
}

/// `a_{n,m} = α_n·α_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableCoefficients {
    pub factor: CoefficientVector,
}

impl SeparableCoefficients {
    pub fn get(&self, n: i64, m: i64) -> Complex64 {
        self.factor.get(n) * self.factor.get(m)
    }

    /// `‖a‖₂ = ‖α‖₂²`.
    pub fn norm(&self) -> f64 {
        self.factor.norm().powi(2)
    }

    pub fn active_count(&self) -> usize {
        self.factor.active_count().pow(2)
    }

    /// Row-major values on `[lo, hi]²`.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let f = self.factor.values();
        f.iter().flat_map(|&u| f.iter().map(move |&v| u * v)).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlanarConstruction {
    pub params: ConstructionParams,
    pub set: InterferenceSet,
    /// Exponent of the norm on the set.
    pub p: f64,
    /// `(∫_set |S|^p)^{1/p} / ‖a‖₂`.
    pub ratio: f64,
    pub certificate: Certificate,
}

/// Cylinder phase `n·x + m·y − (n² + m²)·x³` with separable coefficients,
/// integrated in `L²` over the parallelogram
/// `|x − x_N| ≤ c·N^{−2/3}, |y − x| ≤ c·N^{−5/6}`.
pub fn cylinder_construction(
    n: u64,
    c_small: f64,
    threshold: f64,
) -> Result<(SeparableCoefficients, PlanarConstruction)> {
    check_scale(n)?;
    let base = PhaseSpec::standard(3)?;
    let params = ConstructionParams::new(&base, n, c_small)?;
    let alpha = interference_coefficients(&params, &base)?;
    let coeffs = SeparableCoefficients { factor: alpha.clone() };
    let skew = c_small * (n as f64).powf(-5.0 / 6.0);
    let set = InterferenceSet::new(
        vec![params.x_n, 0.0],
        vec![params.delta, skew],
        SetFrame::Diagonal,
    )?;
    let n_top = alpha.hi().unsigned_abs();
    let (x0, x1) = set.bounds(0);
    let (t0, t1) = set.bounds(1);
    let x_grid = set_grid(x0, x1, base.slope_bound(n_top, x0, x1) * (x1 - x0))?;
    let t_grid = set_grid(t0, t1, n_top as f64 * (t1 - t0))?;

    // S(x, x + t) = A(x)·B(x, t), both chirps with quadratic weight −x³.
    let eval = |xs: &[f64], ts: &[f64]| -> Result<Vec<(Complex64, Vec<Complex64>)>> {
        xs.par_iter()
            .map(|&x| {
                let cube = -x * x * x;
                let a = eval_chirps(&alpha, &[x], &[cube])?[0];
                let lin: Vec<f64> = ts.iter().map(|t| x + t).collect();
                let b = eval_chirps(&alpha, &lin, &vec![cube; ts.len()])?;
                Ok((a, b))
            })
            .collect()
    };
    let rows = eval(x_grid.nodes(), t_grid.nodes())?;
    let integral: f64 = rows
        .iter()
        .zip(x_grid.weights())
        .map(|((a, b), wx)| {
            let inner: f64 = b.iter().zip(t_grid.weights()).map(|(v, wt)| wt * v.norm_sqr()).sum();
            wx * a.norm_sqr() * inner
        })
        .sum();
    let ratio = integral.sqrt() / coeffs.norm();

    let sampled = eval(&samples(x0, x1, PLANAR_SAMPLES), &samples(t0, t1, PLANAR_SAMPLES))?;
    let values: Vec<Complex64> =
        sampled.iter().flat_map(|(a, b)| b.iter().map(move |v| a * v)).collect();
    let certificate = Certificate::new(min_abs(&values), coeffs.active_count(), threshold);
    Ok((coeffs, PlanarConstruction { params, set, p: 2.0, ratio, certificate }))
}

/// `v_N = 2/(3√N)`, where `θ_vn(v_N, N/2) = 0`.
pub fn moment_center(n: u64) -> f64 {
    2.0 / (3.0 * (n as f64).sqrt())
}

/// `θ_vn(v, n) = 2n − 9n²v²` for `θ(v, n) = n²v − n³v³ + n³v_N³`.
pub fn moment_mixed_partial(v: f64, n: f64) -> f64 {
    2.0 * n - 9.0 * n * n * v * v
}

/// Moment-curve phase in the variables `u = x`, `v = y + x³`:
/// `(n·u − n²·u³) + (n²·v − n³·v³)`. The coefficients undo the Taylor data
/// of both brackets at `(1/√(3N), v_N)` on `|n − N/2| ≤ N^{5/6}`; the norm
/// is `L⁶` over `|u − 1/√(3N)| ≤ c·N^{−2/3}, |v − v_N| ≤ c·N^{−5/3}`.
pub fn moment_curve_construction(
    n: u64,
    c_small: f64,
    threshold: f64,
) -> Result<(CoefficientVector, PlanarConstruction)> {
    check_scale(n)?;
    let base = PhaseSpec::standard(3)?;
    let params = ConstructionParams::new(&base, n, c_small)?;
    let alpha = interference_coefficients(&params, &base)?;
    let v_n = moment_center(n);
    let n0 = params.center;
    let a = CoefficientVector::from_fn(alpha.lo(), alpha.hi(), |j| {
        let t = (j - n0) as f64;
        let cubic = (j as f64 * v_n).powi(3);
        // θ_n(v_N, n₀) = 2n₀v_N, θ_nn(v_N, n₀) = 2v_N
        alpha.get(j) * e(-2.0 * n0 as f64 * v_n * t - v_n * t * t + cubic)
    })?;
    let set = InterferenceSet::new(
        vec![params.x_n, v_n],
        vec![params.delta, c_small * (n as f64).powf(-5.0 / 3.0)],
        SetFrame::Substituted,
    )?;
    let n_top = a.hi() as f64;
    let (u0, u1) = set.bounds(0);
    let (v0, v1) = set.bounds(1);
    let u_slope = n_top + 3.0 * n_top * n_top * u1 * u1;
    let v_slope = n_top * n_top + 3.0 * n_top.powi(3) * v1 * v1;
    let u_grid = set_grid(u0, u1, u_slope * (u1 - u0))?;
    let v_grid = set_grid(v0, v1, v_slope * (v1 - v0))?;

    // For fixed v the sum is a chirp in u with coefficients a_n·e(−n³v³).
    let eval = |us: &[f64], vs: &[f64]| -> Result<Vec<Vec<Complex64>>> {
        vs.par_iter()
            .map(|&v| {
                let b = CoefficientVector::from_fn(a.lo(), a.hi(), |j| {
                    a.get(j) * e(-(j as f64 * v).powi(3))
                })?;
                let quad: Vec<f64> = us.iter().map(|u| v - u * u * u).collect();
                eval_chirps(&b, us, &quad)
            })
            .collect()
    };
    let p = 6.0;
    let cols = eval(u_grid.nodes(), v_grid.nodes())?;
    let integral: f64 = cols
        .iter()
        .zip(v_grid.weights())
        .map(|(col, wv)| {
            let inner: f64 =
                col.iter().zip(u_grid.weights()).map(|(s, wu)| wu * s.norm_sqr().powi(3)).sum();
            wv * inner
        })
        .sum();
    let ratio = integral.powf(1.0 / p) / a.norm();

    let sampled = eval(&samples(u0, u1, PLANAR_SAMPLES), &samples(v0, v1, PLANAR_SAMPLES))?;
    let values: Vec<Complex64> = sampled.into_iter().flatten().collect();
    let certificate = Certificate::new(min_abs(&values), a.active_count(), threshold);
    Ok((a, PlanarConstruction { params, set, p, ratio, certificate }))
}
