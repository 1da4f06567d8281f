//! Exponential sums, their L^p norms and cut-off oscillatory integrals.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::exp_core::coeffs::CoefficientVector;
use crate::exp_core::kernel::{
    character_block, gram_group, sum_block, GramScratch, GROUP, LANES,
};
use crate::exp_core::phase::{e, PhaseSpec};
use crate::exp_core::quadrature::QuadratureGrid;

/// Fixed number of work units per pass. Independent of the thread count so
/// that the ordered reduction is bit-stable.
const WORK_UNITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SumSample {
    pub x: f64,
    pub value: Complex64,
}

/// Nodes (padded to whole blocks) with the phase weight `q(x)` precomputed.
#[derive(Clone, Debug)]
pub struct SumOperator {
    x: Vec<f64>,
    q: Vec<f64>,
    w: Vec<f64>,
    lo: i64,
    hi: i64,
}

impl SumOperator {
    /// Operator for coefficients on `[lo, hi]` evaluated on `grid`.
    pub fn new(phase: &PhaseSpec, grid: &QuadratureGrid, lo: i64, hi: i64) -> Result<Self> {
        Self::with_weights(phase, grid.nodes(), grid.weights(), lo, hi)
    }

    pub(crate) fn with_weights(
        phase: &PhaseSpec,
        nodes: &[f64],
        weights: &[f64],
        lo: i64,
        hi: i64,
    ) -> Result<Self> {
        phase.require_1d()?;
        if hi < lo {
            return Err(LabError::invalid(format!("empty index range [{lo}, {hi}]")));
        }
        if let Some(x) = nodes.iter().find(|x| !x.is_finite()) {
            return Err(LabError::invalid(format!("non-finite evaluation point {x}")));
        }
        let q: Vec<f64> = nodes.iter().map(|&t| phase.quadratic_weight(t)).collect();
        Self::from_chirps(nodes, &q, weights, lo, hi)
    }

    /// Operator for the characters `e(n·x_i + n²·q_i)` with arbitrary pairs
    /// `(x_i, q_i)`; the phase family need not be of the form `q = q(x)`.
    pub fn from_chirps(
        linear: &[f64],
        quadratic: &[f64],
        weights: &[f64],
        lo: i64,
        hi: i64,
    ) -> Result<Self> {
        if hi < lo {
            return Err(LabError::invalid(format!("empty index range [{lo}, {hi}]")));
        }
        if linear.len() != quadratic.len() || linear.len() != weights.len() {
            return Err(LabError::invalid("chirp parameter lengths differ"));
        }
        if let Some(v) = linear.iter().chain(quadratic).find(|v| !v.is_finite()) {
            return Err(LabError::invalid(format!("non-finite chirp parameter {v}")));
        }
        let pad = (GROUP - linear.len() % GROUP) % GROUP;
        let padded = |v: &[f64], fill: f64| {
            let mut out = v.to_vec();
            out.extend(std::iter::repeat(fill).take(pad));
            out
        };
        let x = padded(linear, *linear.last().unwrap_or(&0.0));
        let q = padded(quadratic, *quadratic.last().unwrap_or(&0.0));
        let w = padded(weights, 0.0);
        Ok(SumOperator { x, q, w, lo, hi })
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn dim(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    fn parts(&self, a: &CoefficientVector) -> Result<(Vec<f64>, Vec<f64>)> {
        if a.lo() < self.lo || a.hi() > self.hi {
            return Err(LabError::invalid(format!(
                "coefficients on [{}, {}] exceed operator range [{}, {}]",
                a.lo(),
                a.hi(),
                self.lo,
                self.hi
            )));
        }
        Ok(a.embed(self.lo, self.hi)?.split_parts())
    }

    fn blocks(&self) -> usize {
        self.x.len() / LANES
    }

    fn unit_ranges(&self) -> Vec<(usize, usize)> {
        let blocks = self.blocks();
        let per = blocks.div_ceil(WORK_UNITS).max(1);
        (0..blocks).step_by(per).map(|b| (b, (b + per).min(blocks))).collect()
    }

    fn block(&self, b: usize) -> (&[f64], &[f64], &[f64]) {
        let r = b * LANES..(b + 1) * LANES;
        (&self.x[r.clone()], &self.q[r.clone()], &self.w[r])
    }

    fn groups(&self) -> usize {
        self.x.len() / GROUP
    }

    fn group_ranges(&self) -> Vec<(usize, usize)> {
        let groups = self.groups();
        let per = groups.div_ceil(WORK_UNITS).max(1);
        (0..groups).step_by(per).map(|g| (g, (g + per).min(groups))).collect()
    }

    /// `S` at every (unpadded) node.
    pub fn evaluate(&self, a: &CoefficientVector, count: usize) -> Result<Vec<Complex64>> {
        let (re, im) = self.parts(a)?;
        let mut out: Vec<Complex64> = (0..self.blocks())
            .into_par_iter()
            .flat_map_iter(|b| {
                let (x, q, _) = self.block(b);
                let (sr, si) = sum_block(x, q, self.lo, &re, &im);
                (0..LANES).map(move |l| Complex64::new(sr[l], si[l]))
            })
            .collect();
        out.truncate(count);
        Ok(out)
    }

    /// `Σ_i w_i·|S(x_i)|^p`.
    pub fn integrate_abs_pow(&self, a: &CoefficientVector, p: f64) -> Result<f64> {
        let (re, im) = self.parts(a)?;
        let partial: Vec<f64> = self
            .unit_ranges()
            .into_par_iter()
            .map(|(b0, b1)| {
                let mut acc = 0.0;
                for b in b0..b1 {
                    let (x, q, w) = self.block(b);
                    let (sr, si) = sum_block(x, q, self.lo, &re, &im);
                    for l in 0..LANES {
                        let m2 = sr[l] * sr[l] + si[l] * si[l];
                        let v = if p == 2.0 { m2 } else { m2.powf(0.5 * p) };
                        acc += w[l] * v;
                    }
                }
                acc
            })
            .collect();
        Ok(partial.iter().sum())
    }

    /// `(G a)_m = Σ_i w_i·S(x_i)·conj(e(ψ(x_i, m)))`, i.e. `Σ_n G_{n,m} a_n`.
    pub fn gram_apply(&self, a: &CoefficientVector) -> Result<CoefficientVector> {
        let (re, im) = self.parts(a)?;
        let dim = self.dim();
        let partial: Vec<(Vec<f64>, Vec<f64>)> = self
            .group_ranges()
            .into_par_iter()
            .map(|(g0, g1)| {
                let mut scratch = GramScratch::new(dim);
                let mut out_re = vec![0.0; dim];
                let mut out_im = vec![0.0; dim];
                for g in g0..g1 {
                    let r = g * GROUP..(g + 1) * GROUP;
                    gram_group(
                        &self.x[r.clone()],
                        &self.q[r.clone()],
                        &self.w[r],
                        self.lo,
                        &re,
                        &im,
                        &mut scratch,
                        &mut out_re,
                        &mut out_im,
                    );
                }
                (out_re, out_im)
            })
            .collect();
        let mut out_re = vec![0.0; dim];
        let mut out_im = vec![0.0; dim];
        for (pr, pi) in &partial {
            for j in 0..dim {
                out_re[j] += pr[j];
                out_im[j] += pi[j];
            }
        }
        CoefficientVector::new(
            self.lo,
            out_re.into_iter().zip(out_im).map(|(r, i)| Complex64::new(r, i)).collect(),
        )
    }
}

impl SumOperator {
    /// Dense `G_{n,m} = Σ_i w_i·e(ψ(x_i, n))·conj(e(ψ(x_i, m)))`, row-major
    /// over `[lo, hi]²`, assembled with real matrix products.
    pub fn gram_matrix(&self) -> Vec<Complex64> {
        let dim = self.dim();
        let units = self.unit_ranges();
        let partial: Vec<(Vec<f64>, Vec<f64>)> = units
            .into_par_iter()
            .map(|(b0, b1)| {
                // sym = AᵀA + BᵀB and cross = BᵀA over the scaled rows.
                let mut sym = vec![0.0; dim * dim];
                let mut cross = vec![0.0; dim * dim];
                const CHUNK: usize = 32;
                let rows = CHUNK * LANES;
                let mut a = vec![0.0; rows * dim];
                let mut b = vec![0.0; rows * dim];
                let mut start = b0;
                while start < b1 {
                    let end = (start + CHUNK).min(b1);
                    let used = (end - start) * LANES;
                    for (k, blk) in (start..end).enumerate() {
                        let (x, q, w) = self.block(blk);
                        let r = k * LANES * dim..(k + 1) * LANES * dim;
                        character_block(x, q, self.lo, dim, &mut a[r.clone()], &mut b[r.clone()]);
                        for l in 0..LANES {
                            let s = w[l].sqrt();
                            let row = (k * LANES + l) * dim;
                            for v in &mut a[row..row + dim] {
                                *v *= s;
                            }
                            for v in &mut b[row..row + dim] {
                                *v *= s;
                            }
                        }
                    }
                    let d = dim as isize;
                    // C(dim×dim) += Xᵀ·Y with X, Y of shape used×dim, row-major.
                    let gemm = |x: &[f64], y: &[f64], c: &mut [f64]| unsafe {
                        matrixmultiply::dgemm(
                            dim, used, dim, 1.0, x.as_ptr(), 1, d, y.as_ptr(), d, 1, 1.0,
                            c.as_mut_ptr(), d, 1,
                        );
                    };
                    gemm(&a, &a, &mut sym);
                    gemm(&b, &b, &mut sym);
                    gemm(&b, &a, &mut cross);
                    start = end;
                }
                (sym, cross)
            })
            .collect();
        let mut sym = vec![0.0; dim * dim];
        let mut cross = vec![0.0; dim * dim];
        for (s, c) in &partial {
            for i in 0..dim * dim {
                sym[i] += s[i];
                cross[i] += c[i];
            }
        }
        let mut g = vec![Complex64::new(0.0, 0.0); dim * dim];
        for n in 0..dim {
            for m in n..dim {
                let re = 0.5 * (sym[n * dim + m] + sym[m * dim + n]);
                let im = cross[n * dim + m] - cross[m * dim + n];
                g[n * dim + m] = Complex64::new(re, im);
                g[m * dim + n] = Complex64::new(re, -im);
            }
        }
        g
    }
}

/// `S(x) = Σ_n a_n e(ψ(x, n))` at each point, by direct summation.
pub fn eval_sum(
    a: &CoefficientVector,
    phase: &PhaseSpec,
    points: &[f64],
) -> Result<Vec<Complex64>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let weights = vec![0.0; points.len()];
    let op = SumOperator::with_weights(phase, points, &weights, a.lo(), a.hi())?;
    op.evaluate(a, points.len())
}

/// `Σ_n a_n e(n·x_i + n²·q_i)` for each pair `(x_i, q_i)`.
pub fn eval_chirps(
    a: &CoefficientVector,
    linear: &[f64],
    quadratic: &[f64],
) -> Result<Vec<Complex64>> {
    if linear.is_empty() {
        return Ok(Vec::new());
    }
    let weights = vec![0.0; linear.len()];
    let op = SumOperator::from_chirps(linear, quadratic, &weights, a.lo(), a.hi())?;
    op.evaluate(a, linear.len())
}

pub fn sample_sum(
    a: &CoefficientVector,
    phase: &PhaseSpec,
    points: &[f64],
) -> Result<Vec<SumSample>> {
    Ok(eval_sum(a, phase, points)?
        .into_iter()
        .zip(points)
        .map(|(value, &x)| SumSample { x, value })
        .collect())
}

/// `(∫_I |S|^p)^{1/p}` on the grid.
pub fn lp_norm(
    a: &CoefficientVector,
    phase: &PhaseSpec,
    p: f64,
    lo: f64,
    hi: f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(LabError::invalid(format!("p must be finite and >= 1, got {p}")));
    }
    grid.check_covers(lo, hi)?;
    let op = SumOperator::new(phase, grid, a.lo(), a.hi())?;
    Ok(op.integrate_abs_pow(a, p)?.powf(1.0 / p))
}

/// Real phase (in cycles) of an oscillatory integrand.
#[derive(Clone)]
pub enum PhaseFunction {
    Zero,
    /// `freq·x`.
    Linear { freq: f64 },
    /// `ψ(x, n) − ψ(x, m)`.
    Difference { phase: PhaseSpec, n: i64, m: i64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseFunction::Zero => write!(f, "Zero"),
            PhaseFunction::Linear { freq } => write!(f, "Linear({freq})"),
            PhaseFunction::Difference { phase, n, m } => write!(f, "Difference({phase}; {n}, {m})"),
            PhaseFunction::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl PhaseFunction {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            PhaseFunction::Zero => 0.0,
            PhaseFunction::Linear { freq } => freq * x,
            PhaseFunction::Difference { phase, n, m } => {
                let (n, m) = (*n as f64, *m as f64);
                (n - m) * x + (n * n - m * m) * phase.quadratic_weight(x)
            }
            PhaseFunction::Custom(f) => f(x),
        }
    }
}

/// The smooth step `0` for `t ≤ 0`, `1` for `t ≥ 1`, built from `exp(−1/t)`.
pub fn smooth_step(t: f64) -> f64 {
    fn s(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = s(t);
        a / (a + s(1.0 - t))
    }
}

/// Plateau bump: `1` on `[−δ/2, δ/2]`, `0` outside `(−δ, δ)`, smooth.
pub fn plateau(t: f64, delta: f64) -> f64 {
    smooth_step((delta - t.abs()) / (0.5 * delta))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cutoff {
    None,
    /// `η(scale·(x − center))` with plateau half-width `delta`.
    Plateau { center: f64, scale: f64, delta: f64 },
    /// `1 − η(scale·(x − center))`.
    Complement { center: f64, scale: f64, delta: f64 },
}

impl Cutoff {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Cutoff::None => 1.0,
            Cutoff::Plateau { center, scale, delta } => plateau(scale * (x - center), delta),
            Cutoff::Complement { center, scale, delta } => {
                1.0 - plateau(scale * (x - center), delta)
            }
        }
    }

    /// Closed support, when it is a proper sub-interval.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            Cutoff::Plateau { center, scale, delta } => {
                Some((center - delta / scale, center + delta / scale))
            }
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Cutoff::None => Ok(()),
            Cutoff::Plateau { center, scale, delta } | Cutoff::Complement { center, scale, delta } => {
                if !(center.is_finite() && scale.is_finite() && scale > 0.0 && delta > 0.0) {
                    return Err(LabError::invalid("cutoff needs finite center, scale > 0, delta > 0"));
                }
                Ok(())
            }
        }
    }
}

/// `∫_I e(f(x))·η(x) dx` on the grid.
pub fn oscillatory_integral(
    f: &PhaseFunction,
    cutoff: &Cutoff,
    lo: f64,
    hi: f64,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    cutoff.validate()?;
    grid.check_covers(lo, hi)?;
    if let Some((a, b)) = cutoff.support() {
        let tol = 1e-12 * (hi - lo);
        if a < lo - tol || b > hi + tol {
            return Err(LabError::invalid(format!(
                "cutoff support [{a}, {b}] is not inside [{lo}, {hi}]"
            )));
        }
    }
    Ok(grid.integrate(|x| {
        let c = cutoff.value(x);
        if c == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            e(f.value(x)) * c
        }
    }))
}
