//! The Gram operator of a phase family and its norm `B = √λ_max(G)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::exp_core::{build_grid, e, CoefficientVector, GridOptions, PhaseSpec, QuadratureGrid, SumOperator};
use crate::spectral::eigen::{jacobi_eigenvalues, lanczos, power_iteration, start_vector, HermitianOperator};
use crate::spectral::matrix::{KernelMatrix, KernelTag};

/// Largest matrix handed to the dense oracle.
pub const DENSE_CAP: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpNormMethod {
    Dense,
    PowerIteration,
    Lanczos,
}

impl std::fmt::Display for OpNormMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OpNormMethod::Dense => "dense",
            OpNormMethod::PowerIteration => "power_iteration",
            OpNormMethod::Lanczos => "lanczos",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpNormResult {
    /// `√max(λ_max, 0)`.
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub method: OpNormMethod,
    /// Smallest eigenvalue when the whole spectrum was computed.
    pub min_eigenvalue: Option<f64>,
}

/// `∫_I e((n−m)x + (n²−m²)·q(x)) dx` on the grid.
pub fn gram_entry(
    n: i64,
    m: i64,
    phase: &PhaseSpec,
    lo: f64,
    hi: f64,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    phase.require_1d()?;
    if (grid.lo() - lo).abs() > 1e-12 || (grid.hi() - hi).abs() > 1e-12 {
        return Err(LabError::invalid("grid does not cover the interval"));
    }
    if n == m {
        return Ok(Complex64::new(hi - lo, 0.0));
    }
    let d = (n - m) as f64;
    let s = (n * n - m * m) as f64;
    Ok(grid.integrate(|x| e(d * x + s * phase.quadratic_weight(x))))
}

fn check_range(n_max: i64) -> Result<()> {
    if n_max < 0 {
        return Err(LabError::invalid(format!("N must be nonnegative, got {n_max}")));
    }
    Ok(())
}

/// Full Gram matrix on `[−N, N]²`.
pub fn dense_gram(
    n_max: i64,
    phase: &PhaseSpec,
    lo: f64,
    hi: f64,
    opts: GridOptions,
) -> Result<KernelMatrix> {
    check_range(n_max)?;
    let dim = (2 * n_max + 1) as usize;
    if dim > DENSE_CAP {
        return Err(LabError::Resource { what: "dense Gram matrix", required: dim, budget: DENSE_CAP });
    }
    let grid = build_grid(phase, n_max as u64, lo, hi, opts)?;
    let op = SumOperator::new(phase, &grid, -n_max, n_max)?;
    let mut entries = op.gram_matrix();
    // The integrand is 1 on the diagonal.
    let len = hi - lo;
    for i in 0..dim {
        entries[i * dim + i] = Complex64::new(len, 0.0);
    }
    KernelMatrix::new(-n_max, dim, entries, KernelTag::Gram)
}

/// `√λ_max` of a Hermitian PSD matrix via cyclic Jacobi.
pub fn opnorm_dense(g: &KernelMatrix) -> Result<OpNormResult> {
    let ev = jacobi_eigenvalues(g)?;
    let top = *ev.last().unwrap_or(&0.0);
    Ok(OpNormResult {
        value: top.max(0.0).sqrt(),
        iterations: 0,
        residual: 0.0,
        method: OpNormMethod::Dense,
        min_eigenvalue: ev.first().copied(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterativeOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub method: OpNormMethod,
    pub grid: GridOptions,
    /// Use the reflection symmetry of monomial phases on symmetric
    /// intervals to halve the quadrature.
    pub use_symmetry: bool,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions {
            tol: 1e-9,
            max_iter: 10_000,
            seed: 0,
            method: OpNormMethod::Lanczos,
            grid: GridOptions::default(),
            use_symmetry: true,
        }
    }
}

/// Reflection structure of `G` under `x ↦ −x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Reflection {
    None,
    /// Odd `k`: `e(ψ(−x, n)) = conj(e(ψ(x, n)))`, so `G = 2·Re H` with `H`
    /// the Gram matrix of the right half.
    Conjugate,
    /// Even `k`: `e(ψ(−x, n)) = e(ψ(x, −n))`, so `G = H + J·H·J` with
    /// `J a_n = a_{−n}`.
    Mirror,
}

/// Matrix-free `a ↦ G a` on `[−N, N]`.
pub struct GramOperator {
    op: SumOperator,
    n_max: i64,
    reflection: Reflection,
    /// Parity sector for `Reflection::Mirror` (`±1`); `0` means unrestricted.
    parity: i8,
    nodes: usize,
}

impl GramOperator {
    pub fn new(n_max: i64, phase: &PhaseSpec, lo: f64, hi: f64, opts: &IterativeOptions) -> Result<Self> {
        check_range(n_max)?;
        let symmetric = (lo + hi).abs() <= 1e-15 * hi.abs().max(1.0);
        let reflection = match phase {
            PhaseSpec::MonomialCurve { k, .. } if opts.use_symmetry && symmetric => {
                if k % 2 == 1 {
                    Reflection::Conjugate
                } else {
                    Reflection::Mirror
                }
            }
            _ => Reflection::None,
        };
        let grid = match reflection {
            Reflection::None => build_grid(phase, n_max as u64, lo, hi, opts.grid)?,
            _ => build_grid(phase, n_max as u64, 0.0, hi, opts.grid)?,
        };
        let op = SumOperator::new(phase, &grid, -n_max, n_max)?;
        Ok(GramOperator { op, n_max, reflection, parity: 0, nodes: grid.len() })
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    fn sectors(&self) -> Vec<i8> {
        match self.reflection {
            Reflection::Mirror => vec![1, -1],
            _ => vec![0],
        }
    }

    fn with_parity(&self, parity: i8) -> GramOperatorView<'_> {
        GramOperatorView { inner: self, parity }
    }

    fn to_coeffs(&self, v: &[Complex64]) -> Result<CoefficientVector> {
        CoefficientVector::new(-self.n_max, v.to_vec())
    }

    fn project(&self, v: &[Complex64], parity: i8) -> Vec<Complex64> {
        let d = v.len();
        (0..d).map(|i| 0.5 * (v[i] + v[d - 1 - i] * parity as f64)).collect()
    }

    fn apply_sector(&self, v: &[Complex64], parity: i8) -> Result<Vec<Complex64>> {
        match self.reflection {
            Reflection::None => Ok(self.op.gram_apply(&self.to_coeffs(v)?)?.values().to_vec()),
            Reflection::Conjugate => {
                let real = v.iter().all(|z| z.im == 0.0);
                let h = self.op.gram_apply(&self.to_coeffs(v)?)?;
                if real {
                    Ok(h.values().iter().map(|z| Complex64::new(2.0 * z.re, 0.0)).collect())
                } else {
                    let conj: Vec<Complex64> = v.iter().map(|z| z.conj()).collect();
                    let hc = self.op.gram_apply(&self.to_coeffs(&conj)?)?;
                    Ok(h.values().iter().zip(hc.values()).map(|(a, b)| a + b.conj()).collect())
                }
            }
            Reflection::Mirror => {
                if parity == 0 {
                    let h = self.op.gram_apply(&self.to_coeffs(v)?)?;
                    let rev: Vec<Complex64> = v.iter().rev().copied().collect();
                    let hr = self.op.gram_apply(&self.to_coeffs(&rev)?)?;
                    let d = v.len();
                    let (h, hr) = (h.values(), hr.values());
                    Ok((0..d).map(|i| h[i] + hr[d - 1 - i]).collect())
                } else {
                    // G restricted to a parity sector is 2·P·H·P.
                    let p = self.project(v, parity);
                    let h = self.op.gram_apply(&self.to_coeffs(&p)?)?;
                    let mut out = self.project(h.values(), parity);
                    for z in &mut out {
                        *z *= 2.0;
                    }
                    Ok(out)
                }
            }
        }
    }
}

impl HermitianOperator for GramOperator {
    fn dim(&self) -> usize {
        (2 * self.n_max + 1) as usize
    }

    fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.apply_sector(v, self.parity)
    }
}

struct GramOperatorView<'a> {
    inner: &'a GramOperator,
    parity: i8,
}

impl HermitianOperator for GramOperatorView<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.inner.apply_sector(v, self.parity)
    }
}

/// `B_N = √λ_max(G)` without forming `G`.
pub fn opnorm_iterative(
    n_max: i64,
    phase: &PhaseSpec,
    lo: f64,
    hi: f64,
    opts: &IterativeOptions,
) -> Result<OpNormResult> {
    let op = GramOperator::new(n_max, phase, lo, hi, opts)?;
    opnorm_of_operator(&op, opts)
}

pub fn opnorm_of_operator(op: &GramOperator, opts: &IterativeOptions) -> Result<OpNormResult> {
    let dim = op.dim();
    let real = op.reflection == Reflection::Conjugate;
    let mut best: Option<(f64, f64)> = None;
    let mut iterations = 0;
    for parity in op.sectors() {
        let view = op.with_parity(parity);
        let mut start = start_vector(dim, opts.seed, real);
        if parity != 0 {
            start = op.project(&start, parity);
        }
        let est = match opts.method {
            OpNormMethod::PowerIteration => power_iteration(&view, start, opts.tol, opts.max_iter),
            OpNormMethod::Lanczos => lanczos(&view, start, opts.tol, opts.max_iter),
            OpNormMethod::Dense => {
                return Err(LabError::invalid("dense method requested from the iterative solver"))
            }
        }
        .map_err(|err| match err {
            LabError::Convergence { iterations: it, residual } => {
                LabError::Convergence { iterations: iterations + it, residual }
            }
            other => other,
        })?;
        iterations += est.iterations;
        if best.map_or(true, |(v, _)| est.value > v) {
            best = Some((est.value, est.residual));
        }
    }
    let (value, residual) = best.unwrap_or((0.0, 0.0));
    Ok(OpNormResult {
        value: value.max(0.0).sqrt(),
        iterations,
        residual,
        method: opts.method,
        min_eigenvalue: None,
    })
}
