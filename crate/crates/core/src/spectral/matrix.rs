//! Dense Hermitian kernels with index offset.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::exp_core::CoefficientVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelTag {
    Gram,
    StationaryC,
    CorrelationD,
    Generic,
}

/// Square matrix indexed by `offset..offset+dim` on both axes.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    offset: i64,
    dim: usize,
    entries: Vec<Complex64>,
    tag: KernelTag,
}

impl KernelMatrix {
    pub fn new(offset: i64, dim: usize, entries: Vec<Complex64>, tag: KernelTag) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(LabError::invalid(format!(
                "{} entries do not form a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::invalid("matrix has non-finite entries"));
        }
        Ok(KernelMatrix { offset, dim, entries, tag })
    }

    pub fn from_fn(
        offset: i64,
        dim: usize,
        tag: KernelTag,
        mut f: impl FnMut(i64, i64) -> Complex64,
    ) -> Result<Self> {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim as i64 {
            for j in 0..dim as i64 {
                entries.push(f(offset + i, offset + j));
            }
        }
        Self::new(offset, dim, entries, tag)
    }

    /// Hermitian matrix from its upper triangle (`f` is called with `n ≤ m`).
    pub fn hermitian_from_fn(
        offset: i64,
        dim: usize,
        tag: KernelTag,
        mut f: impl FnMut(i64, i64) -> Complex64,
    ) -> Result<Self> {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            let d = f(offset + i as i64, offset + i as i64);
            entries[i * dim + i] = Complex64::new(d.re, 0.0);
            for j in i + 1..dim {
                let v = f(offset + i as i64, offset + j as i64);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v.conj();
            }
        }
        Self::new(offset, dim, entries, tag)
    }

    pub fn identity(offset: i64, dim: usize) -> Self {
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        KernelMatrix { offset, dim, entries, tag: KernelTag::Generic }
    }

    pub fn zeros(offset: i64, dim: usize) -> Self {
        KernelMatrix {
            offset,
            dim,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
            tag: KernelTag::Generic,
        }
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tag(&self) -> KernelTag {
        self.tag
    }

    pub fn with_tag(mut self, tag: KernelTag) -> Self {
        self.tag = tag;
        self
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Entry at local position `(i, j)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    /// Entry for the indices `(n, m)`.
    pub fn get(&self, n: i64, m: i64) -> Complex64 {
        self.at((n - self.offset) as usize, (m - self.offset) as usize)
    }

    /// Largest `|c_{ij} − conj(c_{ji})|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.at(i, j) - self.at(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub(crate) fn require_hermitian(&self) -> Result<()> {
        let scale = self.entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let defect = self.hermitian_defect();
        if defect > 1e-12 * scale {
            return Err(LabError::invalid(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(())
    }

    /// `C·v` with `v` indexed like the rows.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| {
                let row = &self.entries[i * self.dim..(i + 1) * self.dim];
                row.iter().zip(v).map(|(c, x)| c * x).sum()
            })
            .collect()
    }

    /// `Σ_{n,m} a_n·conj(a_m)·c_{n,m}`.
    pub fn quadratic_form(&self, a: &CoefficientVector) -> Result<Complex64> {
        let lo = self.offset;
        let hi = self.offset + self.dim as i64 - 1;
        let v = a.embed(lo.min(a.lo()), hi.max(a.hi()))?;
        if v.lo() != lo || v.hi() != hi {
            return Err(LabError::invalid(format!(
                "coefficients on [{}, {}] exceed matrix range [{lo}, {hi}]",
                a.lo(),
                a.hi()
            )));
        }
        let vals = v.values();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += vals[i] * vals[j].conj() * self.at(i, j);
            }
        }
        Ok(acc)
    }

    /// `C·C`.
    pub fn square(&self) -> KernelMatrix {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.at(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = &self.entries[k * d..(k + 1) * d];
                for (o, b) in out[i * d..(i + 1) * d].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        KernelMatrix { offset: self.offset, dim: d, entries: out, tag: self.tag }
    }

    /// Row sums `Σ_m |c_{n,m}|`.
    pub fn abs_row_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|i| self.entries[i * self.dim..(i + 1) * self.dim].iter().map(|z| z.norm()).sum())
            .collect()
    }

    /// Column sums `Σ_n |c_{n,m}|`.
    pub fn abs_col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for i in 0..self.dim {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.at(i, j).norm();
            }
        }
        out
    }
}
