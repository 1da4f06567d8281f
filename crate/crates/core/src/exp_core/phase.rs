//! Phase families for weighted Gauss sums.
//!
//! Every one-dimensional family is written as `ψ(x, n) = n·x + n²·q(x)`:
//! the monomial curve has `q(x) = β·x^k` and a general smooth profile has
//! `q(x) = −φ(x)`. Phases are measured in cycles, `e(z) = exp(2πiz)`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LabError, Result};

/// The character `e(z) = exp(2πiz)`, with `z` reduced mod 1 first.
#[inline]
pub fn e(z: f64) -> Complex64 {
    let r = z - z.round();
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}

/// A smooth real profile φ with derivative oracles.
pub trait ScalarPhase: Send + Sync + fmt::Debug {
    fn value(&self, x: f64) -> f64;

    /// `order`-th derivative, `order ≥ 1`.
    fn derivative(&self, order: u32, x: f64) -> f64;

    /// An upper bound for `sup |φ'|` on `[lo, hi]`. Must be monotone under
    /// interval inclusion; grids are certified against it.
    fn max_abs_slope(&self, lo: f64, hi: f64) -> f64;
}

/// `φ(x) = Σ c_j x^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    fn eval_derivative(&self, order: u32, x: f64) -> f64 {
        let order = order as usize;
        let mut sum = 0.0;
        for j in order..self.coeffs.len() {
            let falling: f64 = (j + 1 - order..=j).map(|v| v as f64).product();
            sum += self.coeffs[j] * falling * x.powi((j - order) as i32);
        }
        sum
    }
}

impl ScalarPhase for Polynomial {
    fn value(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn derivative(&self, order: u32, x: f64) -> f64 {
        self.eval_derivative(order, x)
    }

    fn max_abs_slope(&self, lo: f64, hi: f64) -> f64 {
        let r = lo.abs().max(hi.abs());
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| j as f64 * c.abs() * r.powi(j as i32 - 1))
            .sum()
    }
}

/// Phase family that all sums and integrals are built from.
#[derive(Clone, Debug)]
pub enum PhaseSpec {
    /// `ψ(x, n) = n·x + β·n²·x^k`.
    MonomialCurve { k: u32, beta: f64 },
    /// `ψ(x, n) = n·x − n²·φ(x)`; `k` is the order of vanishing of φ' at 0.
    GeneralScalar { k: u32, phi: Arc<dyn ScalarPhase> },
    /// `n·x + m·y − (n² + m²)·x³` on the plane.
    Cylinder2d,
    /// `n·x + n²·y − n³·(y + x³)³` on the plane.
    MomentCurve2d,
}

impl PhaseSpec {
    pub fn monomial(k: u32, beta: f64) -> Result<Self> {
        if k < 2 {
            return Err(LabError::invalid(format!("k must satisfy k >= 2, got {k}")));
        }
        if !beta.is_finite() || beta == 0.0 {
            return Err(LabError::invalid(format!(
                "beta must be finite and nonzero, got {beta}"
            )));
        }
        Ok(PhaseSpec::MonomialCurve { k, beta })
    }

    /// `n·x − n²·x^k`, the family of the main restriction problem.
    pub fn standard(k: u32) -> Result<Self> {
        Self::monomial(k, -1.0)
    }

    pub fn general(k: u32, phi: Arc<dyn ScalarPhase>) -> Result<Self> {
        if k < 2 {
            return Err(LabError::invalid(format!("k must satisfy k >= 2, got {k}")));
        }
        Ok(PhaseSpec::GeneralScalar { k, phi })
    }

    pub fn k(&self) -> u32 {
        match self {
            PhaseSpec::MonomialCurve { k, .. } | PhaseSpec::GeneralScalar { k, .. } => *k,
            PhaseSpec::Cylinder2d | PhaseSpec::MomentCurve2d => 3,
        }
    }

    pub fn is_one_dimensional(&self) -> bool {
        matches!(
            self,
            PhaseSpec::MonomialCurve { .. } | PhaseSpec::GeneralScalar { .. }
        )
    }

    pub(crate) fn require_1d(&self) -> Result<()> {
        if self.is_one_dimensional() {
            Ok(())
        } else {
            Err(LabError::invalid(
                "operation needs a one-dimensional phase family",
            ))
        }
    }

    /// `q(x)` in `ψ(x, n) = n·x + n²·q(x)`.
    #[inline]
    pub fn quadratic_weight(&self, x: f64) -> f64 {
        match self {
            PhaseSpec::MonomialCurve { k, beta } => beta * x.powi(*k as i32),
            PhaseSpec::GeneralScalar { phi, .. } => -phi.value(x),
            _ => f64::NAN,
        }
    }

    /// `φ(x)` in `ψ = n·x − n²·φ(x)`.
    pub fn profile(&self, x: f64) -> f64 {
        -self.quadratic_weight(x)
    }

    /// `φ^{(order)}(x)`.
    pub fn profile_derivative(&self, order: u32, x: f64) -> f64 {
        match self {
            PhaseSpec::MonomialCurve { k, beta } => {
                if order > *k {
                    return 0.0;
                }
                let falling: f64 = (*k - order + 1..=*k).map(|v| v as f64).product();
                -beta * falling * x.powi((*k - order) as i32)
            }
            PhaseSpec::GeneralScalar { phi, .. } => phi.derivative(order, x),
            _ => f64::NAN,
        }
    }

    pub fn psi(&self, x: f64, n: f64) -> f64 {
        n * x + n * n * self.quadratic_weight(x)
    }

    /// `sup |q'|` on `[lo, hi]`.
    pub fn weight_slope_bound(&self, lo: f64, hi: f64) -> f64 {
        match self {
            PhaseSpec::MonomialCurve { k, beta } => {
                let r = lo.abs().max(hi.abs());
                *k as f64 * beta.abs() * r.powi(*k as i32 - 1)
            }
            PhaseSpec::GeneralScalar { phi, .. } => phi.max_abs_slope(lo, hi),
            _ => f64::INFINITY,
        }
    }

    /// `sup_{|n| ≤ N, x ∈ [lo,hi]} |∂ₓψ(x, n)| ≤ N + N²·sup|q'|`.
    pub fn slope_bound(&self, n_max: u64, lo: f64, hi: f64) -> f64 {
        let n = n_max as f64;
        n + n * n * self.weight_slope_bound(lo, hi)
    }
}

impl fmt::Display for PhaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseSpec::MonomialCurve { k, beta } => write!(f, "n*x + ({beta})*n^2*x^{k}"),
            PhaseSpec::GeneralScalar { k, phi } => write!(f, "n*x - n^2*phi(x) [k={k}, {phi:?}]"),
            PhaseSpec::Cylinder2d => write!(f, "n*x + m*y - (n^2+m^2)*x^3"),
            PhaseSpec::MomentCurve2d => write!(f, "n*x + n^2*y - n^3*(y+x^3)^3"),
        }
    }
}
