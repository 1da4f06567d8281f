use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exp_core::{e, CoefficientVector};
use crate::spectral::{schur_bound, ttstar_bound, KernelMatrix, KernelTag};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real phase with its first two derivatives.
#[derive(Clone)]
pub struct SumPhase {
    pub label: String,
    value: RealFn,
    first: RealFn,
    second: RealFn,
}

impl fmt::Debug for SumPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SumPhase({})", self.label)
    }
}

impl SumPhase {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        SumPhase {
            label: label.into(),
            value: Arc::new(value),
            first: Arc::new(first),
            second: Arc::new(second),
        }
    }

    /// `α·x`.
    pub fn linear(alpha: f64) -> Self {
        Self::new(format!("{alpha}*x"), move |x| alpha * x, move |_| alpha, |_| 0.0)
    }

    /// `x²/(2T) + β·x`.
    pub fn quadratic(t: f64, beta: f64) -> Self {
        Self::new(
            format!("x^2/(2*{t}) + {beta}*x"),
            move |x| x * x / (2.0 * t) + beta * x,
            move |x| x / t + beta,
            move |_| 1.0 / t,
        )
    }

    pub fn zero() -> Self {
        Self::linear(0.0)
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }
}

/// Two-sided band for the "∼ λ" preconditions.
pub const SIZE_BAND: f64 = 4.0;

/// Largest `λ` accepted as "small" by the first derivative test.
pub const SMALL_SLOPE: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeTest {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `|Σ_{x ∈ [a, b] ∩ ℤ} e(f(x))|` against `1/λ` (order 1) or
/// `λ^{1/2}|I| + λ^{−1/2}` (order 2).
pub fn derivative_test_check(
    order: u32,
    f: &SumPhase,
    interval: (i64, i64),
    lambda: f64,
) -> Result<DerivativeTest> {
    let (a, b) = interval;
    if b - a < 1 {
        return Err(LabError::invalid(format!("interval [{a}, {b}] is shorter than 1")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(LabError::invalid(format!("lambda must be positive, got {lambda}")));
    }
    let xs: Vec<f64> = (a..=b).map(|x| x as f64).collect();
    let in_band = |v: f64| v.abs() >= lambda / SIZE_BAND && v.abs() <= lambda * SIZE_BAND;
    let rhs = match order {
        1 => {
            if lambda > SMALL_SLOPE {
                return Err(LabError::invalid(format!("lambda = {lambda} is not small")));
            }
            let d: Vec<f64> = xs.iter().map(|&x| (f.first)(x)).collect();
            let up = d.windows(2).all(|w| w[1] >= w[0]);
            let down = d.windows(2).all(|w| w[1] <= w[0]);
            if !(up || down) {
                return Err(LabError::invalid(format!("f' of {} is not monotone", f.label)));
            }
            if !d.iter().all(|&v| in_band(v)) {
                return Err(LabError::invalid(format!("|f'| of {} is not comparable to {lambda}", f.label)));
            }
            1.0 / lambda
        }
        2 => {
            if !xs.iter().all(|&x| in_band((f.second)(x))) {
                return Err(LabError::invalid(format!("|f''| of {} is not comparable to {lambda}", f.label)));
            }
            lambda.sqrt() * (b - a) as f64 + 1.0 / lambda.sqrt()
        }
        _ => return Err(LabError::invalid(format!("order must be 1 or 2, got {order}"))),
    };
    let lhs = xs.iter().map(|&x| e(f.value(x))).sum::<Complex64>().norm();
    Ok(DerivativeTest { lhs, rhs, ratio: lhs / rhs })
}

/// `|w_b| + Σ_{x=a+1}^{b−1} |w_{x+1} − w_x|`.
pub fn v1_norm(w: &[f64]) -> f64 {
    let last = w.last().map_or(0.0, |v| v.abs());
    last + w.windows(2).map(|p| (p[1] - p[0]).abs()).sum::<f64>()
}

/// `|Σ w_x e(f_x)|` and `‖w‖_{V¹}·max_n |Σ_{x ≤ n} e(f_x)|`.
pub fn partial_summation_bound(w: &[f64], f: &[f64]) -> Result<(f64, f64)> {
    if w.is_empty() || w.len() != f.len() {
        return Err(LabError::invalid("weights and phases must be nonempty and of equal length"));
    }
    let mut lhs = Complex64::new(0.0, 0.0);
    let mut partial = Complex64::new(0.0, 0.0);
    let mut sup = 0.0f64;
    for (&wx, &fx) in w.iter().zip(f) {
        let c = e(fx);
        lhs += wx * c;
        partial += c;
        sup = sup.max(partial.norm());
    }
    Ok((lhs.norm(), v1_norm(w) * sup))
}

/// Randomized inequality suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// `|a*Ca| ≤ ‖a‖²(max row sum + max column sum)`.
    RowSum,
    /// `|a*Ca| ≤ ‖a‖²(max_n Σ_m |d_{n,m}|)^{1/2}` for Hermitian `C`.
    Squared,
    /// Summation by parts with the `V¹` norm.
    SummationByParts,
    /// Derivative tests on random linear and quadratic phases.
    Derivative,
}

impl Suite {
    pub const ALL: [Suite; 4] =
        [Suite::RowSum, Suite::Squared, Suite::SummationByParts, Suite::Derivative];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::RowSum => "row_sum",
            Suite::Squared => "squared",
            Suite::SummationByParts => "summation_by_parts",
            Suite::Derivative => "derivative",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| LabError::invalid(format!("unknown suite {s:?}")))
    }
}

/// Ratio cap for the derivative suite.
pub const DERIVATIVE_RATIO_CAP: f64 = 10.0;

/// Absolute slack for exact inequalities.
const SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` seen.
    pub worst_ratio: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
}

fn random_matrix(rng: &mut ChaCha8Rng, hermitian: bool) -> Result<(KernelMatrix, CoefficientVector)> {
    let dim = rng.gen_range(2..=12usize);
    let lo = rng.gen_range(-5..=5i64);
    let sparse = rng.gen_bool(0.3);
    let draw = |rng: &mut ChaCha8Rng| {
        if sparse && rng.gen_bool(0.5) {
            Complex64::new(0.0, 0.0)
        } else {
            gaussian(rng)
        }
    };
    let entries: Vec<Complex64> = (0..dim * dim).map(|_| draw(rng)).collect();
    let c = if hermitian {
        KernelMatrix::hermitian_from_fn(lo, dim, KernelTag::Generic, |n, m| {
            entries[(n - lo) as usize * dim + (m - lo) as usize]
        })?
    } else {
        KernelMatrix::new(lo, dim, entries, KernelTag::Generic)?
    };
    let a = CoefficientVector::from_fn(lo, lo + dim as i64 - 1, |_| gaussian(rng))?;
    Ok((c, a))
}

/// One trial: `(lhs, rhs)` of the suite's inequality.
fn trial(suite: Suite, rng: &mut ChaCha8Rng) -> Result<(f64, f64)> {
    match suite {
        Suite::RowSum | Suite::Squared => {
            let hermitian = suite == Suite::Squared;
            let (c, a) = random_matrix(rng, hermitian)?;
            let lhs = c.quadratic_form(&a)?.norm();
            let bound = if hermitian { ttstar_bound(&c)? } else { schur_bound(&c) };
            Ok((lhs, a.norm().powi(2) * bound))
        }
        Suite::SummationByParts => {
            let len = rng.gen_range(1..=200usize);
            let monotone = rng.gen_bool(0.5);
            let mut w: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            if monotone {
                w.sort_by(f64::total_cmp);
            }
            let (alpha, beta) = (rng.gen::<f64>(), rng.gen::<f64>() * 0.01);
            let f: Vec<f64> = (0..len).map(|x| alpha * x as f64 + beta * (x * x) as f64).collect();
            partial_summation_bound(&w, &f)
        }
        Suite::Derivative => {
            let len = rng.gen_range(10..=2000i64);
            let t = if rng.gen_bool(0.5) {
                let alpha = 10f64.powf(rng.gen_range(-3.0..-0.5));
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                derivative_test_check(1, &SumPhase::linear(sign * alpha), (1, len), alpha)?
            } else {
                let tt = 10f64.powf(rng.gen_range(1.0..6.0));
                let beta = rng.gen::<f64>();
                derivative_test_check(2, &SumPhase::quadratic(tt, beta), (1, len), 1.0 / tt)?
            };
            Ok((t.lhs, t.rhs * DERIVATIVE_RATIO_CAP))
        }
    }
}

/// Runs `trials` random instances of a suite; any `lhs > rhs` (beyond
/// rounding slack) is a violation.
pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (suite as u64) << 32);
    let mut violations = 0;
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let (lhs, rhs) = trial(suite, &mut rng)?;
        if lhs > rhs * (1.0 + SLACK) + SLACK {
            violations += 1;
        }
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    let worst_ratio = if suite == Suite::Derivative { worst * DERIVATIVE_RATIO_CAP } else { worst };
    Ok(SuiteReport { suite, trials, violations, worst_ratio })
}
