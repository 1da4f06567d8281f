//! Finitely supported coefficient sequences `(a_n)_{lo ≤ n ≤ hi}`.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientVector {
    lo: i64,
    values: Vec<Complex64>,
    norm: f64,
}

fn l2(values: &[Complex64]) -> f64 {
    // Scaled accumulation so that huge or tiny entries don't overflow.
    let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    let s: f64 = values.iter().map(|v| (v / scale).norm_sqr()).sum();
    scale * s.sqrt()
}

impl CoefficientVector {
    pub fn new(lo: i64, values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LabError::invalid("coefficient vector must be nonempty"));
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LabError::invalid(format!(
                "coefficient a_{} is not finite",
                lo + i as i64
            )));
        }
        let norm = l2(&values);
        Ok(CoefficientVector { lo, values, norm })
    }

    pub fn zeros(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(LabError::invalid(format!("empty index range [{lo}, {hi}]")));
        }
        Self::new(lo, vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize])
    }

    /// All-ones on `[lo, hi]`.
    pub fn constant(lo: i64, hi: i64) -> Result<Self> {
        if hi < lo {
            return Err(LabError::invalid(format!("empty index range [{lo}, {hi}]")));
        }
        Self::new(lo, vec![Complex64::new(1.0, 0.0); (hi - lo + 1) as usize])
    }

    pub fn from_fn(lo: i64, hi: i64, f: impl FnMut(i64) -> Complex64) -> Result<Self> {
        if hi < lo {
            return Err(LabError::invalid(format!("empty index range [{lo}, {hi}]")));
        }
        Self::new(lo, (lo..=hi).map(f).collect())
    }

    /// Independent complex Gaussian entries, normalized to unit ℓ².
    pub fn random_unit(lo: i64, hi: i64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = Self::from_fn(lo, hi, |_| {
            // Box-Muller.
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            Complex64::from_polar(r, std::f64::consts::TAU * u2)
        })?;
        v.normalized()
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `a_n`, zero outside the support range.
    pub fn get(&self, n: i64) -> Complex64 {
        if n < self.lo || n > self.hi() {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[(n - self.lo) as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.values.iter().enumerate().map(move |(i, v)| (self.lo + i as i64, *v))
    }

    /// ℓ² norm, cached at construction.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn normalized(&self) -> Result<Self> {
        if self.norm == 0.0 {
            return Err(LabError::invalid("cannot normalize the zero vector"));
        }
        Self::new(self.lo, self.values.iter().map(|v| v / self.norm).collect())
    }

    /// Number of nonzero entries.
    pub fn active_count(&self) -> usize {
        self.values.iter().filter(|v| v.norm_sqr() > 0.0).count()
    }

    /// Copy onto the wider range `[lo, hi]`, padding with zeros.
    pub fn embed(&self, lo: i64, hi: i64) -> Result<Self> {
        if lo > self.lo || hi < self.hi() {
            return Err(LabError::invalid(format!(
                "range [{lo}, {hi}] does not contain [{}, {}]",
                self.lo,
                self.hi()
            )));
        }
        Self::from_fn(lo, hi, |n| self.get(n))
    }

    /// `α·self + β·other` over the union of the two ranges.
    pub fn combine(&self, alpha: Complex64, other: &Self, beta: Complex64) -> Result<Self> {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        Self::from_fn(lo, hi, |n| alpha * self.get(n) + beta * other.get(n))
    }

    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        Self::new(self.lo, self.values.iter().map(|v| v * c).collect())
    }

    pub(crate) fn split_parts(&self) -> (Vec<f64>, Vec<f64>) {
        (
            self.values.iter().map(|v| v.re).collect(),
            self.values.iter().map(|v| v.im).collect(),
        )
    }
}
