use num_complex::Complex64;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exp_core::e;

/// `f(x) = ((k−1)/k)·((x−n)/(x+n)^{1/(k−1)} − (x−m)/(x+m)^{1/(k−1)})`,
/// the phase of `x ↦ c_{n,x}·c_{x,m}` up to sign, on `[C_k·N, N]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseProfile {
    pub n: i64,
    pub m: i64,
    pub k: u32,
    /// The scale `N`.
    pub scale: u64,
    pub c_k: f64,
}

impl PhaseProfile {
    pub fn new(n: i64, m: i64, k: u32, scale: u64, c_k: f64) -> Result<Self> {
        if k < 3 {
            return Err(LabError::invalid(format!("k must satisfy k >= 3, got {k}")));
        }
        let lo = c_k * scale as f64;
        if !(c_k > 0.0 && c_k < 1.0) || (n as f64) < lo || n >= m || m > scale as i64 {
            return Err(LabError::invalid(format!(
                "need C_k·N <= n < m <= N, got n = {n}, m = {m}, N = {scale}, C_k = {c_k}"
            )));
        }
        Ok(PhaseProfile { n, m, k, scale, c_k })
    }

    fn inv(&self) -> f64 {
        1.0 / (self.k - 1) as f64
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.c_k * self.scale as f64, self.scale as f64)
    }

    pub fn value(&self, x: f64) -> f64 {
        let (n, m, kf) = (self.n as f64, self.m as f64, self.k as f64);
        let r = self.inv();
        (kf - 1.0) / kf * ((x - n) / (x + n).powf(r) - (x - m) / (x + m).powf(r))
    }

    pub fn first(&self, x: f64) -> f64 {
        let (n, m, kf) = (self.n as f64, self.m as f64, self.k as f64);
        let p = kf * self.inv();
        let h = |t: f64| ((kf - 2.0) * x + kf * t) / (x + t).powf(p);
        (h(n) - h(m)) / kf
    }

    pub fn second(&self, x: f64) -> f64 {
        let (n, m, kf) = (self.n as f64, self.m as f64, self.k as f64);
        let p = (2.0 * kf - 1.0) * self.inv();
        let g = |t: f64| ((2.0 - kf) * x + (2.0 - 3.0 * kf) * t) / (x + t).powf(p);
        (g(n) - g(m)) / (kf * (kf - 1.0))
    }

    /// The zero of `f'` in `(n, m)`, by bisection.
    pub fn critical_point(&self) -> Result<f64> {
        let (mut a, mut b) = (self.n as f64, self.m as f64);
        let (fa, fb) = (self.first(a), self.first(b));
        if fa.signum() == fb.signum() {
            return Err(LabError::invalid("f' does not change sign on (n, m)"));
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if self.first(mid).signum() == fa.signum() {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(0.5 * (a + b))
    }

    /// `N^{(2k−1)/(k−1)}`.
    fn curvature_scale(&self) -> f64 {
        (self.scale as f64).powf((2.0 * self.k as f64 - 1.0) * self.inv())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileReport {
    /// `|f(n) − f(m)|`.
    pub endpoint_defect: f64,
    pub r1_min: f64,
    pub r1_max: f64,
    pub r2_min: f64,
    pub r2_max: f64,
    /// Central differences of `f` against `f'`, relative to `sup |f'|`.
    pub first_fd_error: f64,
    /// Central differences of `f'` against `f''`, relative to `sup |f''|`.
    pub second_fd_error: f64,
}

fn linspace(a: f64, b: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| a + (b - a) * i as f64 / (count - 1) as f64)
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Curvature ratio `r₂ = |f''|·N^{(2k−1)/(k−1)}/(m−n)` over the block and
/// slope ratio `r₁ = |f'|·N^{(2k−1)/(k−1)}/(m−n)²` within `0.1(m−n)` of
/// either endpoint.
pub fn phase_profile_checks(profile: &PhaseProfile) -> ProfileReport {
    let (lo, hi) = profile.domain();
    let (n, m) = (profile.n as f64, profile.m as f64);
    let gap = m - n;
    let scale = profile.curvature_scale();
    let (r2_min, r2_max) = min_max(linspace(lo, hi, 201).map(|x| profile.second(x).abs() * scale / gap));
    let near = |c: f64| linspace((c - 0.1 * gap).max(lo), (c + 0.1 * gap).min(hi), 101);
    let (r1_min, r1_max) =
        min_max(near(n).chain(near(m)).map(|x| profile.first(x).abs() * scale / (gap * gap)));

    // Truncation error is O(h²); rounding in f stays far below it at this h.
    let h = 1.0 / 64.0;
    let xs: Vec<f64> = linspace(lo + h, hi - h, 97).collect();
    let sup1 = xs.iter().map(|&x| profile.first(x).abs()).fold(0.0, f64::max);
    let sup2 = xs.iter().map(|&x| profile.second(x).abs()).fold(0.0, f64::max);
    let first_fd_error = xs
        .iter()
        .map(|&x| ((profile.value(x + h) - profile.value(x - h)) / (2.0 * h) - profile.first(x)).abs())
        .fold(0.0, f64::max)
        / sup1;
    let second_fd_error = xs
        .iter()
        .map(|&x| ((profile.first(x + h) - profile.first(x - h)) / (2.0 * h) - profile.second(x)).abs())
        .fold(0.0, f64::max)
        / sup2;
    ProfileReport {
        endpoint_defect: (profile.value(n) - profile.value(m)).abs(),
        r1_min,
        r1_max,
        r2_min,
        r2_max,
        first_fd_error,
        second_fd_error,
    }
}

/// `1/√|(n−x)(m−x)| · 1/((n+x)(m+x))^{1/(2(k−1))}`, the modulus of
/// `c_{n,x}·c_{x,m}` without `|C_sta|²`.
pub fn correlation_weight(n: i64, m: i64, x: i64, k: u32) -> f64 {
    let (nf, mf, xf) = (n as f64, m as f64, x as f64);
    let r = 0.5 / (k - 1) as f64;
    1.0 / (((nf - xf) * (mf - xf)).abs().sqrt() * ((nf + xf) * (mf + xf)).powf(r))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowSum {
    /// `|Σ w_x e(f(x))|` over the window.
    pub modulus: f64,
    /// `Σ w_x` over the window.
    pub mass: f64,
}

impl WindowSum {
    pub fn efficiency(&self) -> f64 {
        self.modulus / self.mass
    }
}

/// Weighted sum of `e(f(x))` over integers `|x − x₀| ≤ 0.1(m − n)` around
/// the critical point of `f`; near the crossover separation the phase is
/// nearly constant there.
pub fn critical_window_sum(profile: &PhaseProfile) -> Result<WindowSum> {
    let x0 = profile.critical_point()?;
    let r = 0.1 * (profile.m - profile.n) as f64;
    let (a, b) = ((x0 - r).ceil() as i64, (x0 + r).floor() as i64);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    for x in a..=b {
        if x == profile.n || x == profile.m {
            continue;
        }
        let w = correlation_weight(profile.n, profile.m, x, profile.k);
        sum += w * e(profile.value(x as f64));
        mass += w;
    }
    if mass == 0.0 {
        return Err(LabError::invalid("critical window contains no integers"));
    }
    Ok(WindowSum { modulus: sum.norm(), mass })
}
