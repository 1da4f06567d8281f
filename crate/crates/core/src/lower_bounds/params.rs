use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exp_core::PhaseSpec;

/// Default for every "small enough" constant of the constructions.
pub const DEFAULT_C_SMALL: f64 = 0.1;

/// Root of `φ'(x) = 1/N`.
///
/// Closed form for monomial phases; Newton iteration from the monomial seed
/// otherwise.
pub fn critical_point(phase: &PhaseSpec, n: u64) -> Result<f64> {
    phase.require_1d()?;
    if n == 0 {
        return Err(LabError::invalid("N must be positive"));
    }
    let k = phase.k() as i32;
    let target = 1.0 / n as f64;
    let expo = -1.0 / (k - 1) as f64;
    if let PhaseSpec::MonomialCurve { beta, .. } = phase {
        // φ'(x) = −β·k·x^{k−1}
        let scale = -beta * k as f64 * n as f64;
        if scale > 0.0 {
            return Ok(scale.powf(expo));
        }
        if k % 2 == 0 {
            return Ok(-(-scale).powf(expo));
        }
        return Err(LabError::invalid(format!(
            "phi' = 1/N has no real root for {phase}"
        )));
    }
    let mut x = (k as f64 * n as f64).powf(expo);
    let mut residual = f64::INFINITY;
    for _ in 0..100 {
        let f = phase.profile_derivative(1, x) - target;
        residual = (f / target).abs();
        if residual <= 1e-13 {
            return Ok(x);
        }
        let slope = phase.profile_derivative(2, x);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        x -= f / slope;
    }
    if residual <= 1e-12 {
        return Ok(x);
    }
    Err(LabError::Convergence { iterations: 100, residual })
}

/// Parameters of the single-block construction at scale `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstructionParams {
    pub n: u64,
    pub k: u32,
    pub c_small: f64,
    /// `φ'(x_N) = 1/N`.
    pub x_n: f64,
    /// Window half-width `c·N^{−(k+1)/(3(k−1))}`.
    pub delta: f64,
    /// Block half-width `⌊N^{(2k−1)/(3(k−1))}⌋`.
    pub half_block: i64,
    /// `⌊N/2⌋`.
    pub center: i64,
}

impl ConstructionParams {
    pub fn new(phase: &PhaseSpec, n: u64, c_small: f64) -> Result<Self> {
        if !(c_small > 0.0 && c_small.is_finite()) {
            return Err(LabError::invalid(format!("c_small must be positive, got {c_small}")));
        }
        let k = phase.k();
        let x_n = critical_point(phase, n)?;
        let kf = k as f64;
        let nf = n as f64;
        let delta = c_small * nf.powf(-(kf + 1.0) / (3.0 * (kf - 1.0)));
        let half_block = block_half_width(n, k);
        let center = (n / 2) as i64;
        if center + half_block > n as i64 || center - half_block < -(n as i64) {
            return Err(LabError::invalid(format!(
                "block {center} ± {half_block} leaves [−{n}, {n}] (k = {k})"
            )));
        }
        Ok(ConstructionParams { n, k, c_small, x_n, delta, half_block, center })
    }

    /// Index range of the active block.
    pub fn block(&self) -> (i64, i64) {
        (self.center - self.half_block, self.center + self.half_block)
    }

    pub fn active_count(&self) -> usize {
        (2 * self.half_block + 1) as usize
    }

    /// `|φ'(x_N) − 1/N|·N`.
    pub fn root_residual(&self, phase: &PhaseSpec) -> f64 {
        (phase.profile_derivative(1, self.x_n) * self.n as f64 - 1.0).abs()
    }

    /// `ψ_xn(x_N, N/2) = 1 − N·φ'(x_N)`.
    pub fn mixed_partial_at_center(&self, phase: &PhaseSpec) -> f64 {
        1.0 - self.n as f64 * phase.profile_derivative(1, self.x_n)
    }

    pub fn window(&self) -> InterferenceSet {
        InterferenceSet::interval(self.x_n, self.delta)
    }

    /// Cubic remainders of the Taylor expansion of `ψ` about `(x_N, n₀)`
    /// over the window times the block.
    pub fn taylor_budget(&self, phase: &PhaseSpec) -> TaylorBudget {
        let (x0, x1) = (self.x_n - self.delta, self.x_n + self.delta);
        let n_top = (self.center + self.half_block).abs().max((self.center - self.half_block).abs()) as f64;
        let sup = |order: u32| {
            (0..=256)
                .map(|i| phase.profile_derivative(order, x0 + (x1 - x0) * i as f64 / 256.0).abs())
                .fold(0.0, f64::max)
        };
        let (d, m) = (self.delta, self.half_block as f64);
        // ψ_xnn = −2φ', ψ_xxn = −2nφ'', ψ_xxx = −n²φ'''
        let xnn = 2.0 * sup(1) * d * m * m;
        let xxn = 2.0 * n_top * sup(2) * d * d * m;
        let xxx = n_top * n_top * sup(3) * d * d * d;
        TaylorBudget { xnn, xxn, xxx }
    }
}

/// `⌊N^{(2k−1)/(3(k−1))}⌋`, guarded against rounding at exact powers.
pub fn block_half_width(n: u64, k: u32) -> i64 {
    let kf = k as f64;
    let raw = (n as f64).powf((2.0 * kf - 1.0) / (3.0 * (kf - 1.0)));
    let r = raw.round();
    if (raw - r).abs() < 1e-9 * r.max(1.0) {
        r as i64
    } else {
        raw.floor() as i64
    }
}

/// Raw sizes of the three cubic remainder terms. Their Taylor coefficients
/// are `1/2`, `1/2` and `1/6`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TaylorBudget {
    /// `‖ψ_xnn‖·Δ·M²`
    pub xnn: f64,
    /// `‖ψ_xxn‖·Δ²·M`
    pub xxn: f64,
    /// `‖ψ_xxx‖·Δ³`
    pub xxx: f64,
}

impl TaylorBudget {
    pub fn raw(&self) -> [f64; 3] {
        [self.xnn, self.xxn, self.xxx]
    }

    /// Remainders with their Taylor coefficients, the amounts the phase can
    /// actually move.
    pub fn weighted(&self) -> [f64; 3] {
        [self.xnn / 2.0, self.xxn / 2.0, self.xxx / 6.0]
    }

    pub fn within(&self, limit: f64) -> bool {
        self.weighted().iter().all(|&v| v <= limit)
    }
}

/// Coordinates in which an interference set is a box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SetFrame {
    /// Box in the original variables.
    Cartesian,
    /// `(x, y − x)`: a parallelogram around the diagonal.
    Diagonal,
    /// `(u, v) = (x, y + x³)`; the map has unit Jacobian.
    Substituted,
}

/// Box `Π [c_i − h_i, c_i + h_i]` in the coordinates given by `frame`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterferenceSet {
    pub center: Vec<f64>,
    pub half_widths: Vec<f64>,
    pub frame: SetFrame,
}

impl InterferenceSet {
    pub fn new(center: Vec<f64>, half_widths: Vec<f64>, frame: SetFrame) -> Result<Self> {
        if center.is_empty() || center.len() > 3 || center.len() != half_widths.len() {
            return Err(LabError::invalid("set needs 1 to 3 coordinates with matching widths"));
        }
        if half_widths.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(LabError::invalid("half-widths must be positive"));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(LabError::invalid("center must be finite"));
        }
        Ok(InterferenceSet { center, half_widths, frame })
    }

    pub fn interval(center: f64, half_width: f64) -> Self {
        InterferenceSet {
            center: vec![center],
            half_widths: vec![half_width],
            frame: SetFrame::Cartesian,
        }
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    /// Lebesgue measure; the frames are measure preserving.
    pub fn measure(&self) -> f64 {
        self.half_widths.iter().map(|h| 2.0 * h).product()
    }

    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        (self.center[axis] - self.half_widths[axis], self.center[axis] + self.half_widths[axis])
    }

    /// Same box moved by `offset` along each axis.
    pub fn shifted(&self, offset: &[f64]) -> Self {
        let mut out = self.clone();
        for (c, o) in out.center.iter_mut().zip(offset) {
            *c += o;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_rule_at_exact_powers() {
        // 64^{5/6} = 32 exactly
        assert_eq!(block_half_width(64, 3), 32);
        assert_eq!(block_half_width(1024, 3), 322);
    }

    #[test]
    fn negative_beta_even_k_root() {
        let phase = PhaseSpec::monomial(4, 1.0).unwrap();
        let x = critical_point(&phase, 100).unwrap();
        assert!(x < 0.0);
        assert!((phase.profile_derivative(1, x) * 100.0 - 1.0).abs() < 1e-12);
        assert!(critical_point(&PhaseSpec::monomial(3, 1.0).unwrap(), 100).is_err());
    }
}
