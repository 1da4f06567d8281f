//! Composite 16-point Gauss–Legendre grids sized to the phase's oscillation.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::exp_core::phase::PhaseSpec;

pub const PANEL_POINTS: usize = 16;
pub const MIN_NODES: usize = 64;
pub const DEFAULT_OVERSAMPLING: f64 = 8.0;
/// About 1 GB worth of (node, weight) pairs plus per-node work buffers.
pub const DEFAULT_NODE_BUDGET: usize = 1 << 26;

/// Reference 16-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre_16() -> &'static ([f64; PANEL_POINTS], [f64; PANEL_POINTS]) {
    static RULE: OnceLock<([f64; PANEL_POINTS], [f64; PANEL_POINTS])> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre::<PANEL_POINTS>())
}

fn gauss_legendre<const P: usize>() -> ([f64; P], [f64; P]) {
    let mut x = [0.0; P];
    let mut w = [0.0; P];
    let n = P as f64;
    for i in 0..P.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=P {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[P - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[P - 1 - i] = wi;
    }
    (x, w)
}

/// How panels are laid out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GridLayout {
    /// Equal panels sized by the global slope bound.
    #[default]
    Uniform,
    /// Panel widths follow the local slope bound; far fewer nodes where the
    /// phase is flat.
    Graded,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridOptions {
    pub oversampling: f64,
    pub node_budget: usize,
    pub layout: GridLayout,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            oversampling: DEFAULT_OVERSAMPLING,
            node_budget: DEFAULT_NODE_BUDGET,
            layout: GridLayout::Uniform,
        }
    }
}

impl GridOptions {
    pub fn with_oversampling(oversampling: f64) -> Self {
        GridOptions { oversampling, ..Default::default() }
    }

    pub fn graded(mut self) -> Self {
        self.layout = GridLayout::Graded;
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    max_phase_variation: f64,
    oversampling: f64,
}

impl QuadratureGrid {
    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    /// Certified upper bound for the total phase change (in cycles) of any
    /// integrand the grid was built for.
    pub fn max_phase_variation(&self) -> f64 {
        self.max_phase_variation
    }
    pub fn oversampling(&self) -> f64 {
        self.oversampling
    }

    /// `Σ w_i f(x_i)` in node order.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(*x) * *w;
        }
        acc
    }

    pub fn integrate_real(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }

    pub(crate) fn check_covers(&self, lo: f64, hi: f64) -> Result<()> {
        let tol = 1e-12 * (hi - lo).abs().max(1.0);
        if (self.lo - lo).abs() > tol || (self.hi - hi).abs() > tol {
            return Err(LabError::invalid(format!(
                "grid covers [{}, {}] but the interval is [{lo}, {hi}]",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    fn from_panels(
        lo: f64,
        hi: f64,
        breaks: &[f64],
        max_phase_variation: f64,
        oversampling: f64,
    ) -> Result<Self> {
        let (rx, rw) = gauss_legendre_16();
        let panels = breaks.len() - 1;
        let mut nodes = Vec::with_capacity(panels * PANEL_POINTS);
        let mut weights = Vec::with_capacity(panels * PANEL_POINTS);
        for p in breaks.windows(2) {
            let (a, b) = (p[0], p[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, w) in rx.iter().zip(rw) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        let grid = QuadratureGrid { lo, hi, nodes, weights, max_phase_variation, oversampling };
        let sum = neumaier(&grid.weights);
        let len = hi - lo;
        if ((sum - len) / len).abs() > 1e-12 {
            return Err(LabError::invalid(format!(
                "weight sum {sum} does not match interval length {len}"
            )));
        }
        Ok(grid)
    }
}

fn neumaier(v: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for &x in v {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(LabError::invalid(format!("degenerate interval [{lo}, {hi}]")));
    }
    Ok(())
}

fn check_oversampling(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho < 4.0 {
        return Err(LabError::invalid(format!("oversampling must be >= 4, got {rho}")));
    }
    Ok(())
}

fn required_nodes(variation: f64, rho: f64) -> f64 {
    (rho * variation).ceil().max(MIN_NODES as f64)
}

fn check_budget(required: f64, budget: usize) -> Result<usize> {
    if !required.is_finite() || required > budget as f64 {
        return Err(LabError::Resource {
            what: "quadrature grid",
            required: if required.is_finite() { required as usize } else { usize::MAX },
            budget,
        });
    }
    Ok(required as usize)
}

/// Uniform composite rule for an integrand whose phase changes by at most
/// `variation` cycles over `[lo, hi]`.
pub fn grid_for_variation(
    lo: f64,
    hi: f64,
    variation: f64,
    rho: f64,
    budget: usize,
) -> Result<QuadratureGrid> {
    check_interval(lo, hi)?;
    check_oversampling(rho)?;
    if !variation.is_finite() || variation < 0.0 {
        return Err(LabError::invalid(format!("phase variation must be finite, got {variation}")));
    }
    let need = check_budget(required_nodes(variation, rho), budget)?;
    let panels = need.div_ceil(PANEL_POINTS);
    check_budget((panels * PANEL_POINTS) as f64, budget)?;
    let h = (hi - lo) / panels as f64;
    let breaks: Vec<f64> = (0..=panels)
        .map(|i| if i == panels { hi } else { lo + h * i as f64 })
        .collect();
    QuadratureGrid::from_panels(lo, hi, &breaks, variation, rho)
}

/// Grid for integrands built from `e(ψ(x, n))`, `|n| ≤ n_max`, and products of
/// two such characters (Gram entries, `|S|²`). The slope bound of the phase is
/// taken over the interval; the uniform layout gives
/// `nodes ≥ ρ·(N + N²·sup|q'|)·|I|`.
pub fn build_grid(
    phase: &PhaseSpec,
    n_max: u64,
    lo: f64,
    hi: f64,
    opts: GridOptions,
) -> Result<QuadratureGrid> {
    phase.require_1d()?;
    check_interval(lo, hi)?;
    check_oversampling(opts.oversampling)?;
    match opts.layout {
        GridLayout::Uniform => {
            let variation = phase.slope_bound(n_max, lo, hi) * (hi - lo);
            grid_for_variation(lo, hi, variation, opts.oversampling, opts.node_budget)
        }
        GridLayout::Graded => graded_grid(phase, n_max, lo, hi, opts),
    }
}

fn graded_grid(
    phase: &PhaseSpec,
    n_max: u64,
    lo: f64,
    hi: f64,
    opts: GridOptions,
) -> Result<QuadratureGrid> {
    let rho = opts.oversampling;
    let per_panel = PANEL_POINTS as f64 / rho;
    let max_width = (hi - lo) / (MIN_NODES / PANEL_POINTS) as f64;
    let slope = |a: f64, b: f64| phase.slope_bound(n_max, a.min(b), a.max(b));
    let mut breaks = vec![lo];
    let mut variation = 0.0;
    let mut x = lo;
    while x < hi {
        let mut h = (per_panel / slope(x, x)).min(max_width);
        h = (per_panel / slope(x, (x + h).min(hi))).min(max_width);
        // Guard for slope bounds that are not monotone under inclusion.
        while h * slope(x, (x + h).min(hi)) > per_panel * (1.0 + 1e-12) {
            h *= 0.5;
        }
        let next = if x + h >= hi || hi - (x + h) < 1e-9 * h { hi } else { x + h };
        variation += slope(x, next) * (next - x);
        breaks.push(next);
        x = next;
        if breaks.len() * PANEL_POINTS > opts.node_budget {
            let estimate = slope(lo, hi) * (hi - lo) * rho;
            return Err(LabError::Resource {
                what: "quadrature grid",
                required: estimate.min(usize::MAX as f64) as usize,
                budget: opts.node_budget,
            });
        }
    }
    QuadratureGrid::from_panels(lo, hi, &breaks, variation, rho)
}
