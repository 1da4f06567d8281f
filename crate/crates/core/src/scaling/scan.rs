use num_complex::Complex64;

use crate::asymptotics::{correlation_matrix, StationaryModel, KERNEL_BLOCK_CONSTANT};
use crate::error::{LabError, Result};
use crate::exp_core::{GridOptions, PhaseSpec, DEFAULT_NODE_BUDGET};
use crate::lower_bounds::{
    constant_coeff_ratio, cylinder_construction, interference_certificate,
    interference_coefficients, lower_bound_ratio, moment_curve_construction, ConstructionParams,
    DEFAULT_C_SMALL,
};
use crate::scaling::records::{ExperimentRecord, Fingerprint};
use crate::spectral::{opnorm_iterative, IterativeOptions, OpNormMethod};

/// A scalar that can be measured at each scale `N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quantity {
    /// `B_{N,k}` for `n·x − n²·x^k` on `(−1, 1)`.
    OpNorm { k: u32 },
    /// Interference ratio of the single-block construction.
    LowerBound { k: u32, p: f64 },
    /// `min |S| / (2M + 1)` of the single-block construction.
    Certificate { k: u32 },
    Cylinder,
    Moment,
    /// Constant coefficients, `|x| ≤ 1/N`.
    ConstantNearOrigin { k: u32, p: f64 },
    /// Constant coefficients, `(−1, 1)`.
    ConstantFull { k: u32, p: f64 },
    /// `max_n Σ_m |d_{n,m}|` with `|C_sta| = 1`.
    RowSum { k: u32 },
}

impl Quantity {
    pub fn tag(&self) -> &'static str {
        match self {
            Quantity::OpNorm { .. } => "opnorm",
            Quantity::LowerBound { .. } => "lower_bound_ratio",
            Quantity::Certificate { .. } => "interference_efficiency",
            Quantity::Cylinder => "cylinder_ratio",
            Quantity::Moment => "moment_ratio",
            Quantity::ConstantNearOrigin { .. } => "constant_ratio_near",
            Quantity::ConstantFull { .. } => "constant_ratio_full",
            Quantity::RowSum { .. } => "row_sum",
        }
    }

    pub fn k(&self) -> u32 {
        match *self {
            Quantity::OpNorm { k }
            | Quantity::LowerBound { k, .. }
            | Quantity::Certificate { k }
            | Quantity::ConstantNearOrigin { k, .. }
            | Quantity::ConstantFull { k, .. }
            | Quantity::RowSum { k } => k,
            Quantity::Cylinder | Quantity::Moment => 3,
        }
    }

    pub fn p(&self) -> Option<f64> {
        match *self {
            Quantity::LowerBound { p, .. }
            | Quantity::ConstantNearOrigin { p, .. }
            | Quantity::ConstantFull { p, .. } => Some(p),
            Quantity::Cylinder => Some(2.0),
            Quantity::Moment => Some(6.0),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanSettings {
    pub c_small: f64,
    /// Block constant of the coefficient kernels.
    pub c_k: f64,
    pub rho: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Fill the timestamp column.
    pub stamped: bool,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            c_small: DEFAULT_C_SMALL,
            c_k: KERNEL_BLOCK_CONSTANT,
            rho: 4.0,
            tol: 1e-9,
            max_iter: 10_000,
            seed: 0,
            stamped: true,
        }
    }
}

impl ScanSettings {
    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint {
            c_small: self.c_small,
            c_k: self.c_k,
            rho: self.rho,
            tol: self.tol,
            seed: self.seed,
        }
    }

    pub fn grid(&self) -> GridOptions {
        GridOptions { oversampling: self.rho, node_budget: DEFAULT_NODE_BUDGET, ..Default::default() }
            .graded()
    }

    pub fn iterative(&self) -> IterativeOptions {
        IterativeOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            method: OpNormMethod::Lanczos,
            grid: self.grid(),
            use_symmetry: true,
        }
    }
}

/// The quantity at one scale.
pub fn measure(quantity: Quantity, n: u64, s: &ScanSettings) -> Result<f64> {
    match quantity {
        Quantity::OpNorm { k } => {
            let phase = PhaseSpec::standard(k)?;
            Ok(opnorm_iterative(n as i64, &phase, -1.0, 1.0, &s.iterative())?.value)
        }
        Quantity::LowerBound { k, p } => {
            let phase = PhaseSpec::standard(k)?;
            let params = ConstructionParams::new(&phase, n, s.c_small)?;
            let a = interference_coefficients(&params, &phase)?;
            lower_bound_ratio(&a, &phase, p, &params.window())
        }
        Quantity::Certificate { k } => {
            let phase = PhaseSpec::standard(k)?;
            let params = ConstructionParams::new(&phase, n, s.c_small)?;
            let a = interference_coefficients(&params, &phase)?;
            Ok(interference_certificate(&a, &phase, &params.window(), 0.0)?.efficiency())
        }
        Quantity::Cylinder => Ok(cylinder_construction(n, s.c_small, 0.0)?.1.ratio),
        Quantity::Moment => Ok(moment_curve_construction(n, s.c_small, 0.0)?.1.ratio),
        Quantity::ConstantNearOrigin { k, p } => {
            Ok(constant_coeff_ratio(n, k, p, s.grid())?.near_origin)
        }
        Quantity::ConstantFull { k, p } => Ok(constant_coeff_ratio(n, k, p, s.grid())?.full_interval),
        Quantity::RowSum { k } => {
            let model = StationaryModel::new(k, n, Complex64::new(1.0, 0.0), s.c_k)?;
            let d = correlation_matrix(&model)?;
            Ok(d.abs_row_sums().into_iter().fold(0.0, f64::max))
        }
    }
}

/// One record per scale; failures become error records and the scan goes on.
pub fn run_scan(quantity: Quantity, scales: &[u64], s: &ScanSettings) -> Result<Vec<ExperimentRecord>> {
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::invalid("scan scales must be strictly increasing"));
    }
    let fp = s.fingerprint();
    let (tag, k, p) = (quantity.tag(), quantity.k(), quantity.p());
    Ok(scales
        .iter()
        .map(|&n| {
            match measure(quantity, n, s)
                .and_then(|v| ExperimentRecord::new(tag, n, k, p, v, fp, s.stamped))
            {
                Ok(r) => r,
                Err(err) => ExperimentRecord::failure(tag, n, k, p, &err, fp, s.stamped),
            }
        })
        .collect())
}
