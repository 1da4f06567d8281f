//! Scans over `N`, growth-exponent fits and experiment record files.

pub mod fit;
pub mod records;
pub mod scan;

pub use fit::{fit_exponent, fit_points, FitKind, FitModel, FitResult};
pub use records::{from_json, load, persist, to_json, ExperimentRecord, Fingerprint, ERROR_PREFIX};
pub use scan::{measure, run_scan, Quantity, ScanSettings};
