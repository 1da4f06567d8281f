use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Settings that determine a computed value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub c_small: f64,
    pub c_k: f64,
    pub rho: f64,
    pub tol: f64,
    pub seed: u64,
}

/// Prefix of the quantity tag of a failed scan point.
pub const ERROR_PREFIX: &str = "error:";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub quantity: String,
    pub n: u64,
    pub k: u32,
    pub p: Option<f64>,
    /// For error records, the exit code of the failure.
    pub value: f64,
    pub fingerprint: Fingerprint,
    /// Seconds since the Unix epoch, or empty when suppressed.
    pub timestamp: String,
}

impl ExperimentRecord {
    pub fn new(
        quantity: impl Into<String>,
        n: u64,
        k: u32,
        p: Option<f64>,
        value: f64,
        fingerprint: Fingerprint,
        stamped: bool,
    ) -> Result<Self> {
        let quantity = quantity.into();
        if !value.is_finite() {
            return Err(LabError::invalid(format!("{quantity} at N = {n} is not finite: {value}")));
        }
        Ok(ExperimentRecord { quantity, n, k, p, value, fingerprint, timestamp: timestamp(stamped) })
    }

    /// Record standing in for a scan point that failed with `err`.
    pub fn failure(
        quantity: &str,
        n: u64,
        k: u32,
        p: Option<f64>,
        err: &LabError,
        fingerprint: Fingerprint,
        stamped: bool,
    ) -> Self {
        ExperimentRecord {
            quantity: format!("{ERROR_PREFIX}{quantity}"),
            n,
            k,
            p,
            value: err.exit_code() as f64,
            fingerprint,
            timestamp: timestamp(stamped),
        }
    }

    pub fn is_error(&self) -> bool {
        self.quantity.starts_with(ERROR_PREFIX)
    }
}

fn timestamp(stamped: bool) -> String {
    if !stamped {
        return String::new();
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs().to_string())
        .unwrap_or_default()
}

/// One line of the record file.
#[derive(Debug, Serialize, Deserialize)]
struct Row {
    quantity: String,
    #[serde(rename = "N")]
    n: u64,
    k: u32,
    p: Option<f64>,
    value: f64,
    c_small: f64,
    #[serde(rename = "C_k")]
    c_k: f64,
    rho: f64,
    tol: f64,
    seed: u64,
    timestamp: String,
}

impl From<&ExperimentRecord> for Row {
    fn from(r: &ExperimentRecord) -> Self {
        let f = r.fingerprint;
        Row {
            quantity: r.quantity.clone(),
            n: r.n,
            k: r.k,
            p: r.p,
            value: r.value,
            c_small: f.c_small,
            c_k: f.c_k,
            rho: f.rho,
            tol: f.tol,
            seed: f.seed,
            timestamp: r.timestamp.clone(),
        }
    }
}

impl From<Row> for ExperimentRecord {
    fn from(r: Row) -> Self {
        ExperimentRecord {
            quantity: r.quantity,
            n: r.n,
            k: r.k,
            p: r.p,
            value: r.value,
            fingerprint: Fingerprint {
                c_small: r.c_small,
                c_k: r.c_k,
                rho: r.rho,
                tol: r.tol,
                seed: r.seed,
            },
            timestamp: r.timestamp,
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> LabError {
    LabError::Io { path: path.to_path_buf(), source }
}

fn csv_error(path: &Path, err: csv::Error) -> LabError {
    let line = err.position().map_or(0, |p| p.line());
    match err.into_kind() {
        csv::ErrorKind::Io(source) => io_error(path, source),
        kind => LabError::Parse { line, message: format!("{}: {kind:?}", path.display()) },
    }
}

/// Appends records to a CSV file, writing the header when the file is new
/// or empty.
pub fn persist(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| io_error(path, e))?;
    let empty = file.metadata().map_err(|e| io_error(path, e))?.len() == 0;
    let mut buf = Vec::new();
    {
        let mut writer = csv::WriterBuilder::new().has_headers(empty).from_writer(&mut buf);
        for r in records {
            writer.serialize(Row::from(r)).map_err(|e| csv_error(path, e))?;
        }
        writer.flush().map_err(|e| io_error(path, e))?;
    }
    // One write call per batch keeps concurrent appenders from interleaving rows.
    file.write_all(&buf).map_err(|e| io_error(path, e))
}

pub fn load(path: &Path) -> Result<Vec<ExperimentRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let mut out = Vec::new();
    for row in reader.deserialize::<Row>() {
        let row = row.map_err(|e| csv_error(path, e))?;
        out.push(ExperimentRecord::from(row));
    }
    for (i, r) in out.iter().enumerate() {
        if !r.value.is_finite() {
            return Err(LabError::Parse { line: i as u64 + 2, message: "non-finite value".into() });
        }
    }
    Ok(out)
}

pub fn to_json(records: &[ExperimentRecord]) -> Result<String> {
    serde_json::to_string_pretty(records).map_err(|e| LabError::invalid(e.to_string()))
}

pub fn from_json(text: &str) -> Result<Vec<ExperimentRecord>> {
    serde_json::from_str(text)
        .map_err(|e| LabError::Parse { line: e.line() as u64, message: e.to_string() })
}
