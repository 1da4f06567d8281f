use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use clap::parser::ValueSource;
use clap::ArgMatches;

/// Why a command could not start.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Every key a config file may set. Each matches the argument id of the
/// flag with the same name, with `-` in place of `_` on the command line.
pub const KEYS: &[&str] = &[
    "k", "n", "p", "c_small", "c_k", "rho", "tol", "max_iter", "seed", "output", "quantity",
    "check", "suite", "trials", "threads", "band_lo", "band_hi", "fit_cap", "model",
];

/// Reads `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_file(text: &str) -> ConfigResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("config line {}: expected `key = value`, got {raw:?}", i + 1)))?;
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(err(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(err(format!("config line {}: duplicate key {key:?}", i + 1)));
        }
    }
    Ok(out)
}

pub fn read_file(path: &Path) -> ConfigResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read config {}: {e}", path.display())))?;
    parse_file(&text)
}

/// File entries that should replace the parsed value of `key`: present in
/// the file, known to this subcommand, and not given on the command line.
pub fn file_value<'a>(
    file: &'a BTreeMap<String, String>,
    matches: &ArgMatches,
    key: &str,
) -> Option<&'a str> {
    let value = file.get(key)?;
    matches.try_contains_id(key).ok()?;
    match matches.value_source(key) {
        Some(ValueSource::CommandLine) | Some(ValueSource::EnvVariable) => None,
        _ => Some(value.as_str()),
    }
}

/// Overwrites `slot` from the file when [`file_value`] allows it.
pub fn merge<T: std::str::FromStr>(
    slot: &mut T,
    file: &BTreeMap<String, String>,
    matches: &ArgMatches,
    key: &str,
) -> ConfigResult<()>
where
    T::Err: fmt::Display,
{
    if let Some(v) = file_value(file, matches, key) {
        *slot = v.parse().map_err(|e| err(format!("config key {key}: cannot parse {v:?}: {e}")))?;
    }
    Ok(())
}

pub fn merge_list(
    slot: &mut Vec<u64>,
    file: &BTreeMap<String, String>,
    matches: &ArgMatches,
    key: &str,
) -> ConfigResult<()> {
    if let Some(v) = file_value(file, matches, key) {
        *slot = parse_list(v).map_err(|e| err(format!("config key {key}: {e}")))?;
    }
    Ok(())
}

pub fn parse_list(v: &str) -> Result<Vec<u64>, String> {
    v.split(',')
        .map(|s| s.trim().parse::<u64>().map_err(|e| format!("cannot parse {s:?}: {e}")))
        .collect()
}
