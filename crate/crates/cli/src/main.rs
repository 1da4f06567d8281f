//! `restrict-lab`: scans, constructions and property checks from the
//! command line. Records go to a CSV file, summaries to standard output.
//!
//! Exit codes: 0 success, 1 a check failed or the record file could not be
//! written, 2 invalid input, 3 an eigensolver did not converge.

mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use config::{merge, merge_list, ConfigError};
use restrict_lab::asymptotics::{
    correlation_crossover, critical_window_sum, fit_c_sta, kernel_bands, phase_profile_checks,
    profile_block_constant, row_sum_scaling, row_sum_target, run_suite, stationary_pairs,
    PhaseProfile, StationaryModel, Suite, KERNEL_BLOCK_CONSTANT,
};
use restrict_lab::exp_core::GridOptions;
use restrict_lab::lower_bounds::{cylinder_construction, moment_curve_construction, DEFAULT_C_SMALL};
use restrict_lab::scaling::{
    fit_exponent, persist, run_scan, to_json, ExperimentRecord, FitModel, Quantity, ScanSettings,
};
use restrict_lab::LabError;

/// Share of the active coefficients that `min |S|` must reach.
const CERTIFICATE_THRESHOLD: f64 = 0.8;
/// Pairs sampled when fitting the stationary constant.
const STATIONARY_SAMPLES: usize = 200;
/// Allowed distance of the row-sum exponent from its target.
const ROW_SUM_TOLERANCE: f64 = 0.06;
/// Allowed max/min of a profile ratio across scales.
const PROFILE_SPREAD: f64 = 8.0;
const PROFILE_FD_TOLERANCE: f64 = 1e-6;
const PROFILE_DEFECT_TOLERANCE: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "restrict-lab", version, about = "Numerical experiments on restriction constants of exponential sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Operator norm B_N of n·x − n²·x^k on (−1, 1), scanned over N.
    Opnorm(OpnormArgs),
    /// Single-block lower-bound construction, or constant coefficients.
    Lowerbound(LowerboundArgs),
    /// Two-dimensional cylinder construction (L² over a parallelogram).
    Cylinder(PlanarArgs),
    /// Moment-curve construction (L⁶ over a thin box).
    Moment(PlanarArgs),
    /// Coefficient kernels of the upper-bound argument.
    Kernels(KernelArgs),
    /// Randomized inequality suites.
    Tests(TestArgs),
}

/// Settings shared by every subcommand.
#[derive(Args, Clone)]
struct Common {
    /// Plain-text `key = value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Small constant of the constructions.
    #[arg(long, default_value_t = DEFAULT_C_SMALL)]
    c_small: f64,
    /// Block constant C_k of the coefficient kernels.
    #[arg(long, default_value_t = KERNEL_BLOCK_CONSTANT)]
    c_k: f64,
    /// Quadrature oversampling (nodes per unit of phase variation).
    #[arg(long, default_value_t = 4.0)]
    rho: f64,
    /// Eigensolver tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Eigensolver iteration cap.
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record file; CSV rows are appended.
    #[arg(long, default_value = "records.csv")]
    output: PathBuf,
    /// Write the records as JSON instead of appending CSV rows.
    #[arg(long)]
    json: bool,
    /// Leave the timestamp column empty, so reruns give identical files.
    #[arg(long)]
    no_timestamp: bool,
    /// Worker threads [env: RESTRICT_LAB_THREADS; default: all cores].
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Clone)]
struct FitArgs {
    /// Fit a growth exponent to the scan.
    #[arg(long)]
    fit: bool,
    #[arg(long, value_enum, default_value_t = Model::PowerLog)]
    model: Model,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Model {
    /// A·N^α.
    PurePower,
    /// A·N^α·log N.
    PowerLog,
    /// A·N^α·(log N)^L with L fitted.
    FreeLog,
}

impl Model {
    fn fit_model(self) -> FitModel {
        match self {
            Model::PurePower => FitModel::PurePower,
            Model::PowerLog => FitModel::power_log(),
            Model::FreeLog => FitModel::PowerLog { log_power: None },
        }
    }
}

#[derive(Args, Clone)]
struct OpnormArgs {
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Scales, comma-separated and strictly increasing.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
    n: Vec<u64>,
    #[command(flatten)]
    fit: FitArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LowerQuantity {
    /// Interference coefficients on a single block, with the certificate.
    Interference,
    /// a_n = 1 on [−N, N], near the origin and on the whole interval.
    Constant,
}

#[derive(Args, Clone)]
struct LowerboundArgs {
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long, value_delimiter = ',', default_value = "128,256,512,1024")]
    n: Vec<u64>,
    /// Exponent of the L^p norm.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, value_enum, default_value_t = LowerQuantity::Interference)]
    quantity: LowerQuantity,
    #[command(flatten)]
    fit: FitArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct PlanarArgs {
    #[arg(long, value_delimiter = ',', default_value = "256,512,1024,2048")]
    n: Vec<u64>,
    #[command(flatten)]
    fit: FitArgs,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Check {
    /// Normalized near and far sizes of the correlation kernel d.
    Bands,
    /// Growth exponent of max row sum of |d| across the scales.
    RowSum,
    /// Fit of the stationary constant and its residual.
    Stationary,
    /// Ratio bands and derivative identities of the phase profile.
    Profile,
    /// Weighted sum over the critical window of the phase profile.
    Window,
    All,
}

#[derive(Args, Clone)]
struct KernelArgs {
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Scales; `row-sum` needs three, and a single scale N is widened to N/4, N/2, N.
    #[arg(long, value_delimiter = ',', default_value = "512")]
    n: Vec<u64>,
    #[arg(long, value_enum, default_value_t = Check::All)]
    check: Check,
    /// Lower limit of the normalized near and far sizes.
    #[arg(long, default_value_t = 0.25)]
    band_lo: f64,
    /// Upper limit of the normalized near and far sizes.
    #[arg(long, default_value_t = 4.0)]
    band_hi: f64,
    /// Cap on max |true − model|·|n − m| of the stationary fit.
    #[arg(long, default_value_t = 0.35)]
    fit_cap: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SuiteChoice {
    RowSum,
    Squared,
    SummationByParts,
    Derivative,
    All,
}

#[derive(Args, Clone)]
struct TestArgs {
    #[arg(long, value_enum, default_value_t = SuiteChoice::All)]
    suite: SuiteChoice,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[command(flatten)]
    common: Common,
}

/// A failure that ends the command with an exit code.
#[derive(Debug)]
enum Failure {
    Config(ConfigError),
    Lab(LabError),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Lab(e) => e.exit_code() as u8,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "invalid input: {e}"),
            Failure::Lab(e) => write!(f, "{e}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<LabError> for Failure {
    fn from(e: LabError) -> Self {
        Failure::Lab(e)
    }
}

type Outcome = Result<u8, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Config(ConfigError(msg.into()))
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let cli = Cli::from_arg_matches(&matches).unwrap_or_else(|e| e.exit());
    let sub = matches.subcommand().map(|(_, m)| m).expect("a subcommand is required");
    match run(cli.command, sub) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn run(command: Command, sub: &ArgMatches) -> Outcome {
    match command {
        Command::Opnorm(mut a) => {
            let file = load_common(&mut a.common, sub)?;
            merge(&mut a.k, &file, sub, "k")?;
            merge_list(&mut a.n, &file, sub, "n")?;
            merge_fit(&mut a.fit, &file, sub)?;
            cmd_opnorm(a)
        }
        Command::Lowerbound(mut a) => {
            let file = load_common(&mut a.common, sub)?;
            merge(&mut a.k, &file, sub, "k")?;
            merge_list(&mut a.n, &file, sub, "n")?;
            merge(&mut a.p, &file, sub, "p")?;
            merge_enum(&mut a.quantity, &file, sub, "quantity")?;
            merge_fit(&mut a.fit, &file, sub)?;
            cmd_lowerbound(a)
        }
        Command::Cylinder(a) => planar(a, sub, true),
        Command::Moment(a) => planar(a, sub, false),
        Command::Kernels(mut a) => {
            let file = load_common(&mut a.common, sub)?;
            merge(&mut a.k, &file, sub, "k")?;
            merge_list(&mut a.n, &file, sub, "n")?;
            merge_enum(&mut a.check, &file, sub, "check")?;
            merge(&mut a.band_lo, &file, sub, "band_lo")?;
            merge(&mut a.band_hi, &file, sub, "band_hi")?;
            merge(&mut a.fit_cap, &file, sub, "fit_cap")?;
            cmd_kernels(a)
        }
        Command::Tests(mut a) => {
            let file = load_common(&mut a.common, sub)?;
            merge_enum(&mut a.suite, &file, sub, "suite")?;
            merge(&mut a.trials, &file, sub, "trials")?;
            cmd_tests(a)
        }
    }
}

fn planar(mut a: PlanarArgs, sub: &ArgMatches, cylinder: bool) -> Outcome {
    let file = load_common(&mut a.common, sub)?;
    merge_list(&mut a.n, &file, sub, "n")?;
    merge_fit(&mut a.fit, &file, sub)?;
    cmd_planar(a, cylinder)
}

fn merge_enum<T: ValueEnum>(
    slot: &mut T,
    file: &BTreeMap<String, String>,
    sub: &ArgMatches,
    key: &str,
) -> Result<(), ConfigError> {
    if let Some(v) = config::file_value(file, sub, key) {
        *slot = T::from_str(v, true).map_err(|e| ConfigError(format!("config key {key}: {e}")))?;
    }
    Ok(())
}

fn merge_fit(fit: &mut FitArgs, file: &BTreeMap<String, String>, sub: &ArgMatches) -> Result<(), ConfigError> {
    merge(&mut fit.fit, file, sub, "fit")?;
    merge_enum(&mut fit.model, file, sub, "model")
}

/// Reads the config file, merges the shared keys, validates them and sets
/// up the thread pool.
fn load_common(c: &mut Common, sub: &ArgMatches) -> Result<BTreeMap<String, String>, Failure> {
    let file = match &c.config {
        Some(path) => config::read_file(path)?,
        None => BTreeMap::new(),
    };
    merge(&mut c.c_small, &file, sub, "c_small")?;
    merge(&mut c.c_k, &file, sub, "c_k")?;
    merge(&mut c.rho, &file, sub, "rho")?;
    merge(&mut c.tol, &file, sub, "tol")?;
    merge(&mut c.max_iter, &file, sub, "max_iter")?;
    merge(&mut c.seed, &file, sub, "seed")?;
    merge(&mut c.output, &file, sub, "output")?;
    if c.threads.is_none() {
        if let Some(t) = file.get("threads") {
            c.threads = Some(t.parse().map_err(|e| invalid(format!("config key threads: {e}")))?);
        }
    }
    if c.threads.is_none() {
        if let Ok(t) = std::env::var("RESTRICT_LAB_THREADS") {
            c.threads = Some(t.trim().parse().map_err(|e| invalid(format!("RESTRICT_LAB_THREADS: {e}")))?);
        }
    }
    validate_common(c)?;
    if let Some(t) = c.threads {
        // Only fails if a pool already exists, which is harmless here.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    Ok(file)
}

fn validate_common(c: &Common) -> Result<(), Failure> {
    let open_unit = |v: f64| v > 0.0 && v < 1.0;
    if !open_unit(c.c_small) {
        return Err(invalid(format!("c_small must lie in (0, 1), got {}", c.c_small)));
    }
    if !open_unit(c.c_k) {
        return Err(invalid(format!("c_k must lie in (0, 1), got {}", c.c_k)));
    }
    if !(c.rho >= 1.0 && c.rho.is_finite()) {
        return Err(invalid(format!("rho must be >= 1, got {}", c.rho)));
    }
    if !open_unit(c.tol) {
        return Err(invalid(format!("tol must lie in (0, 1), got {}", c.tol)));
    }
    if c.max_iter == 0 {
        return Err(invalid("max_iter must be positive"));
    }
    if c.threads == Some(0) {
        return Err(invalid("threads must be positive"));
    }
    Ok(())
}

fn validate_scales(n: &[u64], min: u64) -> Result<(), Failure> {
    if n.is_empty() {
        return Err(invalid("the scale list n is empty"));
    }
    if let Some(&bad) = n.iter().find(|&&v| v < min) {
        return Err(invalid(format!("every N must be >= {min}, got {bad}")));
    }
    if n.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("the scale list n must be strictly increasing"));
    }
    Ok(())
}

fn validate_fit(fit: &FitArgs, n: &[u64]) -> Result<(), Failure> {
    let need = match fit.model {
        Model::PurePower => 3,
        _ => 4,
    };
    if fit.fit && n.len() < need {
        return Err(invalid(format!("--fit with {:?} needs at least {need} scales, got {}", fit.model, n.len())));
    }
    Ok(())
}

fn settings(c: &Common) -> ScanSettings {
    ScanSettings {
        c_small: c.c_small,
        c_k: c.c_k,
        rho: c.rho,
        tol: c.tol,
        max_iter: c.max_iter,
        seed: c.seed,
        stamped: !c.no_timestamp,
    }
}

/// Writes the records, then maps any error record to its exit code.
fn finish(records: &[ExperimentRecord], c: &Common) -> Outcome {
    if c.json {
        let text = to_json(records)?;
        std::fs::write(&c.output, text + "\n")
            .map_err(|source| LabError::Io { path: c.output.clone(), source })?;
    } else {
        persist(records, &c.output)?;
    }
    println!("{} record(s) written to {}", records.len(), c.output.display());
    let code = records.iter().find(|r| r.is_error()).map_or(0, |r| r.value as u8);
    Ok(code)
}

fn print_record(r: &ExperimentRecord) {
    if r.is_error() {
        println!("{:<28} N = {:<6} failed (exit code {})", r.quantity, r.n, r.value);
    } else {
        println!("{:<28} N = {:<6} {:.9}", r.quantity, r.n, r.value);
    }
}

fn report_fit(records: &[ExperimentRecord], fit: &FitArgs, target: f64) -> Result<(), Failure> {
    if !fit.fit {
        return Ok(());
    }
    let r = fit_exponent(records, fit.model.fit_model())?;
    let log = r.log_power.map_or(String::new(), |l| format!(" log power {l:.4}"));
    println!(
        "fit {:?}: alpha = {:.6}  target = {:.6}  amplitude = {:.6}{log}  residual = {:.3e}",
        fit.model, r.exponent, target, r.amplitude, r.residual
    );
    Ok(())
}

fn cmd_opnorm(a: OpnormArgs) -> Outcome {
    if a.k < 2 {
        return Err(invalid(format!("k must satisfy k >= 2, got {}", a.k)));
    }
    validate_scales(&a.n, 1)?;
    validate_fit(&a.fit, &a.n)?;
    let records = run_scan(Quantity::OpNorm { k: a.k }, &a.n, &settings(&a.common))?;
    records.iter().for_each(print_record);
    let kf = a.k as f64;
    let code = finish(&records, &a.common)?;
    report_fit(&records, &a.fit, (kf - 2.0) / (6.0 * (kf - 1.0)))?;
    Ok(code)
}

fn cmd_lowerbound(a: LowerboundArgs) -> Outcome {
    if a.k < 3 {
        return Err(invalid(format!("k must satisfy k >= 3, got {}", a.k)));
    }
    if !(a.p >= 1.0 && a.p.is_finite()) {
        return Err(invalid(format!("p must satisfy p >= 1, got {}", a.p)));
    }
    validate_scales(&a.n, 4)?;
    validate_fit(&a.fit, &a.n)?;
    let s = settings(&a.common);
    let (k, p) = (a.k, a.p);
    let kf = k as f64;
    match a.quantity {
        LowerQuantity::Interference => {
            let ratio = run_scan(Quantity::LowerBound { k, p }, &a.n, &s)?;
            let cert = run_scan(Quantity::Certificate { k }, &a.n, &s)?;
            for (r, c) in ratio.iter().zip(&cert) {
                print_record(r);
                if !c.is_error() {
                    let verdict = if c.value >= CERTIFICATE_THRESHOLD { "pass" } else { "FAIL" };
                    println!(
                        "  certificate: min|S| / active = {:.4} (needs >= {CERTIFICATE_THRESHOLD}) {verdict}",
                        c.value
                    );
                }
            }
            let all: Vec<_> = ratio.iter().chain(&cert).cloned().collect();
            let code = finish(&all, &a.common)?;
            report_fit(&ratio, &a.fit, (kf - 2.0) / (6.0 * (kf - 1.0)))?;
            Ok(code)
        }
        LowerQuantity::Constant => {
            let near = run_scan(Quantity::ConstantNearOrigin { k, p }, &a.n, &s)?;
            let full = run_scan(Quantity::ConstantFull { k, p }, &a.n, &s)?;
            near.iter().zip(&full).for_each(|(x, y)| {
                print_record(x);
                print_record(y);
            });
            let all: Vec<_> = near.iter().chain(&full).cloned().collect();
            let code = finish(&all, &a.common)?;
            report_fit(&near, &a.fit, 0.5 - 1.0 / p)?;
            Ok(code)
        }
    }
}

fn cmd_planar(a: PlanarArgs, cylinder: bool) -> Outcome {
    validate_scales(&a.n, 64)?;
    validate_fit(&a.fit, &a.n)?;
    let c = &a.common;
    let s = settings(c);
    let fp = s.fingerprint();
    let (quantity, p, target) = if cylinder {
        (Quantity::Cylinder, 2.0, 1.0 / 12.0)
    } else {
        (Quantity::Moment, 6.0, 1.0 / 36.0)
    };
    let tag = quantity.tag();
    let eff_tag = if cylinder { "cylinder_efficiency" } else { "moment_efficiency" };
    let mut ratios = Vec::new();
    let mut effs = Vec::new();
    for &n in &a.n {
        let built = if cylinder {
            cylinder_construction(n, c.c_small, CERTIFICATE_THRESHOLD).map(|(_, b)| b)
        } else {
            moment_curve_construction(n, c.c_small, CERTIFICATE_THRESHOLD).map(|(_, b)| b)
        };
        let pair = built.and_then(|b| {
            Ok((
                ExperimentRecord::new(tag, n, 3, Some(p), b.ratio, fp, s.stamped)?,
                ExperimentRecord::new(eff_tag, n, 3, None, b.certificate.efficiency(), fp, s.stamped)?,
                b.certificate.passed,
            ))
        });
        match pair {
            Ok((r, e, passed)) => {
                print_record(&r);
                let verdict = if passed { "pass" } else { "FAIL" };
                println!(
                    "  certificate: min|S| / active = {:.4} (needs >= {CERTIFICATE_THRESHOLD}) {verdict}",
                    e.value
                );
                ratios.push(r);
                effs.push(e);
            }
            Err(err) => {
                let r = ExperimentRecord::failure(tag, n, 3, Some(p), &err, fp, s.stamped);
                print_record(&r);
                ratios.push(r);
            }
        }
    }
    let all: Vec<_> = ratios.iter().chain(&effs).cloned().collect();
    let code = finish(&all, c)?;
    report_fit(&ratios, &a.fit, target)?;
    Ok(code)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_kernels(a: KernelArgs) -> Outcome {
    if a.k < 3 {
        return Err(invalid(format!("k must satisfy k >= 3, got {}", a.k)));
    }
    validate_scales(&a.n, 16)?;
    if !(a.band_lo > 0.0 && a.band_lo < a.band_hi) {
        return Err(invalid(format!("need 0 < band_lo < band_hi, got {} and {}", a.band_lo, a.band_hi)));
    }
    if !(a.fit_cap > 0.0) {
        return Err(invalid(format!("fit_cap must be positive, got {}", a.fit_cap)));
    }
    let c = &a.common;
    let s = settings(c);
    let fp = s.fingerprint();
    let k = a.k;
    let wants = |check: Check| a.check == Check::All || a.check == check;
    let grid = GridOptions::with_oversampling(c.rho);
    let mut records = Vec::new();
    let mut ok = true;
    let push = |records: &mut Vec<ExperimentRecord>, tag: &str, n: u64, v: f64| -> Result<(), Failure> {
        let r = ExperimentRecord::new(tag, n, k, None, v, fp, s.stamped)?;
        print_record(&r);
        records.push(r);
        Ok(())
    };

    // The stationary constant feeds the band and row-sum checks.
    let mut c_sta = None;
    if wants(Check::Stationary) || wants(Check::Bands) || wants(Check::RowSum) {
        for &n in &a.n {
            let probe = StationaryModel::new(k, n, Complex64::new(1.0, 0.0), c.c_k)?;
            let pairs = stationary_pairs(&probe, STATIONARY_SAMPLES, c.seed)?;
            let (model, fit) = fit_c_sta(n, k, c.c_k, &pairs, grid)?;
            if wants(Check::Stationary) {
                push(&mut records, "c_sta_re", n, fit.c_sta.re)?;
                push(&mut records, "c_sta_im", n, fit.c_sta.im)?;
                push(&mut records, "c_sta_residual", n, fit.residual)?;
                let pass = fit.residual <= a.fit_cap;
                println!("  stationary fit: residual·|n−m| = {:.4} (cap {}) {}", fit.residual, a.fit_cap, verdict(pass));
                ok &= pass;
            }
            c_sta.get_or_insert(model);
        }
    }

    if wants(Check::Bands) {
        let model = c_sta.expect("fitted above");
        for &n in &a.n {
            let b = kernel_bands(&model.at_scale(n)?)?;
            push(&mut records, "near_band", n, b.near)?;
            push(&mut records, "far_band", n, b.far)?;
            push(&mut records, "schur_witness", n, b.schur_witness)?;
            let inside = |v: f64| v >= a.band_lo && v <= a.band_hi;
            let pass = inside(b.near) && inside(b.far) && b.ttstar_defect <= 1e-9;
            println!("  bands within [{}, {}]: {}", a.band_lo, a.band_hi, verdict(pass));
            ok &= pass;
        }
    }

    if wants(Check::RowSum) {
        let model = c_sta.expect("fitted above");
        let scales = if a.n.len() >= 3 {
            a.n.clone()
        } else {
            let top = *a.n.last().expect("nonempty");
            vec![top / 4, top / 2, top]
        };
        let (rows, fit) = row_sum_scaling(&model, &scales)?;
        for (n, v) in rows {
            push(&mut records, "row_sum", n, v)?;
        }
        let target = row_sum_target(k);
        let pass = (fit.exponent - target).abs() <= ROW_SUM_TOLERANCE;
        println!(
            "  row-sum exponent {:.4} vs target {:.4} (± {ROW_SUM_TOLERANCE}) {}",
            fit.exponent,
            target,
            verdict(pass)
        );
        ok &= pass;
    }

    if wants(Check::Profile) {
        let ck = profile_block_constant(k);
        let (mut r1, mut r2) = ((f64::INFINITY, 0.0f64), (f64::INFINITY, 0.0f64));
        for &n in &a.n {
            let lo = (ck * n as f64).ceil() as i64;
            if n as i64 - lo < 1 {
                return Err(invalid(format!("N = {n} leaves no pair in the profile block")));
            }
            let profile = PhaseProfile::new(lo, n as i64, k, n, ck)?;
            let rep = phase_profile_checks(&profile);
            push(&mut records, "profile_r1_min", n, rep.r1_min)?;
            push(&mut records, "profile_r1_max", n, rep.r1_max)?;
            push(&mut records, "profile_r2_min", n, rep.r2_min)?;
            push(&mut records, "profile_r2_max", n, rep.r2_max)?;
            let fd = rep.first_fd_error.max(rep.second_fd_error);
            push(&mut records, "profile_fd_error", n, fd)?;
            let pass = fd <= PROFILE_FD_TOLERANCE && rep.endpoint_defect <= PROFILE_DEFECT_TOLERANCE;
            println!("  derivatives and endpoints: {}", verdict(pass));
            ok &= pass;
            r1 = (r1.0.min(rep.r1_min), r1.1.max(rep.r1_max));
            r2 = (r2.0.min(rep.r2_min), r2.1.max(rep.r2_max));
        }
        let pass = r1.1 / r1.0 <= PROFILE_SPREAD && r2.1 / r2.0 <= PROFILE_SPREAD;
        println!(
            "  profile bands: r1 max/min = {:.3}, r2 max/min = {:.3} (<= {PROFILE_SPREAD}) {}",
            r1.1 / r1.0,
            r2.1 / r2.0,
            verdict(pass)
        );
        ok &= pass;
    }

    if wants(Check::Window) {
        for &n in &a.n {
            let gap = correlation_crossover(n, k).round() as i64;
            let lo = (c.c_k * n as f64).ceil() as i64;
            let start = lo.max(n as i64 / 2 + 1);
            if start + gap > n as i64 {
                return Err(invalid(format!("N = {n} is too small for the window check")));
            }
            let profile = PhaseProfile::new(start, start + gap, k, n, c.c_k)?;
            let eff = critical_window_sum(&profile)?.efficiency();
            push(&mut records, "window_efficiency", n, eff)?;
            let pass = eff >= 0.9;
            println!("  critical window |sum| / mass = {eff:.6} {}", verdict(pass));
            ok &= pass;
        }
    }

    let code = finish(&records, c)?;
    Ok(if code == 0 && !ok { 1 } else { code })
}

fn cmd_tests(a: TestArgs) -> Outcome {
    if a.trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let c = &a.common;
    let s = settings(c);
    let fp = s.fingerprint();
    let suites: Vec<Suite> = match a.suite {
        SuiteChoice::RowSum => vec![Suite::RowSum],
        SuiteChoice::Squared => vec![Suite::Squared],
        SuiteChoice::SummationByParts => vec![Suite::SummationByParts],
        SuiteChoice::Derivative => vec![Suite::Derivative],
        SuiteChoice::All => Suite::ALL.to_vec(),
    };
    let mut records = Vec::new();
    let mut ok = true;
    for suite in suites {
        let rep = run_suite(suite, a.trials, c.seed)?;
        println!(
            "{:<20} trials = {:<6} violations = {:<4} worst ratio = {:.6} {}",
            suite.name(),
            rep.trials,
            rep.violations,
            rep.worst_ratio,
            verdict(rep.passed())
        );
        let tag = format!("suite_{}_violations", suite.name());
        records.push(ExperimentRecord::new(tag, a.trials as u64, 0, None, rep.violations as f64, fp, s.stamped)?);
        ok &= rep.passed();
    }
    let code = finish(&records, c)?;
    Ok(if code == 0 && !ok { 1 } else { code })
}
