use proptest::prelude::*;
use restrict_lab::scaling::*;
use restrict_lab::LabError;

fn fp() -> Fingerprint {
    ScanSettings::default().fingerprint()
}

fn record(quantity: &str, n: u64, value: f64) -> ExperimentRecord {
    ExperimentRecord::new(quantity, n, 3, Some(2.0), value, fp(), false).unwrap()
}

#[test]
fn pure_power_recovers_an_exact_law() {
    let pts: Vec<(u64, f64)> = [64u64, 128, 256, 512].iter().map(|&n| (n, 7.0 * (n as f64).powf(0.25))).collect();
    let fit = fit_points(&pts, FitModel::PurePower).unwrap();
    assert!((fit.exponent - 0.25).abs() < 1e-12);
    assert!((fit.amplitude - 7.0).abs() < 1e-10);
    assert!(fit.residual < 1e-12);
    assert_eq!(fit.model, FitKind::PurePower);
    assert_eq!(fit.log_power, None);
}

#[test]
fn power_log_recovers_a_twelfth_with_a_log() {
    let pts: Vec<(u64, f64)> =
        (6..=12).map(|j| 1u64 << j).map(|n| (n, (n as f64).powf(1.0 / 12.0) * (n as f64).ln())).collect();
    let fit = fit_points(&pts, FitModel::power_log()).unwrap();
    assert!((fit.exponent - 1.0 / 12.0).abs() < 0.005, "{fit:?}");
    assert_eq!(fit.log_power, Some(1.0));
    let free = fit_points(&pts, FitModel::PowerLog { log_power: None }).unwrap();
    assert!((free.exponent - 1.0 / 12.0).abs() < 1e-8 && (free.log_power.unwrap() - 1.0).abs() < 1e-7);
}

#[test]
fn fits_reject_thin_or_bad_data() {
    let two = [(64u64, 1.0), (128, 2.0)];
    assert!(matches!(fit_points(&two, FitModel::PurePower), Err(LabError::InvalidInput(_))));
    let three = [(64u64, 1.0), (128, 2.0), (256, 3.0)];
    assert!(fit_points(&three, FitModel::power_log()).is_err());
    assert!(fit_points(&[(64, 1.0), (128, -2.0), (256, 3.0)], FitModel::PurePower).is_err());
    assert!(fit_points(&[(64, 1.0), (64, 2.0), (64, 3.0)], FitModel::PurePower).is_err());
    assert!(fit_points(&[(1, 1.0), (2, 2.0), (4, 3.0), (8, 4.0)], FitModel::power_log()).is_err());
}

#[test]
fn exponent_fit_skips_error_records() {
    let mut rs: Vec<ExperimentRecord> = [64u64, 128, 256].iter().map(|&n| record("x", n, n as f64)).collect();
    rs.push(ExperimentRecord::failure("x", 512, 3, None, &LabError::InvalidInput("boom".into()), fp(), false));
    let fit = fit_exponent(&rs, FitModel::PurePower).unwrap();
    assert!((fit.exponent - 1.0).abs() < 1e-12);
}

#[test]
fn records_reject_non_finite_values() {
    assert!(ExperimentRecord::new("x", 1, 3, None, f64::NAN, fp(), false).is_err());
    let r = ExperimentRecord::new("x", 1, 3, None, 1.0, fp(), true).unwrap();
    assert!(r.timestamp.parse::<u64>().is_ok());
}

#[test]
fn failure_records_carry_the_exit_code() {
    let r = ExperimentRecord::failure("opnorm", 64, 3, None, &LabError::InvalidInput("bad".into()), fp(), false);
    assert!(r.is_error());
    assert_eq!(r.quantity, format!("{ERROR_PREFIX}opnorm"));
    assert_eq!(r.value, 2.0);
}

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let rs = vec![
        record("a", 64, 0.1 + 0.2),
        record("a", 128, std::f64::consts::PI),
        ExperimentRecord::new("b", 256, 4, None, 1.0 / 3.0, fp(), true).unwrap(),
    ];
    persist(&rs[..2], &path).unwrap();
    persist(&rs[2..], &path).unwrap();
    let back = load(&path).unwrap();
    assert_eq!(back, rs);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "quantity,N,k,p,value,c_small,C_k,rho,tol,seed,timestamp");
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn empty_file_loads_as_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.csv");
    std::fs::write(&path, "").unwrap();
    assert!(load(&path).unwrap().is_empty());
    assert!(matches!(load(&dir.path().join("missing.csv")), Err(LabError::Io { .. })));
}

#[test]
fn corrupted_row_names_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.csv");
    persist(&[record("a", 64, 1.0), record("a", 128, 2.0)], &path).unwrap();
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("a,notanumber,3,,1.0,0.1,0.5,4,1e-9,0,\n");
    std::fs::write(&path, text).unwrap();
    match load(&path) {
        Err(LabError::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn json_round_trip() {
    let rs = vec![record("a", 64, 0.1 + 0.2), record("b", 128, 1e-300)];
    let back = from_json(&to_json(&rs).unwrap()).unwrap();
    assert_eq!(back, rs);
    assert!(matches!(from_json("[{"), Err(LabError::Parse { .. })));
}

#[test]
fn scan_of_nothing_is_empty() {
    let s = ScanSettings::default();
    assert!(run_scan(Quantity::OpNorm { k: 3 }, &[], &s).unwrap().is_empty());
    assert!(run_scan(Quantity::OpNorm { k: 3 }, &[128, 64], &s).is_err());
}

#[test]
fn opnorm_scan_grows_and_is_deterministic() {
    let s = ScanSettings { stamped: false, ..Default::default() };
    let a = run_scan(Quantity::OpNorm { k: 3 }, &[16, 32], &s).unwrap();
    assert_eq!(a.len(), 2);
    assert!(a.iter().all(|r| !r.is_error() && r.quantity == "opnorm" && r.k == 3 && r.p.is_none()));
    assert!(a[1].value > a[0].value);
    assert!(a[0].value > 2f64.sqrt());
    assert_eq!(a, run_scan(Quantity::OpNorm { k: 3 }, &[16, 32], &s).unwrap());
}

#[test]
fn failed_points_become_error_records() {
    let s = ScanSettings { stamped: false, ..Default::default() };
    let rs = run_scan(Quantity::Cylinder, &[32, 64], &s).unwrap();
    assert!(rs[0].is_error() && rs[0].value == 2.0);
    assert!(!rs[1].is_error() && rs[1].p == Some(2.0));
}

#[test]
fn quantity_tags_and_metadata() {
    assert_eq!(Quantity::Moment.p(), Some(6.0));
    assert_eq!(Quantity::Moment.k(), 3);
    assert_eq!(Quantity::RowSum { k: 4 }.k(), 4);
    assert_eq!(Quantity::LowerBound { k: 3, p: 4.0 }.tag(), "lower_bound_ratio");
    assert_eq!(Quantity::ConstantFull { k: 3, p: 4.0 }.p(), Some(4.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fit_is_scale_equivariant(
        vals in prop::collection::vec(0.5f64..5.0, 4),
        scale in 0.01f64..100.0,
    ) {
        let pts: Vec<(u64, f64)> = vals.iter().enumerate().map(|(i, &v)| (64u64 << i, v)).collect();
        let scaled: Vec<(u64, f64)> = pts.iter().map(|&(n, v)| (n, v * scale)).collect();
        let a = fit_points(&pts, FitModel::PurePower).unwrap();
        let b = fit_points(&scaled, FitModel::PurePower).unwrap();
        prop_assert!((a.exponent - b.exponent).abs() < 1e-10);
        prop_assert!((b.amplitude / a.amplitude / scale - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fit_ignores_input_order(
        vals in prop::collection::vec(0.5f64..5.0, 5),
        rot in 0usize..5,
    ) {
        let pts: Vec<(u64, f64)> = vals.iter().enumerate().map(|(i, &v)| (32u64 << i, v)).collect();
        let mut shuffled = pts.clone();
        shuffled.rotate_left(rot);
        shuffled.reverse();
        for model in [FitModel::PurePower, FitModel::power_log()] {
            prop_assert_eq!(fit_points(&pts, model).unwrap(), fit_points(&shuffled, model).unwrap());
        }
    }

    #[test]
    fn csv_keeps_every_bit(v in -1e300f64..1e300, n in 1u64..1_000_000) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let r = ExperimentRecord::new("q", n, 3, None, v, fp(), false).unwrap();
        persist(std::slice::from_ref(&r), &path).unwrap();
        prop_assert_eq!(load(&path).unwrap(), vec![r]);
    }
}
