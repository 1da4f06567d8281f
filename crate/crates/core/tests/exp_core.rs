use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use restrict_lab::exp_core::*;
use restrict_lab::spectral::dense_gram;
use restrict_lab::LabError;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// `e(r)` with `r` reduced mod 1 in exact arithmetic first, so the only
/// rounding left is one `sin`/`cos` of an argument in `[0, 2π)`.
fn e_exact(r: &BigRational) -> Complex64 {
    let frac = r - r.floor();
    e(frac.to_f64().unwrap())
}

#[test]
fn sum_against_exact_phase_reduction() {
    // a_n = 1 on |n| <= 8, k = 3, β = −1, x = 1/2: ψ = n/2 − n²/8 is rational.
    let a = CoefficientVector::constant(-8, 8).unwrap();
    let phase = PhaseSpec::standard(3).unwrap();
    let got = eval_sum(&a, &phase, &[0.5]).unwrap()[0];
    let mut oracle = Complex64::new(0.0, 0.0);
    for n in -8i64..=8 {
        let nn = BigInt::from(n);
        let psi = BigRational::new(nn.clone(), BigInt::from(2))
            - BigRational::new(&nn * &nn, BigInt::from(8));
        oracle += e_exact(&psi);
    }
    assert!((got - oracle).norm() < 1e-12, "{got} vs {oracle}");
}

#[test]
fn exact_reduction_helper_is_sane() {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    assert!((e_exact(&half) - c(-1.0)).norm() < 1e-15);
    assert!((e_exact(&-half.clone()) - c(-1.0)).norm() < 1e-15);
    assert!(BigRational::zero().abs().is_zero());
}

#[test]
fn trivial_sums() {
    let one = CoefficientVector::new(0, vec![c(1.0)]).unwrap();
    let phase = PhaseSpec::standard(3).unwrap();
    assert!((eval_sum(&one, &phase, &[0.37]).unwrap()[0] - c(1.0)).norm() < 1e-15);
    let pair = CoefficientVector::new(-1, vec![c(1.0), c(0.0), c(1.0)]).unwrap();
    assert!((eval_sum(&pair, &phase, &[0.0]).unwrap()[0] - c(2.0)).norm() < 1e-15);
    assert!(eval_sum(&one, &phase, &[]).unwrap().is_empty());
}

#[test]
fn nonfinite_inputs_are_rejected() {
    let phase = PhaseSpec::standard(3).unwrap();
    let a = CoefficientVector::constant(-2, 2).unwrap();
    assert!(matches!(eval_sum(&a, &phase, &[f64::NAN]), Err(LabError::InvalidInput(_))));
    assert!(CoefficientVector::new(0, vec![Complex64::new(f64::INFINITY, 0.0)]).is_err());
}

/// Neumaier summation, so the check sees the weights and not the rounding
/// of half a million additions.
fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        comp += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + comp
}

#[test]
fn grid_node_rules() {
    let phase = PhaseSpec::standard(3).unwrap();
    let flat = build_grid(&phase, 0, -1.0, 1.0, GridOptions::default()).unwrap();
    assert!(flat.len() >= 64);
    assert!((flat.weights().iter().sum::<f64>() - 2.0).abs() < 1e-12);
    let g = build_grid(&phase, 100, -1.0, 1.0, GridOptions::with_oversampling(8.0)).unwrap();
    assert!(g.len() >= 481_600, "{}", g.len());
    assert!(g.len() as f64 >= 8.0 * g.max_phase_variation());
    let total = compensated_sum(g.weights());
    assert!((total - 2.0).abs() < 1e-12, "{:e}", total - 2.0);
}

#[test]
fn grid_budget_is_a_resource_error() {
    let phase = PhaseSpec::standard(3).unwrap();
    let opts = GridOptions { node_budget: 1000, ..GridOptions::default() };
    match build_grid(&phase, 100, -1.0, 1.0, opts) {
        Err(LabError::Resource { required, budget, .. }) => {
            assert!(required >= 481_600);
            assert_eq!(budget, 1000);
        }
        other => panic!("expected a resource error, got {other:?}"),
    }
}

#[test]
fn refinement_changes_l2_norm_negligibly() {
    let phase = PhaseSpec::standard(3).unwrap();
    let a = CoefficientVector::random_unit(-32, 32, 11).unwrap();
    let coarse = build_grid(&phase, 32, -1.0, 1.0, GridOptions::with_oversampling(8.0)).unwrap();
    let fine = build_grid(&phase, 32, -1.0, 1.0, GridOptions::with_oversampling(16.0)).unwrap();
    let l1 = lp_norm(&a, &phase, 2.0, -1.0, 1.0, &coarse).unwrap().powi(2);
    let l2 = lp_norm(&a, &phase, 2.0, -1.0, 1.0, &fine).unwrap().powi(2);
    assert!(rel(l1, l2) <= 1e-8, "{l1} vs {l2}");
}

#[test]
fn single_character_norm() {
    let phase = PhaseSpec::standard(3).unwrap();
    let a = CoefficientVector::new(5, vec![c(3.0)]).unwrap();
    let g = build_grid(&phase, 5, -1.0, 1.0, GridOptions::default()).unwrap();
    let v = lp_norm(&a, &phase, 2.0, -1.0, 1.0, &g).unwrap();
    assert!((v - 3.0 * 2f64.sqrt()).abs() < 1e-10);
}

#[test]
fn l2_norm_squared_is_the_gram_form() {
    let phase = PhaseSpec::standard(3).unwrap();
    let a = CoefficientVector::random_unit(-16, 16, 5).unwrap();
    let opts = GridOptions::default();
    let g = build_grid(&phase, 16, -1.0, 1.0, opts).unwrap();
    let lhs = lp_norm(&a, &phase, 2.0, -1.0, 1.0, &g).unwrap().powi(2);
    let gram = dense_gram(16, &phase, -1.0, 1.0, opts).unwrap();
    let rhs = gram.quadratic_form(&a).unwrap();
    assert!(rhs.im.abs() < 1e-9 * rhs.re);
    assert!(rel(lhs, rhs.re) < 1e-8, "{lhs} vs {rhs}");
}

#[test]
fn l4_norm_refinement() {
    let phase = PhaseSpec::standard(3).unwrap();
    let a = CoefficientVector::constant(0, 4).unwrap();
    let g1 = build_grid(&phase, 4, -1.0, 1.0, GridOptions::with_oversampling(8.0)).unwrap();
    let g2 = build_grid(&phase, 4, -1.0, 1.0, GridOptions::with_oversampling(16.0)).unwrap();
    let v1 = lp_norm(&a, &phase, 4.0, -1.0, 1.0, &g1).unwrap();
    let v2 = lp_norm(&a, &phase, 4.0, -1.0, 1.0, &g2).unwrap();
    assert!(rel(v1, v2) < 1e-6);
}

#[test]
fn lp_norm_rejects_mismatched_grid_and_bad_p() {
    let phase = PhaseSpec::standard(3).unwrap();
    let a = CoefficientVector::constant(0, 4).unwrap();
    let g = build_grid(&phase, 4, 0.0, 1.0, GridOptions::default()).unwrap();
    assert!(lp_norm(&a, &phase, 2.0, -1.0, 1.0, &g).is_err());
    assert!(lp_norm(&a, &phase, 0.5, 0.0, 1.0, &g).is_err());
    assert!(lp_norm(&a, &phase, f64::INFINITY, 0.0, 1.0, &g).is_err());
}

#[test]
fn graded_grid_matches_uniform() {
    let phase = PhaseSpec::standard(3).unwrap();
    let a = CoefficientVector::random_unit(-48, 48, 2).unwrap();
    let u = build_grid(&phase, 48, -1.0, 1.0, GridOptions::default()).unwrap();
    let gr = build_grid(&phase, 48, -1.0, 1.0, GridOptions::with_oversampling(4.0).graded()).unwrap();
    assert!(gr.len() < u.len());
    let x = lp_norm(&a, &phase, 2.0, -1.0, 1.0, &u).unwrap();
    let y = lp_norm(&a, &phase, 2.0, -1.0, 1.0, &gr).unwrap();
    assert!(rel(x, y) < 1e-8, "{x} vs {y}");
}

#[test]
fn oscillatory_integral_trivial_cases() {
    let g = grid_for_variation(0.0, 1.0, 1.0, 8.0, DEFAULT_NODE_BUDGET).unwrap();
    let one = oscillatory_integral(&PhaseFunction::Zero, &Cutoff::None, 0.0, 1.0, &g).unwrap();
    assert!((one - c(1.0)).norm() < 1e-14);
    let lin = PhaseFunction::Linear { freq: 1.0 };
    let zero = oscillatory_integral(&lin, &Cutoff::None, 0.0, 1.0, &g).unwrap();
    assert!(zero.norm() < 1e-10);
}

#[test]
fn cutoff_outside_interval_is_rejected() {
    let g = grid_for_variation(0.0, 1.0, 1.0, 8.0, DEFAULT_NODE_BUDGET).unwrap();
    let cut = Cutoff::Plateau { center: 0.95, scale: 1.0, delta: 0.5 };
    assert!(oscillatory_integral(&PhaseFunction::Zero, &cut, 0.0, 1.0, &g).is_err());
}

#[test]
fn localized_integral_refinement() {
    // φ_{n,m} for n = 200, m = 100, k = 3, localized at x₀ = (n+m)^{−1/2}.
    let (n, m) = (200.0f64, 100.0f64);
    let f = PhaseFunction::Custom(Arc::new(move |x: f64| (n - m) * (x - (n + m) * x.powi(3) / 3.0)));
    let scale = (n + m).sqrt();
    let cut = Cutoff::Plateau { center: 1.0 / scale, scale, delta: 0.75 };
    let (lo, hi) = cut.support().unwrap();
    let var = 400.0 * (hi - lo);
    let g1 = grid_for_variation(lo, hi, var, 8.0, DEFAULT_NODE_BUDGET).unwrap();
    let g2 = grid_for_variation(lo, hi, var, 16.0, DEFAULT_NODE_BUDGET).unwrap();
    let v1 = oscillatory_integral(&f, &cut, lo, hi, &g1).unwrap();
    let v2 = oscillatory_integral(&f, &cut, lo, hi, &g2).unwrap();
    assert!((v1 - v2).norm() < 1e-8, "{v1} vs {v2}");
}

#[test]
fn plateau_shape() {
    assert_eq!(plateau(0.0, 0.3), 1.0);
    assert_eq!(plateau(0.15, 0.3), 1.0);
    assert_eq!(plateau(0.3, 0.3), 0.0);
    assert_eq!(plateau(-0.4, 0.3), 0.0);
    let mid = plateau(0.225, 0.3);
    assert!((mid - 0.5).abs() < 1e-12);
}

#[test]
fn conjugation_symmetry_odd_k() {
    // Real coefficients and odd k: ψ(−x, n) = −ψ(x, n), so S(−x) = conj S(x).
    let phase = PhaseSpec::standard(3).unwrap();
    let a = CoefficientVector::from_fn(-6, 6, |n| c(1.0 + 0.1 * n as f64)).unwrap();
    let xs = [0.1, 0.37, 0.8];
    let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
    let s = eval_sum(&a, &phase, &xs).unwrap();
    let t = eval_sum(&a, &phase, &neg).unwrap();
    for (u, v) in s.iter().zip(&t) {
        assert!((u.conj() - v).norm() < 1e-12);
    }
}

#[test]
fn general_phase_matches_monomial() {
    let mono = PhaseSpec::standard(3).unwrap();
    let general = PhaseSpec::general(3, Arc::new(Polynomial::new(vec![0.0, 0.0, 0.0, 1.0]))).unwrap();
    let a = CoefficientVector::random_unit(-10, 10, 4).unwrap();
    let xs = [-0.7, 0.2, 0.55];
    let u = eval_sum(&a, &mono, &xs).unwrap();
    let v = eval_sum(&a, &general, &xs).unwrap();
    for (p, q) in u.iter().zip(&v) {
        assert!((p - q).norm() < 1e-11);
    }
}

#[test]
fn phase_validation() {
    assert!(PhaseSpec::monomial(1, -1.0).is_err());
    assert!(PhaseSpec::monomial(3, 0.0).is_err());
    assert!(PhaseSpec::monomial(3, f64::NAN).is_err());
    let err = PhaseSpec::standard(1).unwrap_err().to_string();
    assert!(err.contains("k >= 2"), "{err}");
}

#[test]
fn cached_norm_matches_recomputation() {
    let a = CoefficientVector::random_unit(-40, 40, 9).unwrap();
    let direct = a.values().iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    assert!(rel(a.norm(), direct) < 1e-14);
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sums_are_linear(
        a in coeffs(9),
        b in coeffs(9),
        (ar, ai, br, bi) in (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
        x in -1.0f64..1.0,
        k in 2u32..6,
    ) {
        let phase = PhaseSpec::standard(k).unwrap();
        let va = CoefficientVector::new(-4, a.iter().map(|&(r, i)| Complex64::new(r, i)).collect()).unwrap();
        let vb = CoefficientVector::new(-4, b.iter().map(|&(r, i)| Complex64::new(r, i)).collect()).unwrap();
        let (alpha, beta) = (Complex64::new(ar, ai), Complex64::new(br, bi));
        let mix = va.combine(alpha, &vb, beta).unwrap();
        let lhs = eval_sum(&mix, &phase, &[x]).unwrap()[0];
        let rhs = alpha * eval_sum(&va, &phase, &[x]).unwrap()[0] + beta * eval_sum(&vb, &phase, &[x]).unwrap()[0];
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn l2_norm_is_bracketed(seed in 0u64..1000, n in 1i64..24, k in 2u32..5) {
        let phase = PhaseSpec::standard(k).unwrap();
        let a = CoefficientVector::random_unit(-n, n, seed).unwrap();
        let g = build_grid(&phase, n as u64, -1.0, 1.0, GridOptions::default()).unwrap();
        let v = lp_norm(&a, &phase, 2.0, -1.0, 1.0, &g).unwrap();
        prop_assert!(v <= (2.0 * (2 * n + 1) as f64).sqrt() * a.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn grid_weights_sum_to_length(lo in -2.0f64..0.0, len in 0.01f64..3.0, var in 0.0f64..500.0) {
        let g = grid_for_variation(lo, lo + len, var, 8.0, DEFAULT_NODE_BUDGET).unwrap();
        prop_assert!((g.weights().iter().sum::<f64>() - len).abs() <= 1e-12 * len.max(1.0));
        prop_assert!(g.len() as f64 >= 8.0 * var);
    }
}
