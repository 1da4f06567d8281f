use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use restrict_lab::asymptotics::{stationary_matrix, StationaryModel};
use restrict_lab::exp_core::*;
use restrict_lab::spectral::*;
use restrict_lab::LabError;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn cubic() -> PhaseSpec {
    PhaseSpec::standard(3).unwrap()
}

fn iterative(method: OpNormMethod, seed: u64) -> IterativeOptions {
    IterativeOptions { method, seed, tol: 1e-12, ..IterativeOptions::default() }
}

#[test]
fn gram_entry_basics() {
    let g = build_grid(&cubic(), 20, -1.0, 1.0, GridOptions::default()).unwrap();
    let diag = gram_entry(7, 7, &cubic(), -1.0, 1.0, &g).unwrap();
    assert!((diag - Complex64::new(2.0, 0.0)).norm() < 1e-13);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let (n, m) = (rng.gen_range(-20..=20), rng.gen_range(-20..=20));
        let a = gram_entry(n, m, &cubic(), -1.0, 1.0, &g).unwrap();
        let b = gram_entry(m, n, &cubic(), -1.0, 1.0, &g).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
    }
}

#[test]
fn gram_entry_refinement() {
    let g1 = build_grid(&cubic(), 1, -1.0, 1.0, GridOptions::with_oversampling(8.0)).unwrap();
    let g2 = build_grid(&cubic(), 1, -1.0, 1.0, GridOptions::with_oversampling(16.0)).unwrap();
    let a = gram_entry(1, 0, &cubic(), -1.0, 1.0, &g1).unwrap();
    let b = gram_entry(1, 0, &cubic(), -1.0, 1.0, &g2).unwrap();
    assert!((a - b).norm() < 1e-10);
    // ∫ e(x − x³) over a symmetric interval is real.
    assert!(a.im.abs() < 1e-14);
}

#[test]
fn dense_gram_shapes() {
    let g0 = dense_gram(0, &cubic(), -1.0, 1.0, GridOptions::default()).unwrap();
    assert_eq!(g0.dim(), 1);
    assert!((g0.at(0, 0) - Complex64::new(2.0, 0.0)).norm() < 1e-14);
    let g = dense_gram(12, &cubic(), -1.0, 1.0, GridOptions::default()).unwrap();
    assert!(g.is_hermitian(1e-12));
    assert_eq!(g.tag(), KernelTag::Gram);
}

#[test]
fn dense_cap_is_a_resource_error() {
    // 2·256 + 1 = 513 indices is one over the cap.
    match dense_gram(256, &cubic(), -1.0, 1.0, GridOptions::default()) {
        Err(LabError::Resource { required: 513, budget, .. }) => assert_eq!(budget, DENSE_CAP),
        other => panic!("expected a resource error, got {other:?}"),
    }
}

#[test]
fn dense_quadratic_form_is_the_l2_norm() {
    let a = CoefficientVector::random_unit(-16, 16, 21).unwrap();
    let opts = GridOptions::default();
    let g = dense_gram(16, &cubic(), -1.0, 1.0, opts).unwrap();
    let grid = build_grid(&cubic(), 16, -1.0, 1.0, opts).unwrap();
    let l2 = lp_norm(&a, &cubic(), 2.0, -1.0, 1.0, &grid).unwrap();
    assert!(rel(g.quadratic_form(&a).unwrap().re, l2 * l2) < 1e-8);
}

#[test]
fn opnorm_dense_small_cases() {
    let one = KernelMatrix::new(0, 1, vec![Complex64::new(2.0, 0.0)], KernelTag::Gram).unwrap();
    assert!((opnorm_dense(&one).unwrap().value - 2f64.sqrt()).abs() < 1e-15);
    let diag = KernelMatrix::from_fn(0, 6, KernelTag::Gram, |n, m| {
        Complex64::new(if n == m { 2.0 } else { 0.0 }, 0.0)
    })
    .unwrap();
    assert!((opnorm_dense(&diag).unwrap().value - 2f64.sqrt()).abs() < 1e-14);
    let skew = KernelMatrix::new(0, 2, vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)], KernelTag::Generic).unwrap();
    assert!(matches!(opnorm_dense(&skew), Err(LabError::InvalidInput(_))));
}

#[test]
fn dense_spectrum_is_psd() {
    let g = dense_gram(20, &cubic(), -1.0, 1.0, GridOptions::default()).unwrap();
    let ev = jacobi_eigenvalues(&g).unwrap();
    assert!(ev.iter().all(|&v| v >= -1e-10));
    let trace: f64 = (0..g.dim()).map(|i| g.at(i, i).re).sum();
    assert!(rel(ev.iter().sum::<f64>(), trace) < 1e-12);
}

#[test]
fn iterative_trivial_scale() {
    let r = opnorm_iterative(0, &cubic(), -1.0, 1.0, &IterativeOptions::default()).unwrap();
    assert!((r.value - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn dense_and_iterative_agree() {
    for k in [3, 4] {
        let phase = PhaseSpec::standard(k).unwrap();
        let dense = opnorm_dense(&dense_gram(48, &phase, -1.0, 1.0, GridOptions::default()).unwrap()).unwrap();
        for method in [OpNormMethod::Lanczos, OpNormMethod::PowerIteration] {
            let it = opnorm_iterative(48, &phase, -1.0, 1.0, &iterative(method, 0)).unwrap();
            assert!(rel(it.value, dense.value) < 1e-8, "k={k} {method}: {} vs {}", it.value, dense.value);
        }
    }
}

#[test]
fn iterative_is_seed_invariant() {
    let a = opnorm_iterative(48, &cubic(), -1.0, 1.0, &iterative(OpNormMethod::Lanczos, 1)).unwrap();
    let b = opnorm_iterative(48, &cubic(), -1.0, 1.0, &iterative(OpNormMethod::Lanczos, 99)).unwrap();
    assert!(rel(a.value, b.value) < 1e-8);
}

#[test]
fn symmetry_reduction_is_exact_enough() {
    for k in [3, 4] {
        let phase = PhaseSpec::standard(k).unwrap();
        let full = IterativeOptions { use_symmetry: false, ..iterative(OpNormMethod::Lanczos, 0) };
        let a = opnorm_iterative(40, &phase, -1.0, 1.0, &full).unwrap();
        let b = opnorm_iterative(40, &phase, -1.0, 1.0, &iterative(OpNormMethod::Lanczos, 0)).unwrap();
        assert!(rel(a.value, b.value) < 1e-9, "k={k}");
    }
}

#[test]
fn convergence_failure_carries_residual() {
    let opts = IterativeOptions { max_iter: 2, tol: 1e-14, method: OpNormMethod::PowerIteration, ..Default::default() };
    match opnorm_iterative(40, &cubic(), -1.0, 1.0, &opts) {
        Err(LabError::Convergence { residual, .. }) => assert!(residual > 0.0),
        other => panic!("expected a convergence error, got {other:?}"),
    }
}

#[test]
fn opnorm_is_bracketed_and_under_the_kernel_bounds() {
    for n in [4i64, 12, 24] {
        let g = dense_gram(n, &cubic(), -1.0, 1.0, GridOptions::default()).unwrap();
        let b = opnorm_dense(&g).unwrap().value;
        assert!(b >= 2f64.sqrt() * (1.0 - 1e-12));
        assert!(b <= (2.0 * (2 * n + 1) as f64).sqrt());
        // B² is the top eigenvalue of G.
        assert!(b * b <= schur_bound(&g) + 1e-8);
        assert!(b * b <= ttstar_bound(&g).unwrap() + 1e-8);
    }
}

#[test]
fn opnorm_grows_with_the_index_range() {
    let opts = iterative(OpNormMethod::Lanczos, 0);
    let a = opnorm_iterative(32, &cubic(), -1.0, 1.0, &opts).unwrap().value;
    let b = opnorm_iterative(40, &cubic(), -1.0, 1.0, &opts).unwrap().value;
    assert!(b >= a * (1.0 - 1e-10));
}

#[test]
fn frozen_operator_norms() {
    // [DERIVED] frozen from a calibration run (Lanczos, graded grid ρ = 4, tol 1e-9).
    let opts = IterativeOptions { grid: GridOptions::with_oversampling(4.0).graded(), ..Default::default() };
    let b64 = opnorm_iterative(64, &cubic(), -1.0, 1.0, &opts).unwrap().value;
    assert!(rel(b64, 2.414949985229714) < 1e-8, "{b64}");
}

#[test]
fn schur_and_ttstar_trivial_cases() {
    let z = KernelMatrix::zeros(0, 5);
    let id = KernelMatrix::identity(-2, 5);
    assert_eq!(schur_bound(&z), 0.0);
    assert_eq!(schur_bound(&id), 2.0);
    assert_eq!(ttstar_bound(&z).unwrap(), 0.0);
    assert_eq!(ttstar_bound(&id).unwrap(), 1.0);
    let upper = KernelMatrix::from_fn(0, 2, KernelTag::Generic, |n, m| {
        Complex64::new(if m > n { 1.0 } else { 0.0 }, 0.0)
    })
    .unwrap();
    assert!(matches!(ttstar_bound(&upper), Err(LabError::InvalidInput(_))));
}

#[test]
fn schur_dominates_random_quadratic_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut draw = || Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
    let entries: Vec<Complex64> = (0..64).map(|_| draw()).collect();
    let c = KernelMatrix::hermitian_from_fn(0, 8, KernelTag::Generic, |n, m| entries[(n * 8 + m) as usize]).unwrap();
    let bound = schur_bound(&c);
    for seed in 0..100 {
        let a = CoefficientVector::random_unit(0, 7, seed).unwrap();
        let q = c.quadratic_form(&a).unwrap().norm() / a.norm().powi(2);
        assert!(q <= bound);
    }
}

#[test]
fn ttstar_band_of_the_stationary_kernel() {
    // [DERIVED] band measured over N ∈ {128, 256, 512} with |C_sta| = 1/√2:
    // the normalized bound sits near 0.5–0.8.
    let c = Complex64::new(0.5, 0.5);
    let mut values = Vec::new();
    for n in [128u64, 256, 512] {
        let model = StationaryModel::new(3, n, c, 0.5).unwrap();
        let m = stationary_matrix(&model).unwrap();
        values.push(ttstar_bound(&m).unwrap() / (n as f64).powf(1.0 / 6.0));
    }
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(lo > 0.25 && hi < 2.0, "{values:?}");
    assert!(hi / lo < 2.0, "{values:?}");
}

fn hermitian(dim: usize, seed: u64) -> KernelMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<Complex64> =
        (0..dim * dim).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    KernelMatrix::hermitian_from_fn(0, dim, KernelTag::Generic, |n, m| entries[n as usize * dim + m as usize]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bounds_dominate_the_form(dim in 1usize..10, seed in 0u64..10_000, aseed in 0u64..10_000) {
        let c = hermitian(dim, seed);
        let a = CoefficientVector::random_unit(0, dim as i64 - 1, aseed).unwrap();
        let q = c.quadratic_form(&a).unwrap().norm() / a.norm().powi(2);
        prop_assert!(q <= schur_bound(&c) * (1.0 + 1e-12) + 1e-12);
        prop_assert!(q <= ttstar_bound(&c).unwrap() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn jacobi_matches_lanczos_on_psd(dim in 2usize..12, seed in 0u64..10_000) {
        // C² is PSD with top eigenvalue ‖C‖².
        let c = hermitian(dim, seed);
        let sq = c.square();
        let dense = opnorm_dense(&sq).unwrap().value;
        let ev = jacobi_eigenvalues(&c).unwrap();
        let top = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!((dense - top).abs() <= 1e-10 * top.max(1.0));
    }
}
