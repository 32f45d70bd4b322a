use kai_core::array::*;
use kai_core::estimators::*;
use kai_core::CoreError;
use kai_linalg::{
    cholesky_hermitian, complement_projector, projection_from_basis, CMatrix, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DOAS: [f64; 4] = [10.2, 12.6, 15.0, 17.4];

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn random_pd(rng: &mut ChaCha8Rng, m: usize) -> CMatrix {
    let g = random_matrix(rng, m, m + 3);
    let mut r = g.matmul(&g.adjoint()).unwrap().scale_real(1.0 / m as f64);
    for i in 0..m {
        r[(i, i)] += C64::new(0.1, 0.0);
    }
    r.hermitian_part()
}

fn noisy_observation(m: usize, doas: &[f64], snr: f64, n: usize, seed: TrialSeed) -> (ArrayGeometry, Observation) {
    let geom = ArrayGeometry::half_wavelength(m).unwrap();
    let sc = SourceScenario::uncorrelated(doas.to_vec(), snr, n).unwrap();
    let set = generate_snapshots(&geom, &sc, seed).unwrap();
    (geom, Observation::from_snapshots(&set))
}

#[test]
fn amplitudes_of_consistent_system() {
    let geom = ArrayGeometry::half_wavelength(8).unwrap();
    let a = manifold(&geom, &[-10.0, 20.0]).unwrap();
    let s0 = CMatrix::column_vector(&[C64::new(1.5, -0.5), C64::new(-0.25, 2.0)]);
    let x = a.matmul(&s0).unwrap();
    let s = estimate_amplitudes(&a, &x).unwrap();
    assert!((&s - &s0).max_abs() < 1e-12);
    let n = noise_component(&a, &x, &s).unwrap();
    assert!(n.max_abs() < 1e-12);
}

#[test]
fn amplitudes_of_orthogonal_snapshot() {
    let geom = ArrayGeometry::half_wavelength(8).unwrap();
    let a = manifold(&geom, &[5.0]).unwrap();
    let perp = complement_projector(&projection_from_basis(&a).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = perp.matmul(&random_matrix(&mut rng, 8, 1)).unwrap();
    let s = estimate_amplitudes(&a, &x).unwrap();
    assert!(s.max_abs() < 1e-12);
    let n = noise_component(&a, &x, &s).unwrap();
    assert!((&n - &x).max_abs() < 1e-12);
}

#[test]
fn rank_deficient_amplitudes_fail() {
    let geom = ArrayGeometry::half_wavelength(6).unwrap();
    let a = manifold(&geom, &[10.0]).unwrap();
    let doubled = CMatrix::from_columns(&[a.column(0), a.column(0)]).unwrap();
    let x = CMatrix::zeros(6, 1);
    assert!(estimate_amplitudes(&doubled, &x).is_err());
}

#[test]
fn perturbation_of_identity_vanishes() {
    let geom = ArrayGeometry::half_wavelength(7).unwrap();
    let a = manifold(&geom, &[-30.0, 0.0, 12.0]).unwrap();
    let v = perturbation_term(&a, &CMatrix::identity(7)).unwrap();
    assert!(v.max_abs() < 1e-14);
}

#[test]
fn perturbation_with_full_span_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let a = random_matrix(&mut rng, 5, 5);
    let r = random_pd(&mut rng, 5);
    assert!(perturbation_term(&a, &r).unwrap().max_abs() < 1e-10);
}

#[test]
fn modified_covariance_contract() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let r = random_pd(&mut rng, 6);
    let v = random_matrix(&mut rng, 6, 6);
    assert_eq!(modified_covariance(&r, &v, 0.0).unwrap(), r);
    assert_eq!(modified_covariance(&r, &CMatrix::zeros(6, 6), 1.0).unwrap(), r);
    assert_eq!(modified_covariance(&r, &v, 1.5), Err(CoreError::MuOutOfRange(1.5)));
    assert!(modified_covariance(&r, &v, -0.1).is_err());

    let out = modified_covariance(&r, &v, 0.5).unwrap();
    let oracle = CMatrix::from_fn(6, 6, |i, j| r[(i, j)] - 0.5 * (v[(i, j)] + v[(j, i)].conj()));
    assert!((&out - &oracle).max_abs() < 1e-14);
    assert!((&out - &out.adjoint()).frobenius_norm() <= 1e-12 * out.frobenius_norm());
}

#[test]
fn sml_pure_noise_projector() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = random_pd(&mut rng, 6);
    let u = sml_objective(&CMatrix::zeros(6, 6), &CMatrix::identity(6), &r, 6, 2).unwrap();
    let want = 6.0 * (r.trace().re / 4.0).ln();
    assert!((u - want).abs() < 1e-12);
}

#[test]
fn sml_isotropic_covariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let q = projection_from_basis(&random_matrix(&mut rng, 7, 3)).unwrap();
    let r = CMatrix::identity(7).scale_real(2.5);
    let u = sml_objective(&q, &complement_projector(&q), &r, 7, 3).unwrap();
    assert!((u - 7.0 * 2.5f64.ln()).abs() < 1e-10);
}

#[test]
fn sml_matches_composed_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let (m, p) = (8, 3);
        let r = random_pd(&mut rng, m);
        let q = projection_from_basis(&random_matrix(&mut rng, m, p)).unwrap();
        let qp = &CMatrix::identity(m) - &q;
        let level = (0..m)
            .map(|i| (0..m).map(|k| qp[(i, k)] * r[(k, i)]).sum::<C64>().re)
            .sum::<f64>()
            / (m - p) as f64;
        let arg = (&(&(&q * &r) * &q) + &qp.scale_real(level)).hermitian_part();
        let l = cholesky_hermitian(&arg).unwrap();
        let oracle: f64 = (0..m).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
        let u = sml_objective(&q, &qp, &r, m, p).unwrap();
        assert!((u - oracle).abs() < 1e-8, "{u} vs {oracle}");
    }
}

#[test]
fn zero_grid_reproduces_esprit_bitwise() {
    let cfg = KaiConfig {
        mu_grid: MuGrid::from_points(vec![0.0]).unwrap(),
        ..KaiConfig::default()
    };
    for trial in 0..5 {
        let (geom, obs) = noisy_observation(40, &DOAS, 0.0, 25, TrialSeed::new(21, trial));
        let plain = esprit(&obs, 4, &geom, SubspaceMethod::CovarianceEvd).unwrap();
        let kai = ms_kai_esprit(&obs, 4, &geom, &cfg).unwrap();
        assert_eq!(plain.angles, kai.angles);
    }
}

#[test]
fn unit_increment_at_zero_matches_esprit() {
    let cfg = KaiConfig::with_increment(1.0).unwrap();
    assert_eq!(cfg.mu_grid.points(), &[0.0, 1.0]);
    for trial in 0..10 {
        let (geom, obs) = noisy_observation(12, &[-20.0, 20.0], 10.0, 30, TrialSeed::new(22, trial));
        let kai = ms_kai_esprit(&obs, 2, &geom, &cfg).unwrap();
        let diag = kai.diagnostics.as_ref().unwrap();
        if diag.iterations.iter().all(|it| it.mu_opt == 0.0) {
            let plain = esprit(&obs, 2, &geom, SubspaceMethod::CovarianceEvd).unwrap();
            assert_eq!(plain.angles, kai.angles);
        }
    }
}

#[test]
fn iesprit_is_one_step_of_ms_kai() {
    let cfg = KaiConfig {
        iterations: Some(1),
        ..KaiConfig::default()
    };
    for trial in 0..3 {
        let (geom, obs) = noisy_observation(40, &DOAS, -2.0, 25, TrialSeed::new(23, trial));
        let one = ms_kai_esprit(&obs, 4, &geom, &cfg).unwrap();
        let ie = iesprit(&obs, 4, &geom, &KaiConfig::default()).unwrap();
        assert_eq!(one.angles, ie.angles);
        assert_eq!(ie.estimator, EstimatorKind::Iesprit);
        assert_eq!(ie.diagnostics.unwrap().iterations.len(), 1);
    }
}

#[test]
fn ts_without_knowledge_is_iesprit() {
    let cfg = KaiConfig::default();
    for trial in 0..3 {
        let (geom, obs) = noisy_observation(40, &DOAS, -4.0, 25, TrialSeed::new(24, trial));
        let ts = ts_esprit(&obs, 4, &geom, &cfg, &[]).unwrap();
        let ie = iesprit(&obs, 4, &geom, &cfg).unwrap();
        assert_eq!(ts.angles, ie.angles);
    }
}

#[test]
fn ts_with_all_known_directions_is_exact_when_noiseless() {
    let geom = ArrayGeometry::half_wavelength(40).unwrap();
    let sc = SourceScenario::uncorrelated(DOAS.to_vec(), f64::INFINITY, 25).unwrap();
    let obs = Observation::from_covariance(true_covariance(&geom, &sc).unwrap()).unwrap();
    let ts = ts_esprit(&obs, 4, &geom, &KaiConfig::default(), &DOAS).unwrap();
    for (g, w) in ts.angles.iter().zip(DOAS) {
        assert!((g - w).abs() < 1e-6);
    }
}

#[test]
fn ts_rejects_bad_knowledge() {
    let (geom, obs) = noisy_observation(8, &[0.0], 10.0, 20, TrialSeed::new(25, 0));
    assert!(ts_esprit(&obs, 1, &geom, &KaiConfig::default(), &[1.0, 2.0]).is_err());
    assert!(ts_esprit(&obs, 1, &geom, &KaiConfig::default(), &[91.0]).is_err());
}

#[test]
fn ms_kai_iteration_bounds() {
    let (geom, obs) = noisy_observation(8, &[-10.0, 10.0], 10.0, 20, TrialSeed::new(26, 0));
    for bad in [0, 3] {
        let cfg = KaiConfig {
            iterations: Some(bad),
            ..KaiConfig::default()
        };
        assert!(ms_kai_esprit(&obs, 2, &geom, &cfg).is_err());
    }
    let est = ms_kai_esprit(&obs, 2, &geom, &KaiConfig::default()).unwrap();
    let diag = est.diagnostics.unwrap();
    assert_eq!(diag.iterations.len(), 2);
    assert_eq!(diag.iterations[1].objective.len(), 21);
    assert_eq!(diag.iterations.last().unwrap().angles, est.angles);
}

#[test]
fn root_music_roots_pair_up() {
    for trial in 0..10 {
        let (geom, obs) = noisy_observation(8, &[-12.0, 25.0], 5.0, 30, TrialSeed::new(27, trial));
        let est = root_music(obs.covariance(), 2, &geom).unwrap();
        assert!(est.warnings.is_empty(), "{:?}", est.warnings);
    }
}

#[test]
fn root_music_single_source() {
    let geom = ArrayGeometry::half_wavelength(8).unwrap();
    let sc = SourceScenario::uncorrelated(vec![20.0], f64::INFINITY, 1).unwrap();
    let r = true_covariance(&geom, &sc).unwrap();
    let est = root_music(&r, 1, &geom).unwrap();
    assert!((est.angles[0] - 20.0).abs() < 1e-6);
}

#[test]
fn music_coarse_grid_then_refinement() {
    let geom = ArrayGeometry::half_wavelength(8).unwrap();
    let sc = SourceScenario::uncorrelated(vec![20.0], f64::INFINITY, 1).unwrap();
    let r = true_covariance(&geom, &sc).unwrap();
    let est = music(&r, 1, &geom, 0.1).unwrap();
    assert!((est.angles[0] - 20.0).abs() < 0.01);
    assert!(music(&r, 1, &geom, 0.0).is_err());

    // Off the grid the refined peak beats the nearest grid point.
    let sc = SourceScenario::uncorrelated(vec![20.04], 30.0, 1).unwrap();
    let r = true_covariance(&geom, &sc).unwrap();
    let est = music(&r, 1, &geom, 0.1).unwrap();
    assert!((est.angles[0] - 20.04).abs() < 0.04);
}

#[test]
fn aliasing_is_reported() {
    let geom = ArrayGeometry::half_wavelength(4).unwrap();
    assert!(matches!(
        geom.angle_from_frequency(std::f64::consts::PI),
        Err(CoreError::Aliasing { .. })
    ));
    assert!((geom.angle_from_frequency(geom.spatial_frequency(33.0)).unwrap() - 33.0).abs() < 1e-12);
}

#[test]
fn direct_svd_needs_data() {
    let geom = ArrayGeometry::half_wavelength(4).unwrap();
    let obs = Observation::from_covariance(CMatrix::identity(4)).unwrap();
    assert!(esprit(&obs, 1, &geom, SubspaceMethod::DirectSvd).is_err());
}

#[test]
fn source_count_must_fit() {
    let (geom, obs) = noisy_observation(4, &[0.0], 10.0, 10, TrialSeed::new(28, 0));
    for kind in EstimatorKind::ALL {
        let spec = EstimatorSpec::default_for(kind);
        assert!(spec.estimate(&obs, 0, &geom).is_err());
        assert!(spec.estimate(&obs, 4, &geom).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perturbation_structure(seed in any::<u64>(), m in 3usize..10, p in 1usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, m, p);
        let r = random_pd(&mut rng, m);
        let v = perturbation_term(&a, &r).unwrap();
        let q = projection_from_basis(&a).unwrap();
        let qp = complement_projector(&q);
        prop_assert!((&(&q * &v) - &v).max_abs() < 1e-10);
        prop_assert!((&(&v * &qp) - &v).max_abs() < 1e-10);

        let scale = r.frobenius_norm_sqr();
        prop_assert!((&v * &v).trace().norm() < 1e-9 * scale);
        let vh = v.adjoint();
        prop_assert!((&vh * &vh).trace().norm() < 1e-9 * scale);

        let w = &v + &vh;
        let twice = 2.0 * (&v * &vh).trace().re;
        prop_assert!((w.frobenius_norm_sqr() - twice).abs() <= 1e-9 * twice.max(1e-300));
    }

    #[test]
    fn perturbation_equals_snapshot_sum(seed in any::<u64>(), n in 5usize..40) {
        let (geom, obs) = noisy_observation(8, &[-15.0, 30.0], 0.0, n, TrialSeed::new(seed, 0));
        let x = obs.data().unwrap();
        let a = manifold(&geom, &[-14.0, 31.0]).unwrap();
        let s = estimate_amplitudes(&a, x).unwrap();
        let noise = noise_component(&a, x, &s).unwrap();
        let oracle = (&a * &s).matmul(&noise.adjoint()).unwrap().scale_real(1.0 / n as f64);
        let v = perturbation_term(&a, obs.covariance()).unwrap();
        prop_assert!((&v - &oracle).max_abs() < 1e-9);
        // Residuals are orthogonal to the estimated manifold.
        prop_assert!(a.adjoint_mul(&noise).unwrap().max_abs() < 1e-9);
    }

    #[test]
    fn estimates_are_sorted_and_in_range(seed in any::<u64>(), snr in -10.0..20.0f64) {
        let (geom, obs) = noisy_observation(10, &[-20.0, 0.0, 35.0], snr, 20, TrialSeed::new(seed, 1));
        for kind in EstimatorKind::ALL {
            if let Ok(est) = EstimatorSpec::default_for(kind).estimate(&obs, 3, &geom) {
                prop_assert_eq!(est.angles.len(), 3);
                prop_assert!(est.angles.windows(2).all(|w| w[0] <= w[1]));
                prop_assert!(est.angles.iter().all(|t| t.abs() < 90.0));
            }
        }
    }
}
