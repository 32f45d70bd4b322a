use kai_core::array::{generate_snapshots, TrialSeed};
use kai_core::estimators::Observation;
use kai_core::metrics::{multiplication_count, ComplexityModel};
use kai_harness::complexity::{complexity_report, ComplexityConfig};
use kai_harness::config::ExperimentConfig;
use kai_harness::report::csv_string;
use kai_harness::sweep::run_sweep;

fn config(snr: &str, trials: usize, estimators: &[&str]) -> ExperimentConfig {
    let mut text = format!(
        r#"
schema_version = 1

[geometry]
sensors = 40

[scenario]
doas = [10.2, 12.6, 15.0, 17.4]
snapshots = 25

[sweep]
snr_db = {snr}
trials = {trials}
base_seed = 11
"#
    );
    for name in estimators {
        text.push_str(&format!("\n[[estimators]]\nname = \"{name}\"\n"));
    }
    ExperimentConfig::from_toml_str(&text).unwrap()
}

const ALL: [&str; 6] = ["esprit", "iesprit", "ms-kai-esprit", "ts-esprit", "music", "root-music"];

#[test]
fn noiseless_single_trial_is_exact_for_every_estimator() {
    let result = run_sweep(&config("[inf]", 1, &ALL), None).unwrap();
    assert_eq!(result.cells.len(), ALL.len());
    for cell in &result.cells {
        assert_eq!(cell.excluded_trials, 0, "{}", cell.estimator);
        assert!(cell.rmse_deg < 1e-6, "{} {}", cell.estimator, cell.rmse_deg);
        assert_eq!(cell.prob_resolution, 1.0, "{}", cell.estimator);
        assert_eq!(cell.crb_sqrt_deg, 0.0);
    }
}

#[test]
fn row_count_is_estimators_times_snrs() {
    let result = run_sweep(&config("[0.0, 5.0, 10.0]", 2, &["esprit", "root-music"]), None).unwrap();
    assert_eq!(result.cells.len(), 2 * 3);
    assert_eq!(result.snr_db, [0.0, 5.0, 10.0]);
    for cell in &result.cells {
        assert_eq!(cell.trials.len(), 2);
        assert!(cell.crb_sqrt_deg > 0.0);
    }
    assert!(result.cell("esprit", 5.0).is_some());
    assert_eq!(result.series("root-music").count(), 3);
}

#[test]
fn repeated_runs_are_byte_identical_across_thread_counts() {
    let cfg = config("[-2.0, 4.0]", 8, &["esprit", "ms-kai-esprit", "root-music"]);
    let a = csv_string(&run_sweep(&cfg, Some(1)).unwrap());
    let b = csv_string(&run_sweep(&cfg, Some(3)).unwrap());
    let c = csv_string(&run_sweep(&cfg, None).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn seeds_change_the_data() {
    let mut cfg = config("[0.0]", 4, &["esprit"]);
    let a = run_sweep(&cfg, None).unwrap();
    cfg.sweep.as_mut().unwrap().base_seed = 12;
    let b = run_sweep(&cfg, None).unwrap();
    assert_ne!(a.cells[0].rmse_deg, b.cells[0].rmse_deg);
    assert_ne!(a.meta.config_hash, b.meta.config_hash);
}

#[test]
fn rmse_matches_a_direct_recomputation() {
    let cfg = config("[3.0]", 5, &["esprit"]);
    let result = run_sweep(&cfg, None).unwrap();
    let geom = cfg.geometry().unwrap();
    let sc = cfg.scenario(3.0).unwrap();
    let spec = &cfg.estimator_specs().unwrap()[0].1;
    let mut sum = 0.0;
    let mut count = 0;
    for l in 0..5 {
        let set = generate_snapshots(&geom, &sc, TrialSeed::new(11, l)).unwrap();
        if let Ok(est) = spec.estimate(&Observation::from_snapshots(&set), 4, &geom) {
            sum += est
                .angles
                .iter()
                .zip(sc.doas())
                .map(|(a, t)| (a - t).powi(2))
                .sum::<f64>();
            count += 1;
        }
    }
    let cell = &result.cells[0];
    assert_eq!(cell.excluded_trials, 5 - count);
    let expected = (sum / (4 * count) as f64).sqrt();
    assert!((cell.rmse_deg - expected).abs() <= 1e-12 * expected);
}

#[test]
fn exclusion_accounting_matches_the_trials() {
    // With one noise eigenvector MUSIC often finds fewer peaks than sources.
    let cfg = ExperimentConfig::from_toml_str(
        r#"
schema_version = 1

[geometry]
sensors = 5

[scenario]
doas = [-10.0, 0.0, 10.0, 20.0]
snapshots = 5

[sweep]
snr_db = [-10.0]
trials = 40

[[estimators]]
name = "music"
"#,
    )
    .unwrap();
    let result = run_sweep(&cfg, None).unwrap();
    let cell = &result.cells[0];
    let failed = cell.trials.iter().filter(|t| t.is_none()).count();
    assert!(failed > 0);
    assert_eq!(cell.excluded_trials, failed);
    let resolved = cell.trials.iter().flatten().filter(|t| t.resolved).count();
    assert_eq!(cell.prob_resolution, resolved as f64 / 40.0);
}

#[test]
fn iteration_diagnostics_are_aggregated() {
    let result = run_sweep(&config("[8.0]", 4, &["ms-kai-esprit", "esprit"]), None).unwrap();
    let kai = &result.cells[0];
    assert_eq!(kai.iteration_rmse_deg.len(), 4);
    assert_eq!(kai.mean_mu_opt.len(), 4);
    assert!(kai.mean_mu_opt.iter().all(|m| (0.0..=1.0).contains(m)));
    assert_eq!(*kai.iteration_rmse_deg.last().unwrap(), kai.rmse_deg);
    assert!(result.cells[1].iteration_rmse_deg.is_empty());
}

#[test]
fn complexity_single_point_matches_the_model_counts() {
    let cfg = ComplexityConfig {
        m_min: 40,
        m_max: 40,
        ..ComplexityConfig::default()
    };
    let report = complexity_report(&cfg).unwrap();
    assert_eq!(report.rows.len(), 1);
    let params = cfg.params_at(40).unwrap();
    for model in ComplexityModel::ALL {
        assert_eq!(
            report.rows[0].count(model),
            multiplication_count(model.name(), &params).unwrap()
        );
    }
    assert_eq!(report.rows[0].count(ComplexityModel::Esprit), 213_616);
    let csv = report.csv();
    assert!(csv.starts_with("model,m,mults,log10_mults\n"));
    assert!(csv.contains("esprit,40,213616,"));
}

#[test]
fn kai_and_avf_counts_merge_over_mid_sized_arrays() {
    let report = complexity_report(&ComplexityConfig {
        m_min: 20,
        m_max: 70,
        ..ComplexityConfig::default()
    })
    .unwrap();
    for row in &report.rows {
        let r = row.kai_avf_ratio();
        assert!((0.5..=2.0).contains(&r), "M = {}: {r}", row.m);
    }
    assert!(report.closest_to_parity().is_some());
    assert!(report.table().contains("nearest 1 at M ="));
}

#[test]
fn bad_sensor_range_is_rejected() {
    let err = complexity_report(&ComplexityConfig {
        m_min: 50,
        m_max: 40,
        ..ComplexityConfig::default()
    })
    .unwrap_err();
    assert!(err.is_config_error());
}
