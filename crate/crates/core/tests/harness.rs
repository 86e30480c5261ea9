use std::collections::HashMap;

use robustcs::bench::report::{read_trials_csv, write_trials_csv};
use robustcs::bench::{run_experiment, ExperimentConfig, Method, NoisePoint};
use robustcs::noise::NoiseFamily;

fn config(noise: Vec<NoisePoint>, trials: usize) -> ExperimentConfig {
    ExperimentConfig {
        name: "harness-test".into(),
        description: String::new(),
        n: 64,
        p: 128,
        k: 4,
        amplitude: 10.0,
        num_trials: trials,
        master_seed: 11,
        fixed_matrix: false,
        methods: vec![Method::Iht, Method::hiht_c1(), Method::hiht_c2()],
        noise,
        budgets: Default::default(),
    }
}

fn t_points(snrs: &[f64]) -> Vec<NoisePoint> {
    snrs.iter().map(|&snr_db| NoisePoint { family: NoiseFamily::StudentT, dof: Some(1.0), snr_db }).collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn aggregates_recompute_from_trial_log() {
    let mut noise = t_points(&[20.0, 30.0]);
    noise.push(NoisePoint { family: NoiseFamily::Laplace, dof: None, snr_db: 24.0 });
    let cfg = config(noise, 25);
    let out = run_experiment(&cfg, 2).unwrap();

    let mut buf = Vec::new();
    write_trials_csv(&out.trials, &mut buf).unwrap();
    let records = read_trials_csv(buf.as_slice()).unwrap();
    assert_eq!(records, out.trials);

    for point in &out.report.points {
        for summary in &point.methods {
            let rows: Vec<_> = records
                .iter()
                .filter(|r| {
                    r.method == summary.method
                        && r.family == point.family
                        && r.dof == point.dof
                        && r.snr_db == point.snr_db
                })
                .collect();
            assert_eq!(rows.len(), cfg.num_trials);
            assert_eq!(summary.trials_run, cfg.num_trials);
            let count = rows.len() as f64;
            let mse: f64 = rows.iter().map(|r| r.sq_error).sum::<f64>() / count;
            let per = rows.iter().filter(|r| r.recovered()).count() as f64 / count;
            let iters = rows.iter().map(|r| r.iterations as f64).sum::<f64>() / count;
            let conv = rows.iter().filter(|r| r.converged).count() as f64 / count;
            let ratio = median(rows.iter().map(|r| r.sigma_hat / point.noise_scale).collect());
            assert!((summary.mse_linear - mse).abs() <= 1e-12 * mse.max(1.0));
            assert!((summary.per_rate - per).abs() <= 1e-12);
            assert!((summary.mean_iterations - iters).abs() <= 1e-12 * iters);
            assert!((summary.converged_rate - conv).abs() <= 1e-12);
            assert!((summary.median_sigma_ratio - ratio).abs() <= 1e-12 * ratio);
            assert!((0.0..=1.0).contains(&summary.per_rate));
            assert_eq!(summary.monotonicity_violations, 0);
        }
    }
}

#[test]
fn methods_see_identical_data() {
    let cfg = config(t_points(&[20.0]), 10);
    let out = run_experiment(&cfg, 1).unwrap();
    let mut by_trial: HashMap<u64, Vec<u64>> = HashMap::new();
    for r in &out.trials {
        by_trial.entry(r.trial).or_default().push(r.data_checksum);
    }
    for sums in by_trial.values() {
        assert_eq!(sums.len(), 3);
        assert!(sums.iter().all(|&s| s == sums[0]));
    }
}

#[test]
fn per_does_not_drop_with_snr() {
    let cfg = config(t_points(&[20.0, 30.0, 40.0]), 60);
    let out = run_experiment(&cfg, 0).unwrap();
    for method in &cfg.methods {
        let per = |snr: f64| {
            out.report.point(NoiseFamily::StudentT, Some(1.0), snr).unwrap().method(*method).unwrap().per_rate
        };
        assert!(per(40.0) >= per(20.0) - 0.02, "{method}: {} vs {}", per(40.0), per(20.0));
        assert!(per(40.0) >= per(30.0) - 0.02, "{method}");
    }
}

#[test]
fn gaussian_high_snr_full_recovery() {
    let cfg = config(vec![NoisePoint { family: NoiseFamily::Gaussian, dof: None, snr_db: 40.0 }], 100);
    let out = run_experiment(&cfg, 0).unwrap();
    for m in &out.report.points[0].methods {
        assert_eq!(m.per_rate, 1.0, "{}", m.method);
    }
}
