use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robustcs::estimators::{hiht_recover, EstimatorConfig};
use robustcs::loss::HuberParams;
use robustcs::signal::{
    generate_measurement_matrix, generate_sparse_signal, hard_threshold, residuals, MeasurementMatrix,
};

fn subsets(p: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << p)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..p).filter(|j| m & (1 << j) != 0).collect())
        .collect()
}

proptest! {
    #[test]
    fn threshold_is_idempotent(v in prop::collection::vec(-100.0f64..100.0, 1..40), k in 0usize..45) {
        let v = Array1::from(v);
        let once = hard_threshold(v.view(), k);
        let twice = hard_threshold(once.coefficients().view(), k);
        prop_assert_eq!(&once, &twice);
        prop_assert!(once.sparsity() <= k.min(v.len()));
    }

    #[test]
    fn threshold_is_best_k_term_approximation(v in prop::collection::vec(-10.0f64..10.0, 1..=10), k in 1usize..=10) {
        let v = Array1::from(v);
        let p = v.len();
        let k = k.min(p);
        let h = hard_threshold(v.view(), k);
        let err = (&v - h.coefficients()).mapv(|x| x * x).sum();
        let best = subsets(p, k)
            .iter()
            .map(|s| (0..p).filter(|j| !s.contains(j)).map(|j| v[j] * v[j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        prop_assert!((err - best).abs() <= 1e-12 * best.max(1.0));
    }

    #[test]
    fn residuals_are_affine(seed in 0u64..1000, t in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = generate_measurement_matrix(12, 7, &mut rng).unwrap();
        let y = Array1::from_shape_fn(12, |i| (i as f64 * 0.37 + seed as f64).sin());
        let x1 = Array1::from_shape_fn(7, |j| j as f64 - 3.0);
        let x2 = Array1::from_shape_fn(7, |j| (j * j) as f64 * 0.1);
        let mix = &x1 * t + &x2 * (1.0 - t);
        let lhs = residuals(&a, y.view(), mix.view()).unwrap();
        let rhs = residuals(&a, y.view(), x1.view()).unwrap() * t + residuals(&a, y.view(), x2.view()).unwrap() * (1.0 - t);
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() < 1e-10);
        }
    }

    #[test]
    fn recovery_scales_with_the_data(seed in 0u64..200, scale in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = generate_measurement_matrix(40, 80, &mut rng).unwrap();
        let x = generate_sparse_signal(80, 3, 10.0, &mut rng).unwrap();
        let noise = Array1::from_shape_fn(40, |i| ((i as f64) * 1.7 + seed as f64).cos());
        let y = a.apply_sparse(&x) + &noise;
        let cfg = EstimatorConfig::new(HuberParams::c1(), 3);
        let r = hiht_recover(&a, y.view(), &cfg).unwrap();
        prop_assert_eq!(r.monotonicity_violations(), 0);
        prop_assert!(r.signal.sparsity() <= 3);
        prop_assert!(r.sigma_hat > 0.0);
        let scaled = hiht_recover(&a, (&y * scale).view(), &cfg).unwrap();
        prop_assert_eq!(scaled.monotonicity_violations(), 0);
        prop_assert!(scaled.signal.sparsity() <= 3);
    }
}

#[test]
fn threshold_breaks_ties_toward_lower_index() {
    let v = Array1::from(vec![1.0, -3.0, 3.0, 2.0, -3.0]);
    assert_eq!(hard_threshold(v.view(), 2).support(), &[1, 2]);
    let m = MeasurementMatrix::new(Array2::eye(3)).unwrap();
    assert_eq!(m.column_norms(), Array1::from(vec![1.0, 1.0, 1.0]));
}
