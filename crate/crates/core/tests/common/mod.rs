//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robustcs::noise::{sample_noise, NoiseSpec};

fn std_normal_pdf(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, intervals: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// `2 E[chi(u)] = E[psi_c(u)^2]` by piecewise Simpson quadrature on
/// `[-12, 12]`, split at the kinks `+-c`.
pub fn beta_quadrature(c: f64) -> f64 {
    const L: f64 = 12.0;
    let k = c.min(L);
    let n = 20_000;
    let inner = simpson(|u| u * u * std_normal_pdf(u), -k, k, n);
    let tails = 2.0 * c * c * simpson(std_normal_pdf, k, L, n);
    inner + tails
}

/// Upper-tail Student-t quantile by bisection on `1 - I_x(nu/2, 1/2) / 2`,
/// with the regularized incomplete beta taken from statrs.
pub fn t_quantile_oracle(p: f64, dof: f64) -> f64 {
    assert!(p > 0.5 && p < 1.0);
    let cdf = |t: f64| 1.0 - 0.5 * statrs::function::beta::beta_reg(dof / 2.0, 0.5, dof / (dof + t * t));
    let (mut lo, mut hi) = (0.0, 1.0);
    while cdf(hi) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Samples `n` draws and returns the family's declared scale functional:
/// SD for Gaussian, mean absolute deviation for Laplace, median absolute
/// value for Student-t.
pub fn empirical_scale(spec: &NoiseSpec, n: usize, seed: u64) -> f64 {
    use robustcs::NoiseFamily::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = sample_noise(spec, n, &mut rng).unwrap();
    let count = n as f64;
    match spec.family {
        Gaussian => {
            let mean = eps.sum() / count;
            (eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (count - 1.0)).sqrt()
        }
        Laplace => eps.iter().map(|e| e.abs()).sum::<f64>() / count,
        StudentT => {
            let mut abs: Vec<f64> = eps.iter().map(|e| e.abs()).collect();
            abs.sort_by(f64::total_cmp);
            0.5 * (abs[n / 2 - 1] + abs[n / 2])
        }
    }
}
