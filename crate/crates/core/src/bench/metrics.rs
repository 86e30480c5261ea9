//! Monte-Carlo performance measures.

use crate::error::{Error, Result};
use crate::signal::SparseSignal;

/// Mean squared estimation error in dB: `10 log10(mean_q ||x_hat_q - x_q||^2)`.
///
/// The linear average is taken first. Perfect recovery yields `-inf`.
pub fn mse(estimates: &[SparseSignal], truths: &[SparseSignal]) -> Result<f64> {
    check_pairs(estimates, truths)?;
    let errors: Vec<f64> = estimates.iter().zip(truths).map(|(e, t)| e.squared_error(t)).collect();
    Ok(to_db(mean(&errors)))
}

/// Probability of exact recovery: the fraction of trials whose estimated
/// support equals the true support.
pub fn per(estimates: &[SparseSignal], truths: &[SparseSignal]) -> Result<f64> {
    check_pairs(estimates, truths)?;
    let hits = estimates.iter().zip(truths).filter(|(e, t)| e.support() == t.support()).count();
    Ok(hits as f64 / estimates.len() as f64)
}

fn check_pairs(estimates: &[SparseSignal], truths: &[SparseSignal]) -> Result<()> {
    if estimates.is_empty() {
        return Err(Error::Empty("estimate list"));
    }
    if estimates.len() != truths.len() {
        return Err(Error::DimensionMismatch(format!("{} estimates vs {} truths", estimates.len(), truths.len())));
    }
    if let Some((e, t)) = estimates.iter().zip(truths).find(|(e, t)| e.len() != t.len()) {
        return Err(Error::DimensionMismatch(format!("signal lengths {} vs {}", e.len(), t.len())));
    }
    Ok(())
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Median of a non-empty slice (NaN-free).
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array1};

    fn sig(v: Array1<f64>) -> SparseSignal {
        SparseSignal::from_dense(v)
    }

    #[test]
    fn perfect_recovery() {
        let truths = vec![sig(array![1.0, 0.0, -1.0]), sig(array![0.0, 2.0, 0.0])];
        assert_eq!(mse(&truths, &truths).unwrap(), f64::NEG_INFINITY);
        assert_eq!(per(&truths, &truths).unwrap(), 1.0);
    }

    #[test]
    fn unit_error_is_zero_db() {
        let t = vec![sig(array![1.0, 0.0])];
        let e = vec![sig(array![0.0, 0.0])];
        assert_eq!(mse(&e, &t).unwrap(), 0.0);
        assert_eq!(per(&e, &t).unwrap(), 0.0);
    }

    #[test]
    fn average_then_db() {
        // squared errors 2 and 4
        let t = vec![sig(array![1.0, 1.0]), sig(array![2.0, 0.0])];
        let e = vec![sig(array![0.0, 0.0]), sig(array![0.0, 0.0])];
        assert!((mse(&e, &t).unwrap() - 10.0 * 3f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn support_match_ignores_values() {
        let t = vec![sig(array![1.0, 0.0, 3.0])];
        let e = vec![sig(array![0.5, 0.0, 2.0])];
        assert_eq!(per(&e, &t).unwrap(), 1.0);
        let e = vec![sig(array![0.5, 0.1, 2.0])];
        assert_eq!(per(&e, &t).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(mse(&[], &[]).is_err());
        assert!(per(&[], &[]).is_err());
        let t = vec![sig(array![1.0])];
        let e = vec![sig(array![1.0, 0.0])];
        assert!(mse(&e, &t).is_err());
        assert!(per(&t, &[t[0].clone(), t[0].clone()]).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
