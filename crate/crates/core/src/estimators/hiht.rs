use ndarray::ArrayView1;

use super::{
    check_problem, huber_weights, objective_from_residuals, pseudo_residual_gradient, relative_change, rms,
    scale_update, stepsize_initial, stepsize_subsequent, EstimatorConfig, EstimatorState, RecoveryResult, StopReason,
    FALLBACK_STEPSIZE, SIGMA_FLOOR_RATIO,
};
use crate::error::Result;
use crate::loss::RobustLoss;
use crate::signal::{hard_threshold, MeasurementMatrix, SparseSignal};

/// Huber iterative hard thresholding with joint scale estimation.
///
/// Starts from `x = 0`, `sigma = 1` and the support of `H_K(A^T psi(y))`.
/// Each iteration updates the scale, takes a hard-thresholded step along the
/// winsorized-residual gradient and accepts it only if the joint objective
/// strictly decreases, halving the stepsize otherwise.
pub fn hiht_recover(
    matrix: &MeasurementMatrix,
    observations: ArrayView1<'_, f64>,
    cfg: &EstimatorConfig,
) -> Result<RecoveryResult> {
    hiht_recover_observed(matrix, observations, cfg, |_| {})
}

/// [`hiht_recover`] that reports the initial state and every accepted state.
pub fn hiht_recover_observed<F>(
    matrix: &MeasurementMatrix,
    observations: ArrayView1<'_, f64>,
    cfg: &EstimatorConfig,
    mut observe: F,
) -> Result<RecoveryResult>
where
    F: FnMut(&EstimatorState),
{
    cfg.control.validate()?;
    let k = cfg.sparsity();
    check_problem(matrix, observations, k)?;
    let loss = &cfg.huber;
    let p = matrix.ncols();

    let data_scale = rms(observations);
    if data_scale == 0.0 {
        return Ok(zero_data_result(p));
    }
    let sigma_floor = SIGMA_FLOOR_RATIO * data_scale;

    // y is used as is, without standardization
    let y_psi = observations.mapv(|v| loss.psi(v));
    let initial_support = hard_threshold(matrix.apply_transpose(y_psi.view()).view(), k).support().to_vec();

    let mut x = SparseSignal::zeros(p);
    let mut sigma = 1.0;
    let mut residuals = observations.to_owned();
    let mut objective = objective_from_residuals(residuals.view(), sigma, loss, k);
    let mut trace = vec![objective];
    let mut sigma_floored = false;
    observe(&EstimatorState { x: x.clone(), sigma, stepsize: 0.0, objective, iteration: 0, halvings: 0 });

    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;
    for iteration in 0..cfg.control.max_iterations {
        let mut sigma_next = scale_update(residuals.view(), sigma, cfg);
        if !(sigma_next >= sigma_floor) {
            sigma_next = sigma_floor;
            sigma_floored = true;
        }

        let (_, gradient) = pseudo_residual_gradient(residuals.view(), sigma_next, matrix, cfg);
        let mut mu = if iteration == 0 {
            stepsize_initial(residuals.view(), gradient.view(), &initial_support, matrix, sigma_next, cfg)
        } else {
            let weights = huber_weights(residuals.view(), sigma_next, loss);
            stepsize_subsequent(gradient.view(), x.support(), matrix, weights.view())
        }
        .unwrap_or(FALLBACK_STEPSIZE);

        let mut accepted = None;
        let mut halvings = 0;
        loop {
            let candidate = hard_threshold((x.coefficients() + &(mu * &gradient)).view(), k);
            let cand_residuals = &observations - &matrix.apply_sparse(&candidate);
            let cand_objective = objective_from_residuals(cand_residuals.view(), sigma_next, loss, k);
            if cand_objective < objective {
                accepted = Some((candidate, cand_residuals, cand_objective));
                break;
            }
            if halvings == cfg.control.max_halvings {
                break;
            }
            mu *= 0.5;
            halvings += 1;
        }

        let Some((candidate, cand_residuals, cand_objective)) = accepted else {
            stop = StopReason::HalvingExhausted;
            break;
        };

        let change = relative_change(&candidate, &x);
        x = candidate;
        residuals = cand_residuals;
        sigma = sigma_next;
        objective = cand_objective;
        trace.push(objective);
        iterations = iteration + 1;
        observe(&EstimatorState { x: x.clone(), sigma, stepsize: mu, objective, iteration: iterations, halvings });

        if change.is_some_and(|c| c < cfg.control.tolerance) {
            stop = StopReason::Tolerance;
            break;
        }
    }

    Ok(RecoveryResult {
        signal: x,
        sigma_hat: sigma,
        iterations,
        converged: stop == StopReason::Tolerance,
        stop_reason: stop,
        objective_trace: trace,
        sigma_floored,
    })
}

pub(super) fn zero_data_result(p: usize) -> RecoveryResult {
    RecoveryResult {
        signal: SparseSignal::zeros(p),
        sigma_hat: f64::MIN_POSITIVE,
        iterations: 0,
        converged: true,
        stop_reason: StopReason::ZeroData,
        objective_trace: vec![0.0],
        sigma_floored: true,
    }
}
