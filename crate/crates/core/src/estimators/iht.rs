use ndarray::ArrayView1;

use super::hiht::zero_data_result;
use super::{
    check_problem, relative_change, rms, EstimatorState, IterationControl, RecoveryResult, StopReason,
    FALLBACK_STEPSIZE, SIGMA_FLOOR_RATIO, STEPSIZE_DENOMINATOR_FLOOR,
};
use crate::error::Result;
use crate::signal::{hard_threshold, MeasurementMatrix, SparseSignal};

/// Normalized iterative hard thresholding.
///
/// Gradient `g = A^T (y - A x)`, stepsize `||g_S||^2 / ||A_S g_S||^2` on the
/// current support (the support of `H_K(A^T y)` at the first iteration).
///
/// Steps are accepted under the large-threshold limit of the joint objective,
/// `||e||^2 / (2 s) + (n - K) s / 2`, where `s` starts at 1 and is then the
/// profile scale `||e|| / sqrt(n - K)` of the previous iterate. The scale
/// never enters the step itself. This makes the iterates coincide with
/// [`super::hiht_recover`] as the Huber threshold grows.
pub fn iht_reference(
    matrix: &MeasurementMatrix,
    observations: ArrayView1<'_, f64>,
    control: &IterationControl,
) -> Result<RecoveryResult> {
    iht_reference_observed(matrix, observations, control, |_| {})
}

/// [`iht_reference`] that reports the initial state and every accepted state.
pub fn iht_reference_observed<F>(
    matrix: &MeasurementMatrix,
    observations: ArrayView1<'_, f64>,
    control: &IterationControl,
    mut observe: F,
) -> Result<RecoveryResult>
where
    F: FnMut(&EstimatorState),
{
    control.validate()?;
    let k = control.sparsity;
    check_problem(matrix, observations, k)?;
    let p = matrix.ncols();
    let dof = (matrix.nrows() - k) as f64;
    let data_scale = rms(observations);
    if data_scale == 0.0 {
        return Ok(zero_data_result(p));
    }
    let scale_floor = SIGMA_FLOOR_RATIO * data_scale;
    let objective_at = |rss: f64, s: f64| 0.5 * rss / s + 0.5 * dof * s;

    let mut x = SparseSignal::zeros(p);
    let mut residuals = observations.to_owned();
    let mut rss = residuals.dot(&residuals);
    let mut scale = 1.0;
    let mut objective = objective_at(rss, scale);
    let mut trace = vec![objective];
    observe(&EstimatorState { x: x.clone(), sigma: scale, stepsize: 0.0, objective, iteration: 0, halvings: 0 });

    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;
    for iteration in 0..control.max_iterations {
        let scale_next = (rss / dof).sqrt().max(scale_floor);
        let gradient = matrix.apply_transpose(residuals.view());
        let support =
            if iteration == 0 { hard_threshold(gradient.view(), k).support().to_vec() } else { x.support().to_vec() };
        let g_norm_sq: f64 = support.iter().map(|&j| gradient[j] * gradient[j]).sum();
        let direction = matrix.apply_restricted(&support, gradient.view());
        let d_norm_sq = direction.dot(&direction);
        let mut mu = if d_norm_sq > STEPSIZE_DENOMINATOR_FLOOR && g_norm_sq > 0.0 {
            g_norm_sq / d_norm_sq
        } else {
            FALLBACK_STEPSIZE
        };

        let mut accepted = None;
        let mut halvings = 0;
        loop {
            let candidate = hard_threshold((x.coefficients() + &(mu * &gradient)).view(), k);
            let cand_residuals = &observations - &matrix.apply_sparse(&candidate);
            let cand_rss = cand_residuals.dot(&cand_residuals);
            let cand_objective = objective_at(cand_rss, scale_next);
            if cand_objective < objective {
                accepted = Some((candidate, cand_residuals, cand_rss, cand_objective));
                break;
            }
            if halvings == control.max_halvings {
                break;
            }
            mu *= 0.5;
            halvings += 1;
        }
        let Some((candidate, cand_residuals, cand_rss, cand_objective)) = accepted else {
            stop = StopReason::HalvingExhausted;
            break;
        };

        let change = relative_change(&candidate, &x);
        x = candidate;
        residuals = cand_residuals;
        rss = cand_rss;
        scale = scale_next;
        objective = cand_objective;
        trace.push(objective);
        iterations = iteration + 1;
        observe(&EstimatorState {
            x: x.clone(),
            sigma: scale,
            stepsize: mu,
            objective,
            iteration: iterations,
            halvings,
        });

        if change.is_some_and(|c| c < control.tolerance) {
            stop = StopReason::Tolerance;
            break;
        }
    }

    Ok(RecoveryResult {
        signal: x,
        sigma_hat: scale,
        iterations,
        converged: stop == StopReason::Tolerance,
        stop_reason: stop,
        objective_trace: trace,
        sigma_floored: false,
    })
}
