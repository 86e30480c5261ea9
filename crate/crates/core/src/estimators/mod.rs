//! Sparse recovery estimators.
//!
//! [`hiht_recover`] minimizes Huber's joint objective
//!
//! ```text
//! Q(x, sigma) = sigma * sum_i rho((y_i - a_i^T x) / sigma) + (n - K) * alpha * sigma,   ||x||_0 <= K
//! ```
//!
//! by alternating a fixed-point scale update with a hard-thresholded gradient
//! step on the winsorized residuals. [`iht_reference`] is normalized IHT, the
//! large-threshold limit of the same iteration.

mod hiht;
mod iht;

use ndarray::{Array1, ArrayView1, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::{HuberParams, RobustLoss};
use crate::signal::{MeasurementMatrix, SparseSignal};

pub use hiht::{hiht_recover, hiht_recover_observed};
pub use iht::{iht_reference, iht_reference_observed};

/// Quadratic forms at or below this are treated as degenerate in the
/// stepsize formulas.
pub const STEPSIZE_DENOMINATOR_FLOOR: f64 = 1e-30;
/// Stepsize used when the closed-form one is degenerate.
pub const FALLBACK_STEPSIZE: f64 = 1.0;
/// Relative floor for the scale iterate, as a multiple of the RMS of `y`.
pub const SIGMA_FLOOR_RATIO: f64 = 1e-12;

/// Sparsity level and iteration budgets shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IterationControl {
    pub sparsity: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_max_halvings")]
    pub max_halvings: usize,
}

fn default_tolerance() -> f64 {
    1e-6
}
fn default_max_iterations() -> usize {
    500
}
fn default_max_halvings() -> usize {
    50
}

impl IterationControl {
    pub fn new(sparsity: usize) -> Self {
        Self {
            sparsity,
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
            max_halvings: default_max_halvings(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sparsity == 0 {
            return Err(Error::InvalidParameter("sparsity K must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 || self.max_halvings == 0 {
            return Err(Error::InvalidParameter("iteration and halving budgets must be at least 1".into()));
        }
        Ok(())
    }
}

/// Configuration of Huber IHT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub huber: HuberParams,
    pub control: IterationControl,
}

impl EstimatorConfig {
    /// Default budgets (`delta = 1e-6`, 500 iterations, 50 halvings).
    pub fn new(huber: HuberParams, sparsity: usize) -> Self {
        Self { huber, control: IterationControl::new(sparsity) }
    }

    pub fn sparsity(&self) -> usize {
        self.control.sparsity
    }
}

/// Loop state after an accepted iteration (or the initial state).
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub x: SparseSignal,
    pub sigma: f64,
    /// Stepsize that produced `x`, after any halvings. Zero for the initial state.
    pub stepsize: f64,
    pub objective: f64,
    pub iteration: usize,
    pub halvings: usize,
}

impl EstimatorState {
    pub fn support(&self) -> &[usize] {
        self.x.support()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// Relative change of the iterate fell below the tolerance.
    Tolerance,
    /// Iteration budget exhausted.
    MaxIterations,
    /// No stepsize within the halving budget decreased the objective.
    HalvingExhausted,
    /// Observations are identically zero; the zero signal is exact.
    ZeroData,
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub signal: SparseSignal,
    pub sigma_hat: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    /// Objective at the initial point and after every accepted iteration.
    pub objective_trace: Vec<f64>,
    /// The scale iterate hit its floor at least once (near exact fit).
    pub sigma_floored: bool,
}

impl StopReason {
    /// The iteration or halving budget ran out before the tolerance was met.
    pub fn budget_exhausted(self) -> bool {
        matches!(self, StopReason::MaxIterations | StopReason::HalvingExhausted)
    }
}

impl RecoveryResult {
    /// Number of strict-decrease violations in the objective trace.
    pub fn monotonicity_violations(&self) -> usize {
        self.objective_trace.windows(2).filter(|w| !(w[1] < w[0])).count()
    }
}

/// `sum_i rho(e_i / sigma) * sigma + (n - K) * alpha * sigma` from residuals.
pub fn objective_from_residuals(
    residuals: ArrayView1<'_, f64>,
    sigma: f64,
    loss: &HuberParams,
    sparsity: usize,
) -> f64 {
    let n = residuals.len();
    let fit: f64 = residuals.iter().map(|&e| loss.rho(e / sigma)).sum();
    sigma * fit + (n.saturating_sub(sparsity)) as f64 * loss.alpha() * sigma
}

/// Joint objective `Q(x, sigma)`.
pub fn objective_q(
    x: ArrayView1<'_, f64>,
    sigma: f64,
    matrix: &MeasurementMatrix,
    observations: ArrayView1<'_, f64>,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {sigma}")));
    }
    let e = crate::signal::residuals(matrix, observations, x)?;
    Ok(objective_from_residuals(e.view(), sigma, &cfg.huber, cfg.sparsity()))
}

/// One fixed-point step for the scale:
/// `sigma_new^2 = sigma^2 / ((n - K) beta) * sum_i psi(e_i / sigma)^2`.
///
/// Returns zero when every residual is zero; the caller applies a floor.
pub fn scale_update(residuals: ArrayView1<'_, f64>, sigma_prev: f64, cfg: &EstimatorConfig) -> f64 {
    let loss = &cfg.huber;
    let dof = (residuals.len() - cfg.sparsity()) as f64;
    let sum_sq: f64 = residuals
        .iter()
        .map(|&e| {
            let s = loss.psi(e / sigma_prev);
            s * s
        })
        .sum();
    sigma_prev * (sum_sq / (dof * loss.beta())).sqrt()
}

/// Pseudo-residuals `e_psi = psi(e / sigma) sigma` and the gradient `g = A^T e_psi`.
pub fn pseudo_residual_gradient(
    residuals: ArrayView1<'_, f64>,
    sigma: f64,
    matrix: &MeasurementMatrix,
    cfg: &EstimatorConfig,
) -> (Array1<f64>, Array1<f64>) {
    let loss = &cfg.huber;
    let e_psi = residuals.mapv(|e| loss.psi(e / sigma) * sigma);
    let g = matrix.apply_transpose(e_psi.view());
    (e_psi, g)
}

/// Stepsize for the first iteration:
/// `mu = e^T V A_S g_S / (g_S^T A_S^T V A_S g_S)`, `V = diag(v(e_i / sigma))`.
///
/// Returns `None` when the quadratic form is degenerate or the numerator is
/// not positive; callers then use [`FALLBACK_STEPSIZE`].
pub fn stepsize_initial(
    residuals: ArrayView1<'_, f64>,
    gradient: ArrayView1<'_, f64>,
    support: &[usize],
    matrix: &MeasurementMatrix,
    sigma: f64,
    cfg: &EstimatorConfig,
) -> Option<f64> {
    if support.is_empty() {
        return None;
    }
    let loss = &cfg.huber;
    let direction = matrix.apply_restricted(support, gradient);
    let mut num = 0.0;
    let mut den = 0.0;
    Zip::from(residuals).and(&direction).for_each(|&e, &d| {
        let v = loss.vfun(e / sigma);
        num += v * e * d;
        den += v * d * d;
    });
    positive_ratio(num, den)
}

/// Stepsize for later iterations:
/// `mu = g_S^T g_S / (g_S^T A_S^T W A_S g_S)` with `W = diag(weights)`.
///
/// `weights` are the Huber weights `w(e_i / sigma)` of the current residuals.
pub fn stepsize_subsequent(
    gradient: ArrayView1<'_, f64>,
    support: &[usize],
    matrix: &MeasurementMatrix,
    weights: ArrayView1<'_, f64>,
) -> Option<f64> {
    if support.is_empty() {
        return None;
    }
    let num: f64 = support.iter().map(|&j| gradient[j] * gradient[j]).sum();
    let direction = matrix.apply_restricted(support, gradient);
    let den: f64 = Zip::from(&direction).and(weights).fold(0.0, |acc, &d, &w| acc + w * d * d);
    positive_ratio(num, den)
}

fn positive_ratio(num: f64, den: f64) -> Option<f64> {
    if !(den > STEPSIZE_DENOMINATOR_FLOOR) {
        return None;
    }
    let mu = num / den;
    (mu > 0.0 && mu.is_finite()).then_some(mu)
}

/// Huber weights `w(e_i / sigma)`.
pub fn huber_weights(residuals: ArrayView1<'_, f64>, sigma: f64, loss: &HuberParams) -> Array1<f64> {
    residuals.mapv(|e| loss.weight(e / sigma))
}

pub(crate) fn relative_change(new: &SparseSignal, old: &SparseSignal) -> Option<f64> {
    let denom: f64 = old.coefficients().iter().map(|v| v * v).sum();
    if denom == 0.0 {
        return None;
    }
    Some(new.squared_error(old) / denom)
}

pub(crate) fn check_problem(
    matrix: &MeasurementMatrix,
    observations: ArrayView1<'_, f64>,
    sparsity: usize,
) -> Result<()> {
    let (n, p) = (matrix.nrows(), matrix.ncols());
    if observations.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} observations for a matrix with {n} rows",
            observations.len()
        )));
    }
    if sparsity == 0 || sparsity > p {
        return Err(Error::InvalidSparsity { k: sparsity, p });
    }
    if n <= sparsity {
        return Err(Error::InvalidParameter(format!("need more measurements than K (n = {n}, K = {sparsity})")));
    }
    if observations.iter().chain(matrix.entries().iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("data contain non-finite values".into()));
    }
    Ok(())
}

pub(crate) fn rms(v: ArrayView1<'_, f64>) -> f64 {
    (v.dot(&v) / v.len() as f64).sqrt()
}
