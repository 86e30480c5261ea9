//! Monte-Carlo benchmark harness.
//!
//! Every trial draws a fresh measurement matrix (unless `fixed_matrix` is
//! set), a fresh K-sparse signal with random support and fresh noise, then
//! runs every configured method on the same `(A, y)`.
//!
//! # Seeding
//!
//! Trial `t` reads from `ChaCha8Rng::seed_from_u64(master_seed)` on stream
//! `t`, drawing in order: matrix, signal, noise. The same trial index uses
//! the same stream at every noise grid point, so grid points share matrices
//! and signals (common random numbers) and trial `t` can be replayed alone.
//! With `fixed_matrix`, the shared matrix comes from stream `u64::MAX`.

pub mod metrics;
pub mod presets;
pub mod report;

use std::fmt;
use std::hash::{DefaultHasher, Hasher};
use std::str::FromStr;
use std::time::Instant;

use ndarray::ArrayView1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{hiht_recover, iht_reference, EstimatorConfig, IterationControl, RecoveryResult, StopReason};
use crate::loss::{HuberParams, C1, C2};
use crate::noise::{sample_noise, scale_from_snr, NoiseFamily, NoiseSpec};
use crate::signal::{generate_measurement_matrix, generate_sparse_signal, MeasurementMatrix, ProblemInstance};

pub use metrics::{mse, per};
pub use presets::{experiment_presets, find_preset, PAPER_TRIALS};
pub use report::{BenchmarkReport, MethodSummary, PointReport, TrialRecord};

/// Stream id reserved for the shared matrix in fixed-matrix mode.
pub const FIXED_MATRIX_STREAM: u64 = u64::MAX;

/// An estimator preset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Iht,
    Hiht { c: f64 },
}

impl Method {
    pub fn hiht_c1() -> Self {
        Method::Hiht { c: C1 }
    }

    pub fn hiht_c2() -> Self {
        Method::Hiht { c: C2 }
    }

    pub fn threshold(&self) -> Option<f64> {
        match self {
            Method::Iht => None,
            Method::Hiht { c } => Some(*c),
        }
    }

    pub fn run(
        &self,
        matrix: &MeasurementMatrix,
        y: ArrayView1<'_, f64>,
        control: &IterationControl,
    ) -> Result<RecoveryResult> {
        match *self {
            Method::Iht => iht_reference(matrix, y, control),
            Method::Hiht { c } => {
                let cfg = EstimatorConfig { huber: HuberParams::new(c)?, control: *control };
                hiht_recover(matrix, y, &cfg)
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Method::Iht => f.write_str("iht"),
            Method::Hiht { c } if c == C1 => f.write_str("hiht-c1"),
            Method::Hiht { c } if c == C2 => f.write_str("hiht-c2"),
            Method::Hiht { c } => write!(f, "hiht:{c}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        match lower.as_str() {
            "iht" => Ok(Method::Iht),
            "hiht-c1" => Ok(Method::hiht_c1()),
            "hiht-c2" => Ok(Method::hiht_c2()),
            other => {
                let c = other
                    .strip_prefix("hiht:")
                    .and_then(|c| c.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown method `{s}` (iht, hiht-c1, hiht-c2, hiht:<c>)")))?;
                HuberParams::new(c)?;
                Ok(Method::Hiht { c })
            }
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One noise condition of an experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoisePoint {
    pub family: NoiseFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<f64>,
    pub snr_db: f64,
}

impl NoisePoint {
    pub fn spec(&self, amplitude: f64) -> Result<NoiseSpec> {
        if !self.snr_db.is_finite() {
            return Err(Error::Config(format!("SNR must be finite, got {}", self.snr_db)));
        }
        NoiseSpec::new(self.family, self.dof, scale_from_snr(self.snr_db, amplitude))
    }
}

/// Iteration budgets applied to every method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub max_halvings: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        let c = IterationControl::new(1);
        Self { tolerance: c.tolerance, max_iterations: c.max_iterations, max_halvings: c.max_halvings }
    }
}

/// A Monte-Carlo experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Measurements (rows of A).
    pub n: usize,
    /// Signal dimension (columns of A).
    pub p: usize,
    pub k: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    pub num_trials: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub fixed_matrix: bool,
    pub methods: Vec<Method>,
    pub noise: Vec<NoisePoint>,
    #[serde(default)]
    pub budgets: Budgets,
}

fn default_amplitude() -> f64 {
    10.0
}

fn default_seed() -> u64 {
    presets::DEFAULT_SEED
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_trials == 0 {
            return Err(Error::Config("num_trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("method list is empty".into()));
        }
        if self.noise.is_empty() {
            return Err(Error::Config("noise grid is empty".into()));
        }
        if self.n == 0 || self.p == 0 {
            return Err(Error::Config(format!("dimensions must be positive, got n={} p={}", self.n, self.p)));
        }
        if self.k == 0 || self.k > self.p || self.k >= self.n {
            return Err(Error::Config(format!(
                "need 1 <= K <= p and K < n, got K={} n={} p={}",
                self.k, self.n, self.p
            )));
        }
        if !(self.amplitude > 0.0) || !self.amplitude.is_finite() {
            return Err(Error::Config(format!("amplitude must be positive, got {}", self.amplitude)));
        }
        for point in &self.noise {
            point.spec(self.amplitude)?;
        }
        self.control().validate()
    }

    pub fn control(&self) -> IterationControl {
        IterationControl {
            sparsity: self.k,
            tolerance: self.budgets.tolerance,
            max_iterations: self.budgets.max_iterations,
            max_halvings: self.budgets.max_halvings,
        }
    }
}

/// What one method produced on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub support_match: bool,
    pub sq_error: f64,
    pub iterations: usize,
    pub sigma_hat: f64,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub monotonicity_violations: usize,
    /// Hash of the `(A, y)` the method was given.
    pub data_checksum: u64,
}

impl MethodOutcome {
    /// Counts toward exact recovery: correct support and neither the
    /// iteration nor the halving budget ran out.
    pub fn recovered(&self) -> bool {
        self.support_match && !self.stop_reason.budget_exhausted()
    }
}

/// Hash of a trial's data, used to check that all methods saw the same input.
pub fn data_checksum(matrix: &MeasurementMatrix, y: ArrayView1<'_, f64>) -> u64 {
    let mut h = DefaultHasher::new();
    h.write_usize(matrix.nrows());
    h.write_usize(matrix.ncols());
    for v in matrix.entries().iter().chain(y.iter()) {
        h.write_u64(v.to_bits());
    }
    h.finish()
}

/// Random stream for trial `trial`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Generates the data for one trial at one noise condition.
pub fn generate_trial(
    cfg: &ExperimentConfig,
    point: &NoisePoint,
    trial: u64,
    fixed_matrix: Option<&MeasurementMatrix>,
) -> Result<ProblemInstance> {
    let mut rng = trial_rng(cfg.master_seed, trial);
    let matrix = match fixed_matrix {
        Some(a) => a.clone(),
        None => generate_measurement_matrix(cfg.n, cfg.p, &mut rng)?,
    };
    let truth = generate_sparse_signal(cfg.p, cfg.k, cfg.amplitude, &mut rng)?;
    let spec = point.spec(cfg.amplitude)?;
    let noise = sample_noise(&spec, cfg.n, &mut rng)?;
    ProblemInstance::new(matrix, truth, noise, spec.scale)
}

/// Runs every method on one trial.
pub fn run_trial(cfg: &ExperimentConfig, instance: &ProblemInstance) -> Result<Vec<MethodOutcome>> {
    let control = cfg.control();
    cfg.methods
        .iter()
        .map(|method| {
            let data_checksum = data_checksum(&instance.matrix, instance.observations.view());
            let result = method.run(&instance.matrix, instance.observations.view(), &control)?;
            Ok(MethodOutcome {
                support_match: result.signal.support() == instance.truth.support(),
                sq_error: result.signal.squared_error(&instance.truth),
                iterations: result.iterations,
                sigma_hat: result.sigma_hat,
                converged: result.converged,
                stop_reason: result.stop_reason,
                monotonicity_violations: result.monotonicity_violations(),
                data_checksum,
            })
        })
        .collect()
}

/// Report plus the per-trial log it was aggregated from.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: BenchmarkReport,
    pub trials: Vec<TrialRecord>,
    pub wall_time_secs: f64,
}

/// Runs the full grid. `threads = 0` uses rayon's default pool size.
///
/// Output is independent of `threads`: trials are collected in index order
/// before aggregation.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let fixed = if cfg.fixed_matrix {
        let mut rng = trial_rng(cfg.master_seed, FIXED_MATRIX_STREAM);
        Some(generate_measurement_matrix(cfg.n, cfg.p, &mut rng)?)
    } else {
        None
    };

    let jobs: Vec<(usize, u64)> =
        (0..cfg.noise.len()).flat_map(|pi| (0..cfg.num_trials as u64).map(move |t| (pi, t))).collect();
    let outcomes: Vec<Vec<MethodOutcome>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(pi, t)| {
                let instance = generate_trial(cfg, &cfg.noise[pi], t, fixed.as_ref())?;
                run_trial(cfg, &instance)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut trials = Vec::with_capacity(outcomes.len() * cfg.methods.len());
    let mut points = Vec::with_capacity(cfg.noise.len());
    for (pi, point) in cfg.noise.iter().enumerate() {
        let block = &outcomes[pi * cfg.num_trials..(pi + 1) * cfg.num_trials];
        let scale = scale_from_snr(point.snr_db, cfg.amplitude);
        let mut summaries = Vec::with_capacity(cfg.methods.len());
        for (mi, method) in cfg.methods.iter().enumerate() {
            let per_method: Vec<&MethodOutcome> = block.iter().map(|o| &o[mi]).collect();
            summaries.push(MethodSummary::aggregate(method, &per_method, scale));
        }
        for (t, trial_outcomes) in block.iter().enumerate() {
            for (method, outcome) in cfg.methods.iter().zip(trial_outcomes) {
                trials.push(TrialRecord::new(t as u64, method, point, outcome));
            }
        }
        points.push(PointReport {
            family: point.family,
            dof: point.dof,
            snr_db: point.snr_db,
            noise_scale: scale,
            scale_convention: point.family.scale_convention().to_string(),
            methods: summaries,
        });
    }

    Ok(ExperimentOutput {
        report: BenchmarkReport::new(cfg.clone(), points),
        trials,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            name: "tiny".into(),
            description: String::new(),
            n: 48,
            p: 32,
            k: 3,
            amplitude: 10.0,
            num_trials: 6,
            master_seed: 5,
            fixed_matrix: false,
            methods: vec![Method::Iht, Method::hiht_c1(), Method::hiht_c2()],
            noise: vec![
                NoisePoint { family: NoiseFamily::Gaussian, dof: None, snr_db: 30.0 },
                NoisePoint { family: NoiseFamily::StudentT, dof: Some(1.0), snr_db: 30.0 },
            ],
            budgets: Budgets::default(),
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Iht, Method::hiht_c1(), Method::hiht_c2(), Method::Hiht { c: 2.5 }] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("lasso".parse::<Method>().is_err());
        assert!("hiht:-1".parse::<Method>().is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny_config();
        assert!(cfg.validate().is_ok());
        cfg.num_trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = tiny_config();
        cfg.methods.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = tiny_config();
        cfg.noise[0].snr_db = f64::NAN;
        assert!(cfg.validate().is_err());
        let mut cfg = tiny_config();
        cfg.noise[1].dof = None;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn methods_see_identical_data() {
        let cfg = tiny_config();
        let inst = generate_trial(&cfg, &cfg.noise[1], 2, None).unwrap();
        let outcomes = run_trial(&cfg, &inst).unwrap();
        let first = outcomes[0].data_checksum;
        assert!(outcomes.iter().all(|o| o.data_checksum == first));
        assert_eq!(first, data_checksum(&inst.matrix, inst.observations.view()));
    }

    #[test]
    fn trials_replay_in_isolation() {
        let cfg = tiny_config();
        let a = generate_trial(&cfg, &cfg.noise[0], 3, None).unwrap();
        let b = generate_trial(&cfg, &cfg.noise[0], 3, None).unwrap();
        assert_eq!(a.observations, b.observations);
        let c = generate_trial(&cfg, &cfg.noise[0], 4, None).unwrap();
        assert_ne!(a.observations, c.observations);
    }

    #[test]
    fn fixed_matrix_is_shared() {
        let mut cfg = tiny_config();
        cfg.fixed_matrix = true;
        let mut rng = trial_rng(cfg.master_seed, FIXED_MATRIX_STREAM);
        let a = generate_measurement_matrix(cfg.n, cfg.p, &mut rng).unwrap();
        let t0 = generate_trial(&cfg, &cfg.noise[0], 0, Some(&a)).unwrap();
        let t1 = generate_trial(&cfg, &cfg.noise[0], 1, Some(&a)).unwrap();
        assert_eq!(t0.matrix, t1.matrix);
        assert_ne!(t0.truth, t1.truth);
    }

    #[test]
    fn result_independent_of_thread_count() {
        let cfg = tiny_config();
        let one = run_experiment(&cfg, 1).unwrap();
        let many = run_experiment(&cfg, 4).unwrap();
        assert_eq!(one.report, many.report);
        assert_eq!(one.trials, many.trials);
        assert_eq!(one.trials.len(), cfg.num_trials * cfg.noise.len() * cfg.methods.len());
        for point in &one.report.points {
            for m in &point.methods {
                assert_eq!(m.trials_run, cfg.num_trials);
                assert!((0.0..=1.0).contains(&m.per_rate));
            }
        }
    }
}
