//! Robust compressed sensing.
//!
//! Recovers a K-sparse signal `x` from measurements `y = A x + eps` under
//! heavy-tailed noise. The central estimator is Huber iterative hard
//! thresholding ([`estimators::hiht_recover`]), which minimizes Huber's joint
//! location/scale objective under a sparsity constraint and so estimates the
//! noise scale together with the signal. Normalized IHT
//! ([`estimators::iht_reference`]) is provided as the non-robust baseline.
//!
//! The [`bench`] module runs Monte-Carlo comparisons under Gaussian, Laplace
//! and Student-t noise and reports MSE and exact-support-recovery rates.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod io;
pub mod loss;
pub mod noise;
pub mod signal;
pub mod special;

pub use error::{Error, Result};
pub use estimators::{hiht_recover, iht_reference, EstimatorConfig, RecoveryResult, StopReason};
pub use loss::{HuberParams, RobustLoss};
pub use noise::{NoiseFamily, NoiseSpec};
pub use signal::{MeasurementMatrix, ProblemInstance, SparseSignal};
