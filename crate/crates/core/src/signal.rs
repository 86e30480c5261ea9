//! Measurement model `y = A x + eps`: sparse signals, measurement matrices,
//! problem instances and the hard-thresholding operator.
//!
//! Indices are 0-based in memory. Serialized support sets are converted to
//! 1-based at the I/O boundary (see [`crate::io`]).

use std::cmp::Ordering;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A coefficient vector together with its support (indices of the nonzero
/// entries, ascending).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    coefficients: Array1<f64>,
    support: Vec<usize>,
}

impl SparseSignal {
    /// Builds a signal from a dense vector; the support is every nonzero index.
    pub fn from_dense(coefficients: Array1<f64>) -> Self {
        let support = nonzero_indices(coefficients.view());
        Self { coefficients, support }
    }

    pub fn zeros(p: usize) -> Self {
        Self { coefficients: Array1::zeros(p), support: Vec::new() }
    }

    pub fn coefficients(&self) -> &Array1<f64> {
        &self.coefficients
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Ambient dimension `p`.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Number of nonzero coefficients.
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn into_coefficients(self) -> Array1<f64> {
        self.coefficients
    }

    /// Squared Euclidean distance to another signal of the same length.
    pub fn squared_error(&self, other: &SparseSignal) -> f64 {
        self.coefficients.iter().zip(other.coefficients.iter()).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

pub(crate) fn nonzero_indices(v: ArrayView1<'_, f64>) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, _)| i).collect()
}

/// Dense `n x p` measurement matrix, rows are the measurement vectors `a_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementMatrix {
    entries: Array2<f64>,
}

impl MeasurementMatrix {
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::Empty("measurement matrix"));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    /// Number of measurements `n`.
    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    /// Signal dimension `p`.
    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn column_norms(&self) -> Array1<f64> {
        self.entries.map_axis(Axis(0), |c| c.dot(&c).sqrt())
    }

    /// Rescales every column to unit Euclidean norm. Fails on a zero column.
    pub fn normalize_columns(&mut self) -> Result<()> {
        for (j, mut col) in self.entries.axis_iter_mut(Axis(1)).enumerate() {
            let norm = col.dot(&col).sqrt();
            if norm == 0.0 {
                return Err(Error::InvalidParameter(format!("column {} is identically zero", j + 1)));
            }
            col /= norm;
        }
        Ok(())
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// `A x` for a dense `x`.
    pub fn apply(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        self.entries.dot(&x)
    }

    /// `A_S v_S = sum_{j in S} v_j a_j` where `a_j` is column `j`; `v` has length `p`.
    pub fn apply_restricted(&self, support: &[usize], v: ArrayView1<'_, f64>) -> Array1<f64> {
        let mut out = Array1::zeros(self.nrows());
        for &j in support {
            let vj = v[j];
            if vj != 0.0 {
                out.scaled_add(vj, &self.entries.column(j));
            }
        }
        out
    }

    /// `A^T e`.
    pub fn apply_transpose(&self, e: ArrayView1<'_, f64>) -> Array1<f64> {
        self.entries.t().dot(&e)
    }

    /// `A x` exploiting the support of a sparse signal.
    pub fn apply_sparse(&self, x: &SparseSignal) -> Array1<f64> {
        self.apply_restricted(x.support(), x.coefficients().view())
    }
}

/// One Monte-Carlo trial's data.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub matrix: MeasurementMatrix,
    pub observations: Array1<f64>,
    pub truth: SparseSignal,
    pub noise: Array1<f64>,
    /// Noise scale in the noise family's convention.
    pub noise_scale: f64,
}

impl ProblemInstance {
    /// Assembles `y = A x + eps`.
    pub fn new(matrix: MeasurementMatrix, truth: SparseSignal, noise: Array1<f64>, noise_scale: f64) -> Result<Self> {
        if truth.len() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "signal length {} vs matrix columns {}",
                truth.len(),
                matrix.ncols()
            )));
        }
        if noise.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "noise length {} vs matrix rows {}",
                noise.len(),
                matrix.nrows()
            )));
        }
        let observations = matrix.apply_sparse(&truth) + &noise;
        Ok(Self { matrix, observations, truth, noise, noise_scale })
    }
}

/// Draws an `n x p` matrix with i.i.d. N(0,1) entries and unit-norm columns.
///
/// A column whose norm comes out as exactly zero is redrawn.
pub fn generate_measurement_matrix<R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> Result<MeasurementMatrix> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidParameter(format!("matrix dimensions must be positive, got {n}x{p}")));
    }
    let mut entries = Array2::<f64>::zeros((n, p));
    for mut col in entries.axis_iter_mut(Axis(1)) {
        let mut attempts = 0;
        loop {
            col.iter_mut().for_each(|a| *a = rng.sample(StandardNormal));
            let norm = col.dot(&col).sqrt();
            if norm > 0.0 && norm.is_finite() {
                col /= norm;
                break;
            }
            attempts += 1;
            if attempts >= 16 {
                return Err(Error::DegenerateDraw("random stream keeps producing zero columns".into()));
            }
        }
    }
    MeasurementMatrix::new(entries)
}

/// Draws a K-sparse signal: support uniform without replacement, nonzeros
/// `±amplitude` with equiprobable signs.
pub fn generate_sparse_signal<R: Rng + ?Sized>(
    p: usize,
    k: usize,
    amplitude: f64,
    rng: &mut R,
) -> Result<SparseSignal> {
    if k == 0 || k > p {
        return Err(Error::InvalidSparsity { k, p });
    }
    if !(amplitude > 0.0) || !amplitude.is_finite() {
        return Err(Error::InvalidParameter(format!("amplitude must be positive, got {amplitude}")));
    }
    let mut support = index::sample(rng, p, k).into_vec();
    support.sort_unstable();
    let mut coefficients = Array1::zeros(p);
    for &j in &support {
        coefficients[j] = if rng.random_bool(0.5) { amplitude } else { -amplitude };
    }
    Ok(SparseSignal { coefficients, support })
}

/// Magnitude order used by hard thresholding: larger `|v|` first, lower index
/// first among equal magnitudes.
fn magnitude_order(v: ArrayView1<'_, f64>, i: usize, j: usize) -> Ordering {
    v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j))
}

/// Hard thresholding `H_K(v)`: keeps the `k` largest-magnitude entries and
/// zeroes the rest. Ties go to the lower index. `k` larger than `v.len()`
/// keeps everything.
pub fn hard_threshold(v: ArrayView1<'_, f64>, k: usize) -> SparseSignal {
    let p = v.len();
    let k = k.min(p);
    let mut order: Vec<usize> = (0..p).collect();
    if k < p && k > 0 {
        order.select_nth_unstable_by(k - 1, |&i, &j| magnitude_order(v, i, j));
    }
    let mut support: Vec<usize> = order[..k].iter().copied().filter(|&j| v[j] != 0.0).collect();
    support.sort_unstable();
    let mut coefficients = Array1::zeros(p);
    for &j in &support {
        coefficients[j] = v[j];
    }
    SparseSignal { coefficients, support }
}

/// Residual vector `e(x) = y - A x`.
pub fn residuals(
    matrix: &MeasurementMatrix,
    observations: ArrayView1<'_, f64>,
    x: ArrayView1<'_, f64>,
) -> Result<Array1<f64>> {
    if observations.len() != matrix.nrows() || x.len() != matrix.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix {}x{}, observations {}, signal {}",
            matrix.nrows(),
            matrix.ncols(),
            observations.len(),
            x.len()
        )));
    }
    Ok(&observations - &matrix.apply(x))
}
