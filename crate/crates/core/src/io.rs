//! CSV problem files and JSON recovery output.
//!
//! A matrix file is a CSV with a header row followed by `n` rows of `p`
//! numbers. An observation file is a single-column CSV with a header row and
//! `n` values. Values are written in shortest round-trip form, so saving and
//! reloading is exact.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{RecoveryResult, StopReason};
use crate::signal::MeasurementMatrix;

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn read_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let malformed = |msg: String| Error::MalformedData { path: path.to_path_buf(), msg };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(open(path)?);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                    malformed(format!("row {}, column {}: `{cell}` is not a finite number", i + 1, j + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(malformed("no data rows".into()));
    }
    Ok(rows)
}

pub fn load_matrix(path: &Path) -> Result<MeasurementMatrix> {
    let rows = read_rows(path)?;
    let p = rows[0].len();
    let n = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    let entries = Array2::from_shape_vec((n, p), flat)
        .map_err(|e| Error::MalformedData { path: path.to_path_buf(), msg: e.to_string() })?;
    MeasurementMatrix::new(entries)
}

pub fn load_vector(path: &Path) -> Result<Array1<f64>> {
    let rows = read_rows(path)?;
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != 1) {
        return Err(Error::MalformedData {
            path: path.to_path_buf(),
            msg: format!("row {} has {} columns, expected a single column", i + 1, row.len()),
        });
    }
    Ok(rows.into_iter().map(|r| r[0]).collect())
}

/// Loads a matrix/observation pair and checks their dimensions agree.
///
/// Columns are left as given unless `normalize_columns` is set.
pub fn load_problem(
    matrix_path: &Path,
    obs_path: &Path,
    normalize_columns: bool,
) -> Result<(MeasurementMatrix, Array1<f64>)> {
    let mut matrix = load_matrix(matrix_path)?;
    let y = load_vector(obs_path)?;
    if y.len() != matrix.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "{} has {} rows but {} has {} values",
            matrix_path.display(),
            matrix.nrows(),
            obs_path.display(),
            y.len()
        )));
    }
    if normalize_columns {
        matrix.normalize_columns()?;
    }
    Ok((matrix, y))
}

pub fn save_matrix_csv(matrix: &MeasurementMatrix, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record((1..=matrix.ncols()).map(|j| format!("a{j}"))).map_err(csv_err)?;
    for row in matrix.entries().rows() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_vector_csv(v: ArrayView1<'_, f64>, header: &str, path: &Path) -> Result<()> {
    let mut f = File::create(path)?;
    writeln!(f, "{header}")?;
    for x in v {
        writeln!(f, "{x}")?;
    }
    Ok(())
}

/// JSON written by `robustcs recover`. Support indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOutput {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub k: usize,
    pub support: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub sigma_hat: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub final_objective: f64,
}

impl RecoveryOutput {
    pub fn new(method: String, c: Option<f64>, k: usize, result: &RecoveryResult) -> Self {
        Self {
            method,
            c,
            k,
            support: result.signal.support().iter().map(|j| j + 1).collect(),
            coefficients: result.signal.coefficients().to_vec(),
            sigma_hat: result.sigma_hat,
            iterations: result.iterations,
            converged: result.converged,
            stop_reason: result.stop_reason,
            final_objective: *result.objective_trace.last().expect("trace is never empty"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    #[test]
    fn loads_small_pair() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "a1,a2\n1,2\n3,4\n5,6\n");
        let y = write(dir.path(), "y.csv", "y\n1\n2\n3\n");
        let (m, v) = load_problem(&a, &y, false).unwrap();
        assert_eq!(m.entries(), &array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        assert_eq!(v, array![1.0, 2.0, 3.0]);
        let (m, _) = load_problem(&a, &y, true).unwrap();
        assert!(m.column_norms().iter().all(|n| (n - 1.0).abs() < 1e-12));
    }

    #[test]
    fn dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "a1,a2\n1,2\n3,4\n5,6\n");
        let y = write(dir.path(), "y.csv", "y\n1\n2\n");
        assert!(matches!(load_problem(&a, &y, false), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn malformed_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let y = write(dir.path(), "y.csv", "y\n1\n2\n");
        let ragged = write(dir.path(), "r.csv", "a1,a2\n1,2\n3\n");
        assert!(matches!(load_problem(&ragged, &y, false), Err(Error::MalformedData { .. })));
        let text = write(dir.path(), "t.csv", "a1,a2\n1,x\n3,4\n");
        assert!(matches!(load_problem(&text, &y, false), Err(Error::MalformedData { .. })));
        let two_col = write(dir.path(), "y2.csv", "y,z\n1,2\n");
        assert!(matches!(load_vector(&two_col), Err(Error::MalformedData { .. })));
        let missing = dir.path().join("nope.csv");
        assert!(matches!(load_problem(&missing, &y, false), Err(Error::MissingFile(_))));
    }

    #[test]
    fn save_reload_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = crate::signal::generate_measurement_matrix(7, 5, &mut rng).unwrap();
        let y: Array1<f64> = (0..7).map(|i| (i as f64).sin() / 3.0).collect();
        let (ap, yp) = (dir.path().join("A.csv"), dir.path().join("y.csv"));
        save_matrix_csv(&m, &ap).unwrap();
        save_vector_csv(y.view(), "y", &yp).unwrap();
        let (m2, y2) = load_problem(&ap, &yp, false).unwrap();
        for (a, b) in m.entries().iter().zip(m2.entries()) {
            assert!((a - b).abs() <= 1e-15);
        }
        assert_eq!(y, y2);
    }
}
