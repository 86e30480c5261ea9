//! Noise families, each scaled by its own dispersion functional:
//!
//! | family    | scale means                         |
//! |-----------|-------------------------------------|
//! | Gaussian  | standard deviation `sqrt(E[e^2])`    |
//! | Laplace   | mean absolute deviation `E[|e|]`     |
//! | Student-t | median absolute deviation `Med(|e|)` |
//!
//! Student-t never uses SD scaling; for `dof <= 2` it has no variance.

use std::fmt;
use std::str::FromStr;

use ndarray::Array1;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::t_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseFamily {
    Gaussian,
    Laplace,
    StudentT,
}

impl NoiseFamily {
    pub fn name(self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "gaussian",
            NoiseFamily::Laplace => "laplace",
            NoiseFamily::StudentT => "student-t",
        }
    }

    /// Name of the dispersion functional the scale refers to.
    pub fn scale_convention(self) -> &'static str {
        match self {
            NoiseFamily::Gaussian => "SD",
            NoiseFamily::Laplace => "MeAD",
            NoiseFamily::StudentT => "MAD",
        }
    }
}

impl fmt::Display for NoiseFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(NoiseFamily::Gaussian),
            "laplace" | "laplacian" => Ok(NoiseFamily::Laplace),
            "student-t" | "studentt" | "t" => Ok(NoiseFamily::StudentT),
            other => Err(Error::InvalidNoise(format!("unknown noise family `{other}`"))),
        }
    }
}

/// A noise distribution with its scale in the family's convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub family: NoiseFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<f64>,
    pub scale: f64,
}

impl NoiseSpec {
    pub fn new(family: NoiseFamily, dof: Option<f64>, scale: f64) -> Result<Self> {
        let spec = Self { family, dof, scale };
        spec.validate()?;
        Ok(spec)
    }

    pub fn gaussian(scale: f64) -> Result<Self> {
        Self::new(NoiseFamily::Gaussian, None, scale)
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        Self::new(NoiseFamily::Laplace, None, scale)
    }

    pub fn student_t(dof: f64, scale: f64) -> Result<Self> {
        Self::new(NoiseFamily::StudentT, Some(dof), scale)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::InvalidNoise(format!("scale must be positive, got {}", self.scale)));
        }
        match (self.family, self.dof) {
            (NoiseFamily::StudentT, Some(dof)) if dof > 0.0 && dof.is_finite() => Ok(()),
            (NoiseFamily::StudentT, Some(dof)) => {
                Err(Error::InvalidNoise(format!("degrees of freedom must be positive, got {dof}")))
            }
            (NoiseFamily::StudentT, None) => Err(Error::InvalidNoise("student-t noise needs `dof`".into())),
            (family, Some(_)) => {
                Err(Error::InvalidNoise(format!("`dof` is only meaningful for student-t, not {family}")))
            }
            (_, None) => Ok(()),
        }
    }
}

/// Noise scale giving `SNR = 20 log10(amplitude / scale)` decibels.
pub fn scale_from_snr(snr_db: f64, amplitude: f64) -> f64 {
    amplitude * 10f64.powf(-snr_db / 20.0)
}

/// `20 log10(amplitude / scale)`.
pub fn snr_from_scale(scale: f64, amplitude: f64) -> f64 {
    20.0 * (amplitude / scale).log10()
}

/// Draws `n` i.i.d. noise terms whose scale functional equals `spec.scale`.
///
/// * Gaussian: `N(0, scale^2)`.
/// * Laplace: density `exp(-|e|/b) / (2b)` with `b = scale`, so `E|e| = b`.
/// * Student-t: standard `t_dof` multiplied by `scale / Q(0.75)`; since the
///   distribution is symmetric, `Med|e| = Q(0.75)` before rescaling.
pub fn sample_noise<R: Rng + ?Sized>(spec: &NoiseSpec, n: usize, rng: &mut R) -> Result<Array1<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("noise length must be positive".into()));
    }
    let out = match spec.family {
        NoiseFamily::Gaussian => (0..n).map(|_| spec.scale * rng.sample::<f64, _>(StandardNormal)).collect(),
        NoiseFamily::Laplace => (0..n)
            .map(|_| {
                let magnitude: f64 = rng.sample(Exp1);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                sign * spec.scale * magnitude
            })
            .collect(),
        NoiseFamily::StudentT => {
            let dof = spec.dof.expect("validated");
            let dist = StudentT::new(dof).map_err(|e| Error::InvalidNoise(e.to_string()))?;
            let multiplier = spec.scale / t_quantile(0.75, dof);
            (0..n).map(|_| multiplier * dist.sample(rng)).collect()
        }
    };
    Ok(out)
}
