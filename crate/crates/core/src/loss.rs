//! Robust loss functions for joint regression/scale M-estimation.
//!
//! A loss is described by the bundle `(rho, psi, chi, weight, v)`:
//!
//! * `rho(e)`: the convex loss, even, increasing in `|e|`;
//! * `psi(e) = rho'(e)`: the score;
//! * `chi(e) = psi(e) e - rho(e)`: drives the scale equation;
//! * `weight(e) = psi(e) / e`;
//! * `v(e) = rho(e) / e^2`.
//!
//! Only Huber's loss ships.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{erf, normal_cdf, normal_pdf};

/// Function bundle for a convex loss with linear growth.
pub trait RobustLoss {
    fn rho(&self, e: f64) -> f64;
    fn psi(&self, e: f64) -> f64;
    fn chi(&self, e: f64) -> f64 {
        self.psi(e) * e - self.rho(e)
    }
    /// `psi(e) / e`, continuously extended at 0.
    fn weight(&self, e: f64) -> f64;
    /// `rho(e) / e^2`, continuously extended at 0.
    fn vfun(&self, e: f64) -> f64;
    /// `lim rho(e)/|e|` as `|e| -> inf`. Coincides with the tuning constant
    /// for Huber but not in general.
    fn growth_limit(&self) -> f64;
    /// `2 E[chi(u)]` for `u ~ N(0,1)`; the joint objective's scale term uses
    /// half of this so that the scale estimate is Fisher-consistent at the
    /// normal model.
    fn consistency_factor(&self) -> f64;
}

/// Tuning constant giving 95% asymptotic efficiency at the normal model.
pub const C1: f64 = 1.345;
/// Tuning constant giving 85% asymptotic efficiency at the normal model.
pub const C2: f64 = 0.732;

/// Huber's loss with threshold `c` and its cached consistency factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HuberRaw", into = "HuberRaw")]
pub struct HuberParams {
    c: f64,
    beta: f64,
}

#[derive(Serialize, Deserialize)]
struct HuberRaw {
    c: f64,
}

impl TryFrom<HuberRaw> for HuberParams {
    type Error = Error;
    fn try_from(raw: HuberRaw) -> Result<Self> {
        HuberParams::new(raw.c)
    }
}

impl From<HuberParams> for HuberRaw {
    fn from(h: HuberParams) -> Self {
        HuberRaw { c: h.c }
    }
}

impl HuberParams {
    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("Huber threshold must be positive and finite, got {c}")));
        }
        Ok(Self { c, beta: beta_factor(c) })
    }

    pub fn c1() -> Self {
        Self::new(C1).expect("valid constant")
    }

    pub fn c2() -> Self {
        Self::new(C2).expect("valid constant")
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `alpha = beta / 2 = E[chi(u)]`.
    pub fn alpha(&self) -> f64 {
        0.5 * self.beta
    }
}

impl RobustLoss for HuberParams {
    fn rho(&self, e: f64) -> f64 {
        let a = e.abs();
        if a <= self.c {
            0.5 * e * e
        } else {
            self.c * a - 0.5 * self.c * self.c
        }
    }

    fn psi(&self, e: f64) -> f64 {
        e.clamp(-self.c, self.c)
    }

    fn chi(&self, e: f64) -> f64 {
        let s = self.psi(e);
        0.5 * s * s
    }

    fn weight(&self, e: f64) -> f64 {
        let a = e.abs();
        if a <= self.c {
            1.0
        } else {
            self.c / a
        }
    }

    fn vfun(&self, e: f64) -> f64 {
        let a = e.abs();
        if a <= self.c {
            0.5
        } else {
            self.rho(e) / (e * e)
        }
    }

    fn growth_limit(&self) -> f64 {
        self.c
    }

    fn consistency_factor(&self) -> f64 {
        self.beta
    }
}

/// `beta(c) = 2 { c^2 (1 - F(c)) + F(c) - 1/2 - c f(c) } = E[psi_c(u)^2]`,
/// `u ~ N(0,1)`, with `F`, `f` the standard normal cdf and pdf.
///
/// The tail `1 - F(c)` and `F(c) - 1/2` are evaluated without cancellation.
pub fn beta_factor(c: f64) -> f64 {
    let upper_tail = normal_cdf(-c);
    let central = 0.5 * erf(c * std::f64::consts::FRAC_1_SQRT_2);
    let clipped = if upper_tail == 0.0 { 0.0 } else { c * c * upper_tail };
    let boundary = if c.is_finite() { c * normal_pdf(c) } else { 0.0 };
    // rounding can push the sum a few ulps past 1 for large c
    (2.0 * (clipped + central - boundary)).min(1.0)
}
