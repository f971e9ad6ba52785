// SPDX-License-Identifier: MIT OR Apache-2.0

//! Normal-Inverse-Gamma conjugate model for a Gaussian with unknown mean and
//! variance, and its Student-t posterior predictive.

use std::f64::consts::PI;

use crate::error::{CpdError, Result};
use crate::math::ln_gamma;

/// Sufficient statistics of one run-length hypothesis.
///
/// `nu` is a pseudo-observation count, not a variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NigParams {
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl NigParams {
    /// Builds a parameter set, rejecting non-finite or non-positive entries.
    pub fn new(mu: f64, nu: f64, alpha: f64, beta: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(CpdError::invalid(format!("prior mu must be finite; got {mu}")));
        }
        for (name, v) in [("nu", nu), ("alpha", alpha), ("beta", beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CpdError::invalid(format!(
                    "prior {name} must be finite and > 0; got {v}"
                )));
            }
        }
        Ok(Self { mu, nu, alpha, beta })
    }
}

/// Location-scale Student-t.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StudentTSpec {
    pub df: f64,
    pub loc: f64,
    pub scale_sq: f64,
}

/// Default prior centred at `loc` with `nu = alpha = beta = 1`.
pub fn init_nig(loc: f64) -> Result<NigParams> {
    NigParams::new(loc, 1.0, 1.0, 1.0)
}

/// One sequential conjugate update with observation `x`.
pub fn update_nig(p: &NigParams, x: f64) -> Result<NigParams> {
    if !x.is_finite() {
        return Err(CpdError::invalid(format!("observation must be finite; got {x}")));
    }
    Ok(update_unchecked(p, x))
}

#[inline]
pub(crate) fn update_unchecked(p: &NigParams, x: f64) -> NigParams {
    let dev = x - p.mu;
    NigParams {
        mu: (p.nu * p.mu + x) / (p.nu + 1.0),
        nu: p.nu + 1.0,
        alpha: p.alpha + 0.5,
        beta: p.beta + p.nu * dev * dev / (2.0 * (p.nu + 1.0)),
    }
}

/// Posterior predictive of the next observation.
pub fn predictive_spec(p: &NigParams) -> StudentTSpec {
    StudentTSpec {
        df: 2.0 * p.alpha,
        loc: p.mu,
        scale_sq: p.beta * (p.nu + 1.0) / (p.nu * p.alpha),
    }
}

/// Natural-log density of the location-scale Student-t at `x`.
pub fn log_pdf_student_t(x: f64, spec: &StudentTSpec) -> f64 {
    let StudentTSpec { df, loc, scale_sq } = *spec;
    let z = x - loc;
    ln_gamma(0.5 * (df + 1.0))
        - ln_gamma(0.5 * df)
        - 0.5 * (df * PI * scale_sq).ln()
        - 0.5 * (df + 1.0) * (z * z / (df * scale_sq)).ln_1p()
}
