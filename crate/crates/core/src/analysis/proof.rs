//! Radial constants `B₁(s)²`, `B₂(s)²` and their closed-form majorants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::FermiDomain;
use crate::quadrature::golden_max;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofConstants {
    pub s: f64,
    pub k: f64,
    pub delta: f64,
    /// `max_r (∫_r^δ (1+tk) dt)(∫₀^r dt/(1+tk))`; present for `k ≥ 0`.
    pub b1_sq: Option<f64>,
    /// `max_r (∫₀^{δ−r} (1+tk) dt)(∫_{δ−r}^δ dt/(1+tk))`; present for `k ≤ 0`.
    pub b2_sq: Option<f64>,
    /// `(δ + δ²k/2)²`.
    pub b1_sq_closed: Option<f64>,
    /// `δ² / (1 + δk)²`.
    pub b2_sq_closed: Option<f64>,
    /// `1 / (4 B₁²)`.
    pub c1_lower: Option<f64>,
    /// `1 / (4 B₂²)`.
    pub c2_lower: Option<f64>,
}

/// `∫_a^b dt / (1 + t k)` without cancellation for small `k`.
fn inverse_jacobian_integral(a: f64, b: f64, k: f64) -> f64 {
    let len = b - a;
    let base = 1.0 + a * k;
    let x = k * len / base;
    if x.abs() < 1e-12 {
        return len / base * (1.0 - 0.5 * x);
    }
    len / base * x.ln_1p() / x
}

fn b1_product(r: f64, delta: f64, k: f64) -> f64 {
    (delta - r) * (1.0 + 0.5 * (delta + r) * k) * inverse_jacobian_integral(0.0, r, k)
}

fn b2_product(r: f64, delta: f64, k: f64) -> f64 {
    let m = delta - r;
    m * (1.0 + 0.5 * m * k) * inverse_jacobian_integral(m, delta, k)
}

/// Constants at one `(k, δ)` pair.
pub fn proof_constants_at(s: f64, k: f64, delta: f64) -> Result<ProofConstants> {
    if !(delta > 0.0) || !(1.0 + delta * k > 0.0) {
        return Err(Error::InvalidDomain(format!(
            "need delta > 0 and 1 + delta k > 0, got delta = {delta}, k = {k}"
        )));
    }
    let tol = 1e-13;
    let b1 = (k >= 0.0).then(|| golden_max(|r| b1_product(r, delta, k), 0.0, delta, tol).1);
    let b2 = (k <= 0.0).then(|| golden_max(|r| b2_product(r, delta, k), 0.0, delta, tol).1);
    Ok(ProofConstants {
        s,
        k,
        delta,
        b1_sq: b1,
        b2_sq: b2,
        b1_sq_closed: b1.map(|_| (delta + 0.5 * delta * delta * k).powi(2)),
        b2_sq_closed: b2.map(|_| delta * delta / (1.0 + delta * k).powi(2)),
        c1_lower: b1.map(|b| 0.25 / b),
        c2_lower: b2.map(|b| 0.25 / b),
    })
}

/// Constants at arc position `s` of a valid domain.
pub fn proof_constants(domain: &FermiDomain, s: f64) -> Result<ProofConstants> {
    domain.require_valid()?;
    proof_constants_at(s, domain.curvature_at(s), domain.width_at(s))
}
