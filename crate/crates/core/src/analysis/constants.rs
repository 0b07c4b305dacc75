//! Closed-form constants: the generalized π and the curvature factors.

use std::f64::consts::PI;

use crate::error::{check_exponent, Result};
use crate::geometry::FermiDomain;
use crate::quadrature::tanh_sinh;

/// `π_p = 2π (p−1)^{1/p} / (p sin(π/p))`.
pub fn pi_p(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(2.0 * PI * (p - 1.0).powf(1.0 / p) / (p * (PI / p).sin()))
}

/// `2 ∫₀^∞ ds / (1 + s^p/(p−1))` by tanh–sinh quadrature.
///
/// The tail `[1, ∞)` is mapped to `(0, 1]` by `s = 1/x`, which turns it into
/// `∫₀¹ (p−1) x^{p−2} / ((p−1) x^p + 1) dx`.
pub fn pi_p_quadrature(p: f64) -> Result<f64> {
    check_exponent(p)?;
    let q = p - 1.0;
    let head = tanh_sinh(|x, _| 1.0 / (1.0 + x.powf(p) / q), 0.0, 1.0, 1e-14);
    let tail = tanh_sinh(|x, _| q * x.powf(p - 2.0) / (q * x.powf(p) + 1.0), 0.0, 1.0, 1e-14);
    Ok(2.0 * (head + tail))
}

/// `A_p = min (1 + r k(s))^{−p}` over the closure of the coordinate domain.
///
/// For fixed `s` the factor is monotone in `r`, so only `r = 0` (value 1) and
/// `r = δ(s)` are visited, at every curve sample.
pub fn a_p(domain: &FermiDomain, p: f64) -> Result<f64> {
    check_exponent(p)?;
    domain.require_valid()?;
    Ok(min_outer_factor(domain, p).min(1.0))
}

/// `min_s (1 + δ(s) k(s))^{−p}` at the curve samples.
fn min_outer_factor(domain: &FermiDomain, p: f64) -> f64 {
    domain
        .curve
        .curvature
        .values
        .iter()
        .zip(&domain.width.delta.values)
        .map(|(k, d)| (1.0 + d * k).powf(-p))
        .fold(f64::INFINITY, f64::min)
}

/// `B_p = 2^{−p/2} min{1, A}` for `p < 2` and `2^{1−p} min{1, A}` for `p ≥ 2`.
pub fn b_p(domain: &FermiDomain, p: f64) -> Result<f64> {
    let inner = a_p(domain, p)?;
    Ok(b_p_prefactor(p) * inner)
}

pub(crate) fn b_p_prefactor(p: f64) -> f64 {
    if p < 2.0 {
        2f64.powf(-0.5 * p)
    } else {
        2f64.powf(1.0 - p)
    }
}

/// Constant of `(a² + b²)^{p/2} ≥ C_p (a^p + b^p)`.
pub fn c_p(p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(if p < 2.0 { 2f64.powf(0.5 * (p - 2.0)) } else { 1.0 })
}
