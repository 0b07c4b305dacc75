//! Lower bounds for the first odd eigenvalue and for the weighted 1-D problem.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::certify::Certificate;
use super::constants::{b_p_prefactor, pi_p};
use crate::error::{check_exponent, Error, Result};
use crate::geometry::FermiDomain;
use crate::sampling::UniformSamples;

/// Default tolerance for concavity, constancy and slope checks.
pub const DEFAULT_CHECK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `μ₁^odd ≥ A_p (π_p/L)^p` for constant width and concave curvature.
    ConstantWidth,
    /// `μ₁^odd ≥ B_p (π_p/L)^p` under the concavity and slope conditions on `δ`.
    VariableWidth,
    /// `p = 2`, constant width, with a certified identification `μ₁ = μ₁^odd`.
    ConstantWidthLinear,
    /// `p = 2`, variable width, with a certified identification `μ₁ = μ₁^odd`.
    VariableWidthLinear,
    /// `μ₁(0, L; w) ≥ min w / ∫₀^{L/2} (L/2 − s)^{p−1} w ds` with `w = δ`.
    Lyapunov,
}

/// Which eigenvalue a bound is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundTarget {
    Mu1Odd,
    Mu1,
    /// First nonzero eigenvalue of the weighted interval problem with weight `δ`.
    ThinLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
}

impl HypothesisResult {
    fn new(name: &str, passed: bool, residual: f64) -> Self {
        HypothesisResult {
            name: name.to_string(),
            passed,
            residual,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub target: BoundTarget,
    pub p: f64,
    pub value: f64,
    pub constants: BTreeMap<String, f64>,
    pub hypotheses: Vec<HypothesisResult>,
    pub applicable: bool,
    /// Number of s-samples the hypotheses were checked on.
    pub grid: usize,
    pub tolerance: f64,
}

impl BoundReport {
    fn assemble(
        kind: BoundKind,
        target: BoundTarget,
        p: f64,
        value: f64,
        constants: BTreeMap<String, f64>,
        hypotheses: Vec<HypothesisResult>,
        grid: usize,
    ) -> Self {
        let applicable = hypotheses.iter().all(|h| h.passed);
        BoundReport {
            kind,
            target,
            p,
            value,
            constants,
            hypotheses,
            applicable,
            grid,
            tolerance: DEFAULT_CHECK_TOL,
        }
    }
}

/// Discrete concavity: every second difference `f[i-1] − 2f[i] + f[i+1]` is at
/// most `tol · max|f|`. Returns the pass flag and the largest second difference
/// relative to that scale (0 when none is positive).
pub fn concavity_check(samples: &[f64], tol: f64) -> Result<(bool, f64)> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    let scale = samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let worst = samples
        .windows(3)
        .map(|w| w[0] - 2.0 * w[1] + w[2])
        .fold(0.0_f64, f64::max);
    let pass = worst <= tol * scale;
    let relative = if scale > 0.0 { worst / scale } else { worst };
    Ok((pass, relative))
}

fn jacobian_hypotheses(domain: &FermiDomain) -> Vec<HypothesisResult> {
    vec![
        HypothesisResult::new("jacobian_positive", domain.jacobian_min > 0.0, domain.jacobian_min),
        HypothesisResult::new(
            "fermi_map_injective",
            domain.validation.collisions == 0,
            domain.validation.collisions as f64,
        ),
    ]
}

/// `min_s min(1, (1 + δ(s) k(s))^{−p})` without requiring a valid domain.
fn curvature_factor(domain: &FermiDomain, p: f64) -> f64 {
    domain
        .curve
        .curvature
        .values
        .iter()
        .zip(&domain.width.delta.values)
        .map(|(k, d)| {
            let j = 1.0 + d * k;
            if j > 0.0 {
                j.powf(-p)
            } else {
                f64::INFINITY
            }
        })
        .fold(1.0, f64::min)
}

fn base_constants(domain: &FermiDomain, p: f64, pi: f64) -> BTreeMap<String, f64> {
    let mut c = BTreeMap::new();
    c.insert("pi_p".to_string(), pi);
    c.insert("L".to_string(), domain.length());
    c.insert("p".to_string(), p);
    c
}

fn constant_width_hypotheses(domain: &FermiDomain) -> Result<Vec<HypothesisResult>> {
    let delta = &domain.width.delta;
    let spread = (delta.max() - delta.min()) / delta.max_abs();
    let (concave, resid) = concavity_check(&domain.curve.curvature.values, DEFAULT_CHECK_TOL)?;
    let mut h = vec![
        HypothesisResult::new("width_constant", spread <= DEFAULT_CHECK_TOL, spread),
        HypothesisResult::new("curvature_concave", concave, resid),
    ];
    h.extend(jacobian_hypotheses(domain));
    Ok(h)
}

fn variable_width_hypotheses(domain: &FermiDomain) -> Result<Vec<HypothesisResult>> {
    let delta = &domain.width.delta.values;
    let k = &domain.curve.curvature.values;
    let (d_ok, d_res) = concavity_check(delta, DEFAULT_CHECK_TOL)?;
    let dk: Vec<f64> = delta.iter().zip(k).map(|(d, k)| d * k).collect();
    let d2k: Vec<f64> = delta.iter().zip(k).map(|(d, k)| d * d * k).collect();
    let (dk_ok, dk_res) = concavity_check(&dk, DEFAULT_CHECK_TOL)?;
    let (d2k_ok, d2k_res) = concavity_check(&d2k, DEFAULT_CHECK_TOL)?;
    let slope = domain.width.ddelta.max_abs();
    let mut h = vec![
        HypothesisResult::new("width_concave", d_ok, d_res),
        HypothesisResult::new("width_curvature_concave", dk_ok || d2k_ok, dk_res.min(d2k_res)),
        HypothesisResult::new("width_slope_at_most_one", slope <= 1.0 + DEFAULT_CHECK_TOL, slope),
    ];
    h.extend(jacobian_hypotheses(domain));
    Ok(h)
}

/// `A_p (π_p/L)^p` with the constant-width hypotheses checked.
pub fn lower_bound_constant_width(domain: &FermiDomain, p: f64) -> Result<BoundReport> {
    let pi = pi_p(p)?;
    let a = curvature_factor(domain, p);
    let mut constants = base_constants(domain, p, pi);
    constants.insert("A_p".to_string(), a);
    Ok(BoundReport::assemble(
        BoundKind::ConstantWidth,
        BoundTarget::Mu1Odd,
        p,
        a * (pi / domain.length()).powf(p),
        constants,
        constant_width_hypotheses(domain)?,
        domain.samples(),
    ))
}

/// `B_p (π_p/L)^p` with the variable-width hypotheses checked.
pub fn lower_bound_variable_width(domain: &FermiDomain, p: f64) -> Result<BoundReport> {
    let pi = pi_p(p)?;
    let b = b_p_prefactor(p) * curvature_factor(domain, p);
    let mut constants = base_constants(domain, p, pi);
    constants.insert("B_p".to_string(), b);
    Ok(BoundReport::assemble(
        BoundKind::VariableWidth,
        BoundTarget::Mu1Odd,
        p,
        b * (pi / domain.length()).powf(p),
        constants,
        variable_width_hypotheses(domain)?,
        domain.samples(),
    ))
}

/// The `p = 2` bound on `μ₁` itself: the odd-mode bound plus a certificate that
/// the first eigenfunction is odd.
pub fn lower_bound_linear(domain: &FermiDomain, certificate: &Certificate, variable_width: bool) -> Result<BoundReport> {
    let mut report = if variable_width {
        lower_bound_variable_width(domain, 2.0)?
    } else {
        lower_bound_constant_width(domain, 2.0)?
    };
    report.kind = if variable_width {
        BoundKind::VariableWidthLinear
    } else {
        BoundKind::ConstantWidthLinear
    };
    report.target = BoundTarget::Mu1;
    report.constants.insert("threshold".to_string(), certificate.threshold);
    report.constants.insert("mu1_upper".to_string(), certificate.mu1_upper);
    report.hypotheses.push(HypothesisResult::new(
        "first_mode_certified_odd",
        certificate.certified,
        certificate.mu1_upper / certificate.threshold,
    ));
    report.applicable = report.hypotheses.iter().all(|h| h.passed);
    Ok(report)
}

/// `min w / ∫₀^{L/2} (L/2 − s)^{p−1} w(s) ds` for a positive weight even about `L/2`.
///
/// The integral is exact for the piecewise-linear interpolant of the samples,
/// so a constant weight gives exactly `p (2/L)^p`.
pub fn lyapunov_bound(w: &UniformSamples, p: f64) -> Result<f64> {
    check_exponent(p)?;
    check_weight(w)?;
    let m = 0.5 * w.length;
    let mut integral = 0.0;
    for i in 0..w.len() - 1 {
        let a = w.node(i);
        if a >= m {
            break;
        }
        let b_full = w.node(i + 1);
        let b = b_full.min(m);
        // w linear on [a, b_full]; restrict to [a, b]
        let wa = w.values[i];
        let wb = wa + (w.values[i + 1] - wa) * (b - a) / (b_full - a);
        integral += cell_moment(m - a, m - b, wa, wb, p);
    }
    Ok(w.min() / integral)
}

/// `∫_{x_lo}^{x_hi} x^{p−1} ℓ(x) dx` for `ℓ` linear with `ℓ(x_hi) = w_hi`, `ℓ(x_lo) = w_lo`.
fn cell_moment(x_hi: f64, x_lo: f64, w_hi: f64, w_lo: f64, p: f64) -> f64 {
    let dx = x_hi - x_lo;
    if dx <= 0.0 {
        return 0.0;
    }
    // ℓ(x) = w_lo + (w_hi − w_lo)(x − x_lo)/dx = α + β x
    let beta = (w_hi - w_lo) / dx;
    let alpha = w_lo - beta * x_lo;
    let pow_diff = |q: f64| x_hi.powf(q) - x_lo.powf(q);
    alpha * pow_diff(p) / p + beta * pow_diff(p + 1.0) / (p + 1.0)
}

pub(crate) fn check_weight(w: &UniformSamples) -> Result<()> {
    if w.len() < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: w.len() });
    }
    for (i, &v) in w.values.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonpositiveWeight { index: i, value: v });
        }
    }
    let residual = w.evenness_residual() / w.max_abs();
    if residual > DEFAULT_CHECK_TOL {
        return Err(Error::AsymmetricWeight { residual });
    }
    Ok(())
}

/// Lyapunov-type bound for the thin-limit problem with weight `δ`.
pub fn lyapunov_report(domain: &FermiDomain, p: f64) -> Result<BoundReport> {
    let pi = pi_p(p)?;
    let w = &domain.width.delta;
    let value = lyapunov_bound(w, p)?;
    let mut constants = base_constants(domain, p, pi);
    constants.insert("min_weight".to_string(), w.min());
    constants.insert("constant_weight_value".to_string(), p * (2.0 / domain.length()).powf(p));
    let hyps = vec![
        HypothesisResult::new("weight_positive", w.min() > 0.0, w.min()),
        HypothesisResult::new(
            "weight_even",
            w.evenness_residual() <= DEFAULT_CHECK_TOL * w.max_abs(),
            w.evenness_residual(),
        ),
    ];
    Ok(BoundReport::assemble(
        BoundKind::Lyapunov,
        BoundTarget::ThinLimit,
        p,
        value,
        constants,
        hyps,
        w.len(),
    ))
}
