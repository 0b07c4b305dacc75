//! Thinness thresholds, the cosine test-function upper bound, and the
//! certificate that the first nonzero eigenfunction is odd.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Result};
use crate::geometry::FermiDomain;
use crate::quadrature::CompositeGauss;

/// Samples with `k > −NONNEGATIVE_TOL` count as nonnegative curvature.
pub const NONNEGATIVE_TOL: f64 = 1e-12;

/// Sign pattern of the curvature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseLabel {
    /// `k ≥ 0` everywhere.
    #[serde(rename = "a")]
    NonNegative,
    /// `k < 0` everywhere.
    #[serde(rename = "b")]
    Negative,
    /// Everything else, including `k ≤ 0` with zeros.
    #[serde(rename = "c")]
    Mixed,
}

impl CaseLabel {
    pub fn letter(self) -> &'static str {
        match self {
            CaseLabel::NonNegative => "a",
            CaseLabel::Negative => "b",
            CaseLabel::Mixed => "c",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub case_label: CaseLabel,
    pub value: f64,
    /// `max_s (2δ + δ² k)²`.
    pub outer_max: f64,
    /// `max_s 4δ² / (1 + δ k)²`.
    pub inner_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub case_label: CaseLabel,
    pub threshold: f64,
    /// Rigorous upper bound on `μ₁` used for the comparison.
    pub mu1_upper: f64,
    pub upper_source: String,
    /// `mu1_upper < threshold`.
    pub certified: bool,
}

/// Classifies the curvature sign and returns the matching thinness threshold:
/// `1/max(2δ+δ²k)²` (nonnegative), `1/max 4δ²/(1+δk)²` (negative) or the
/// smaller of the two (mixed).
pub fn odd_mode_threshold(domain: &FermiDomain) -> Result<Threshold> {
    domain.require_valid()?;
    let k = &domain.curve.curvature.values;
    let delta = &domain.width.delta.values;
    let case_label = if k.iter().all(|&v| v >= -NONNEGATIVE_TOL) {
        CaseLabel::NonNegative
    } else if k.iter().all(|&v| v < 0.0) {
        CaseLabel::Negative
    } else {
        CaseLabel::Mixed
    };
    let mut outer_max = 0.0_f64;
    let mut inner_max = 0.0_f64;
    for (k, d) in k.iter().zip(delta) {
        outer_max = outer_max.max((2.0 * d + d * d * k).powi(2));
        inner_max = inner_max.max(4.0 * d * d / (1.0 + d * k).powi(2));
    }
    let denom = match case_label {
        CaseLabel::NonNegative => outer_max,
        CaseLabel::Negative => inner_max,
        CaseLabel::Mixed => outer_max.max(inner_max),
    };
    Ok(Threshold {
        case_label,
        value: 1.0 / denom,
        outer_max,
        inner_max,
    })
}

/// `∫₀^δ (1 + r k) dr`.
pub(crate) fn radial_mass(delta: f64, k: f64) -> f64 {
    delta + 0.5 * delta * delta * k
}

/// `∫₀^δ (1 + r k)^{1−p} dr`, closed form with a series near `δk = 0`.
pub(crate) fn radial_stiffness(delta: f64, k: f64, p: f64) -> f64 {
    let x = delta * k;
    if x.abs() < 1e-8 {
        return delta * (1.0 + 0.5 * (1.0 - p) * x);
    }
    let a = 2.0 - p;
    if a == 0.0 {
        delta * x.ln_1p() / x
    } else {
        delta * (a * x.ln_1p()).exp_m1() / (a * x)
    }
}

/// Gauss rule on `[0, L]` with at least 256 ten-point panels, aligned with the
/// sample cells so the piecewise-linear data is smooth on each panel.
pub(crate) fn sample_aligned_rule(cells: usize) -> CompositeGauss {
    let panels = cells * 256usize.div_ceil(cells);
    CompositeGauss::new(10, panels)
}

/// `(π/L)^p ∫|sin(πs/L)|^p I_{1−p}(s) ds / ∫|cos(πs/L)|^p I₁(s) ds`: the p-quotient
/// of `cos(πs/L)`, which has zero p-mean because the weights are even about `L/2`.
///
/// For `p = 2` this is a rigorous upper bound on `μ₁`; for other `p` it bounds
/// the first nonzero eigenvalue of the p-quotient in the same way.
pub fn test_function_upper_bound(domain: &FermiDomain, p: f64) -> Result<f64> {
    check_exponent(p)?;
    domain.require_valid()?;
    let length = domain.length();
    let w = PI / length;
    let rule = sample_aligned_rule(domain.samples() - 1);
    let num = rule.integrate(0.0, length, |s| {
        (w * s).sin().abs().powf(p) * radial_stiffness(domain.width_at(s), domain.curvature_at(s), p)
    });
    let den = rule.integrate(0.0, length, |s| {
        (w * s).cos().abs().powf(p) * radial_mass(domain.width_at(s), domain.curvature_at(s))
    });
    Ok(w.powf(p) * num / den)
}

/// Certificate from the cosine test-function bound.
pub fn certify_odd(domain: &FermiDomain) -> Result<Certificate> {
    let upper = test_function_upper_bound(domain, 2.0)?;
    certify_odd_with_upper(domain, upper, "cosine_test_function")
}

/// Certificate from a caller-supplied rigorous upper bound on `μ₁`.
pub fn certify_odd_with_upper(domain: &FermiDomain, mu1_upper: f64, source: &str) -> Result<Certificate> {
    let t = odd_mode_threshold(domain)?;
    Ok(Certificate {
        case_label: t.case_label,
        threshold: t.value,
        mu1_upper,
        upper_source: source.to_string(),
        certified: mu1_upper < t.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Profile;
    use crate::quadrature::adaptive;

    fn domain(k: Profile, delta: Profile, length: f64) -> FermiDomain {
        FermiDomain::from_profiles(length, &k, &delta, 513).unwrap()
    }

    #[test]
    fn thresholds_by_case() {
        let rect = domain(Profile::Constant(0.0), Profile::Constant(0.4), PI);
        let t = odd_mode_threshold(&rect).unwrap();
        assert_eq!(t.case_label, CaseLabel::NonNegative);
        assert!((t.value - 1.5625).abs() < 1e-14);

        let sector = domain(Profile::Constant(-0.5), Profile::Constant(0.5), PI);
        let t = odd_mode_threshold(&sector).unwrap();
        assert_eq!(t.case_label, CaseLabel::Negative);
        assert!((t.value - 0.5625).abs() < 1e-14);

        let length = 4.0;
        let k = Profile::function(move |s| 0.2 * (2.0 * PI * s / length).cos());
        let wavy = domain(k, Profile::Constant(0.3), length);
        let t = odd_mode_threshold(&wavy).unwrap();
        assert_eq!(t.case_label, CaseLabel::Mixed);
        // dense oracle over the closed-form k
        let (mut a, mut b) = (0.0_f64, 0.0_f64);
        for i in 0..=20_000 {
            let s = length * i as f64 / 20_000.0;
            let k = 0.2 * (2.0 * PI * s / length).cos();
            a = a.max((0.6 + 0.09 * k).powi(2));
            b = b.max(4.0 * 0.09 / (1.0 + 0.3 * k).powi(2));
        }
        assert!((t.value - 1.0 / a.max(b)).abs() < 1e-12);
    }

    #[test]
    fn radial_integrals_match_quadrature() {
        for &(d, k, p) in &[(0.5, -0.5, 2.0), (0.4, 1.3, 3.0), (0.2, -2.0, 1.5), (0.3, 1e-10, 2.5)] {
            let exact = adaptive(|r: f64| (1.0 + r * k).powf(1.0 - p), 0.0, d, 1e-14);
            assert!((radial_stiffness(d, k, p) - exact).abs() < 1e-13, "{d} {k} {p}");
        }
        assert_eq!(radial_stiffness(0.7, 0.0, 3.0), 0.7);
    }

    #[test]
    fn rectangle_upper_bound_is_exact() {
        for length in [1.0, PI, 5.0] {
            let rect = domain(Profile::Constant(0.0), Profile::Constant(0.4), length);
            let v = test_function_upper_bound(&rect, 2.0).unwrap();
            let exact = (PI / length).powi(2);
            assert!((v - exact).abs() < 1e-13 * exact);
        }
    }

    #[test]
    fn variable_width_upper_bound_matches_adaptive_oracle() {
        let rect = domain(Profile::Constant(0.0), Profile::function(|s| 0.3 + 0.1 * s.sin()), PI);
        let v = test_function_upper_bound(&rect, 2.0).unwrap();
        let num = adaptive(|s| s.sin().powi(2) * rect.width_at(s), 0.0, PI, 1e-14);
        let den = adaptive(|s| s.cos().powi(2) * rect.width_at(s), 0.0, PI, 1e-14);
        assert!((v - num / den).abs() < 1e-8 * v);
    }

    #[test]
    fn rectangle_certificates() {
        let thin = domain(Profile::Constant(0.0), Profile::Constant(0.4), PI);
        let c = certify_odd(&thin).unwrap();
        assert!(c.certified);
        assert!((c.mu1_upper - 1.0).abs() < 1e-13);
        let fat = domain(Profile::Constant(0.0), Profile::Constant(1.2), PI);
        let c = certify_odd(&fat).unwrap();
        assert!(!c.certified);
        assert!((c.threshold - 1.0 / 5.76).abs() < 1e-14);
        assert_eq!(serde_json::to_value(c.case_label).unwrap(), "a");
    }
}
