use std::f64::consts::PI;

use fermi_spectra::analysis::{
    a_p, b_p, comparison_row, lower_bound_constant_width, lyapunov_bound, odd_mode_threshold, pi_p,
    proof_constants_at, test_function_upper_bound, CaseLabel,
};
use fermi_spectra::eig1d::{solve_shooting, OneDimProblem};
use fermi_spectra::geometry::{FermiDomain, Profile};
use proptest::prelude::*;

/// `1 + Σ a_j cos(2πj (s − L/2)/L)`, even about `L/2` and positive for `Σ|a_j| < 1`.
fn even_weight(length: f64, coeffs: &[f64]) -> impl Fn(f64) -> f64 + '_ {
    move |s| {
        1.0 + coeffs
            .iter()
            .enumerate()
            .map(|(j, a)| a * (2.0 * PI * (j + 1) as f64 * (s - 0.5 * length) / length).cos())
            .sum::<f64>()
    }
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.25f64..0.25, 1..4)
}

fn cheap() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn lyapunov_bound_never_exceeds_eigenvalue(c in coeffs(), p in 1.3f64..4.0, length in 0.5f64..4.0) {
        let problem = OneDimProblem::from_fn(length, p, 513, even_weight(length, &c)).unwrap();
        let lower = lyapunov_bound(&problem.weight, p).unwrap();
        let mu = solve_shooting(&problem, 1e-12).unwrap().mu;
        prop_assert!(lower <= mu, "{lower} > {mu}");
    }

    #[test]
    fn weight_scaling_leaves_eigenvalue_unchanged(c in coeffs(), p in 1.3f64..4.0, scale in 0.1f64..10.0) {
        let length = 2.0;
        let base = OneDimProblem::from_fn(length, p, 513, even_weight(length, &c)).unwrap();
        let scaled = OneDimProblem::new(p, base.weight.map(|v| scale * v)).unwrap();
        let a = solve_shooting(&base, 1e-13).unwrap().mu;
        let b = solve_shooting(&scaled, 1e-13).unwrap().mu;
        prop_assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
    }

    #[test]
    fn truncating_the_interval_raises_the_eigenvalue(c in coeffs(), p in 1.3f64..4.0, frac in 0.5f64..0.95) {
        let length = 2.0;
        let w = even_weight(length, &c);
        let full = solve_shooting(&OneDimProblem::from_fn(length, p, 1025, &w).unwrap(), 1e-12).unwrap();
        let short_len = frac * length;
        let offset = 0.5 * (length - short_len);
        let short = OneDimProblem::from_fn(short_len, p, 1025, |s| w(s + offset)).unwrap();
        let short = solve_shooting(&short, 1e-12).unwrap();
        prop_assert!(short.mu > full.mu, "{} <= {}", short.mu, full.mu);
    }

    #[test]
    fn eigenfunctions_are_odd_with_one_sign_change(c in coeffs(), p in 1.3f64..4.0) {
        let length = PI;
        let r = solve_shooting(&OneDimProblem::from_fn(length, p, 513, even_weight(length, &c)).unwrap(), 1e-12).unwrap();
        prop_assert_eq!(r.sign_changes(), 1);
        prop_assert!(r.oddness_residual() < 1e-9);
    }
}

proptest! {
    #[test]
    fn closed_form_radial_constants_dominate(k in -1.5f64..2.0, frac in 0.01f64..0.99) {
        let delta = if k < 0.0 { frac / -k } else { frac * 2.0 };
        let c = proof_constants_at(0.0, k, delta).unwrap();
        if let (Some(b), Some(closed)) = (c.b1_sq, c.b1_sq_closed) {
            prop_assert!(b <= closed * (1.0 + 1e-12), "B1: {b} > {closed}");
        }
        if let (Some(b), Some(closed)) = (c.b2_sq, c.b2_sq_closed) {
            prop_assert!(b <= closed * (1.0 + 1e-12), "B2: {b} > {closed}");
        }
    }

    #[test]
    fn generalized_pi_exceeds_two_p_root(p in 1.001f64..500.0) {
        let row = comparison_row(p).unwrap();
        prop_assert!(row.b_minus_r > 0.0);
        prop_assert!(2.0 * p.powf(1.0 / p) < pi_p(p).unwrap());
    }
}

fn curved_domain(k0: f64, k1: f64, delta: f64) -> FermiDomain {
    let k = Profile::function(move |s: f64| k0 + k1 * (s - 0.5 * PI).powi(2));
    FermiDomain::from_profiles(PI, &k, &Profile::Constant(delta), 257).unwrap()
}

proptest! {
    #![proptest_config(cheap())]

    #[test]
    fn dilation_scales_thresholds_and_bounds(k0 in -0.8f64..0.8, k1 in -0.1f64..0.1, delta in 0.1f64..0.6, c in 0.25f64..4.0, p in 1.3f64..4.0) {
        let d = curved_domain(k0, k1, delta);
        prop_assume!(d.valid);
        let big = d.dilated(c).unwrap();
        let t0 = odd_mode_threshold(&d).unwrap().value;
        let t1 = odd_mode_threshold(&big).unwrap().value;
        prop_assert!((t1 - t0 / (c * c)).abs() <= 1e-12 * t1, "{t1} vs {}", t0 / (c * c));
        let l0 = lower_bound_constant_width(&d, p).unwrap().value;
        let l1 = lower_bound_constant_width(&big, p).unwrap().value;
        prop_assert!((l1 - l0 * c.powf(-p)).abs() <= 1e-12 * l1);
        let u0 = test_function_upper_bound(&d, p).unwrap();
        let u1 = test_function_upper_bound(&big, p).unwrap();
        prop_assert!((u1 - u0 * c.powf(-p)).abs() <= 1e-10 * u1, "{u1} vs {}", u0 * c.powf(-p));
    }

    #[test]
    fn curvature_factors_are_ordered(k0 in -0.8f64..0.8, delta in 0.1f64..0.6, p in 1.05f64..6.0) {
        let d = curved_domain(k0, 0.0, delta);
        let a = a_p(&d, p).unwrap();
        let b = b_p(&d, p).unwrap();
        prop_assert!(0.0 < b && b <= a && a <= 1.0);
        let label = odd_mode_threshold(&d).unwrap().case_label;
        let expected = if k0 >= 0.0 { CaseLabel::NonNegative } else { CaseLabel::Negative };
        prop_assert_eq!(label, expected);
    }

    #[test]
    fn lower_bound_stays_below_test_function_bound(k0 in -0.8f64..0.8, delta in 0.1f64..0.6, p in 1.3f64..4.0) {
        let d = curved_domain(k0, 0.0, delta);
        let lower = lower_bound_constant_width(&d, p).unwrap().value;
        let upper = test_function_upper_bound(&d, p).unwrap();
        prop_assert!(lower <= upper, "{lower} > {upper}");
    }
}
