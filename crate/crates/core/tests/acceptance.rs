//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fermi_spectra::analysis::{
    certify_odd, comparison_row, lower_bound_constant_width, lyapunov_bound, odd_mode_threshold, pi_p,
    pi_p_quadrature, proof_constants_at, test_function_upper_bound, uniform_x_grid,
};
use fermi_spectra::asymptotics::{epsilon_sweep, MeshPolicy, SweepResult};
use fermi_spectra::eig1d::{solve_discretized, solve_shooting, OneDimProblem};
use fermi_spectra::eig2d::{build_mesh, solve_mu1, Mode};
use fermi_spectra::geometry::{FermiDomain, Profile};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn domain(length: f64, k: f64, delta: f64) -> FermiDomain {
    FermiDomain::from_profiles(length, &Profile::Constant(k), &Profile::Constant(delta), 1025).expect("valid domain")
}

fn pi_p_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        // geometric grid on [1.05, 100]
        let p = 1.05 * (100.0f64 / 1.05).powf(i as f64 / 49.0);
        let closed = pi_p(p).unwrap();
        let quad = pi_p_quadrature(p).unwrap();
        worst = worst.max((closed - quad).abs() / closed);
    }
    check(worst <= 1e-8, format!("max relative error {worst:.2e} over 50 exponents"))
}

fn comparison_curve() -> Outcome {
    let grid = uniform_x_grid(500);
    let mut min_gap = f64::INFINITY;
    let mut consistent = true;
    for &p in &grid {
        let row = comparison_row(p).unwrap();
        min_gap = min_gap.min(row.b_minus_r);
        consistent &= (row.b_minus_r > 0.0) == (2.0 * p.powf(1.0 / p) < pi_p(p).unwrap());
    }
    check(
        min_gap > 0.0 && consistent,
        format!("min b - r = {min_gap:.3e} on 500 points, agrees with 2p^(1/p) < pi_p: {consistent}"),
    )
}

fn rectangle() -> Outcome {
    let d = domain(PI, 0.0, 0.4);
    let mesh = build_mesh(&d, 256, 16).unwrap();
    let mu = solve_mu1(&mesh, 2.0, Mode::Full).unwrap().mu;
    let bound = lower_bound_constant_width(&d, 2.0).unwrap();
    let cert = certify_odd(&d).unwrap();
    let ok = (mu - 1.0).abs() <= 1e-3
        && bound.value == 1.0
        && bound.applicable
        && cert.certified
        && (cert.threshold - 1.5625).abs() <= 1e-12;
    check(
        ok,
        format!(
            "mu1 = {mu:.6}, bound = {} (applicable {}), threshold = {}, certified = {}",
            bound.value, bound.applicable, cert.threshold, cert.certified
        ),
    )
}

/// Exponent and weight.
type WeightCase = (f64, fn(f64) -> f64);

fn one_dim() -> Outcome {
    let mut worst_exact: f64 = 0.0;
    for p in [1.5, 2.0, 3.0] {
        for length in [1.0, PI] {
            let problem = OneDimProblem::from_fn(length, p, 1025, |_| 1.0).unwrap();
            let mu = solve_shooting(&problem, 1e-13).unwrap().mu;
            let exact = (pi_p(p).unwrap() / length).powf(p);
            worst_exact = worst_exact.max((mu - exact).abs() / exact);
        }
    }
    let weights: [WeightCase; 5] = [
        (2.0, |s: f64| 1.0 + 0.5 * (PI * (s - 1.0)).cos()),
        (3.0, |s: f64| (-(s - 1.5) * (s - 1.5)).exp()),
        (1.5, |s: f64| 2.0 - (s - 1.0).abs()),
        (2.0, |s: f64| 1.0 + 0.3 * (2.0 * PI * (s - 1.0)).cos()),
        (3.0, |s: f64| 0.5 + (s - 1.0) * (s - 1.0)),
    ];
    let lengths = [2.0, 3.0, 2.0, 2.0, 2.0];
    let mut worst_cross: f64 = 0.0;
    for ((p, w), length) in weights.iter().zip(lengths) {
        let problem = OneDimProblem::from_fn(length, *p, 1025, w).unwrap();
        let shoot = solve_shooting(&problem, 1e-12).unwrap().mu;
        let disc = solve_discretized(&problem, 1024).unwrap().mu;
        worst_cross = worst_cross.max((shoot - disc).abs() / disc);
    }
    check(
        worst_exact <= 1e-6 && worst_cross <= 1e-3,
        format!("constant weight error {worst_exact:.2e}, shooting vs discretized {worst_cross:.2e}"),
    )
}

fn bound_sandwich() -> Outcome {
    let d = domain(PI, -0.5, 0.5);
    let mesh = build_mesh(&d, 256, 32).unwrap();
    let mut ok = true;
    let mut lines = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let lower = lower_bound_constant_width(&d, p).unwrap();
        let upper = test_function_upper_bound(&d, p).unwrap();
        let odd = solve_mu1(&mesh, p, Mode::Odd).unwrap();
        let full = solve_mu1(&mesh, p, Mode::Full).unwrap();
        let row_ok = lower.applicable && lower.value <= odd.mu && upper >= full.mu && odd.converged && full.converged;
        ok &= row_ok;
        lines.push(format!(
            "p={p}: {:.4} <= {:.5} (odd), {:.5} (full) <= {:.5}",
            lower.value, odd.mu, full.mu, upper
        ));
    }
    check(ok, lines.join("; "))
}

fn lyapunov_dominance() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20_240_601);
    let mut violations = 0;
    for _ in 0..10 {
        let length = rng.random_range(0.5..4.0);
        let p = rng.random_range(1.2..5.0);
        let a: Vec<f64> = (0..3).map(|_| rng.random_range(-0.3..0.3)).collect();
        let w = |s: f64| {
            let x = (s - 0.5 * length) / length;
            1.0 + a.iter().enumerate().map(|(j, c)| c * (2.0 * PI * (j + 1) as f64 * x).cos()).sum::<f64>()
        };
        let problem = OneDimProblem::from_fn(length, p, 1025, w).unwrap();
        let lower = lyapunov_bound(&problem.weight, p).unwrap();
        let mu = solve_shooting(&problem, 1e-12).unwrap().mu;
        if lower > mu {
            violations += 1;
        }
    }
    let mut worst_eq: f64 = 0.0;
    for (length, p) in [(1.0, 2.0), (PI, 1.5), (2.0, 3.0)] {
        let w = fermi_spectra::sampling::UniformSamples::from_fn(length, 1025, |_| 1.0);
        let v = lyapunov_bound(&w, p).unwrap();
        let exact = p * (2.0 / length).powf(p);
        worst_eq = worst_eq.max((v - exact).abs());
    }
    check(
        violations == 0 && worst_eq <= 1e-9,
        format!("{violations} violations in 10 random weights, constant-weight deviation {worst_eq:.2e}"),
    )
}

fn thin_limit(sweep: &SweepResult) -> Outcome {
    let rel: Vec<f64> = sweep.points.iter().filter_map(|p| p.rel_error).collect();
    let all_solved = rel.len() == sweep.points.len();
    let decreasing = rel.windows(2).all(|w| w[1] < w[0]);
    let final_ok = rel.last().is_some_and(|r| *r <= 0.05);
    let upper_ok = sweep
        .points
        .iter()
        .all(|p| matches!((p.upper_bound, p.mu), (Some(u), Some(m)) if u >= m));
    check(
        all_solved && decreasing && final_ok && upper_ok,
        format!(
            "mu* = {:.8}, rel errors {:?}, upper bounds hold: {upper_ok}",
            sweep.mu_star,
            rel.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn proof_constants() -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    for i in 1..=100 {
        for j in 1..=100 {
            let kp = 2.0 * i as f64 / 100.0;
            let delta = 2.0 * j as f64 / 100.0;
            let c = proof_constants_at(0.0, kp, delta).unwrap();
            checked += 1;
            if c.b1_sq.unwrap() > c.b1_sq_closed.unwrap() * (1.0 + 1e-12) {
                violations += 1;
            }
            let kn = -1.5 * i as f64 / 100.0;
            // 1 + δk > 0
            let delta = (j as f64 / 101.0) / -kn;
            let c = proof_constants_at(0.0, kn, delta).unwrap();
            checked += 1;
            if c.b2_sq.unwrap() > c.b2_sq_closed.unwrap() * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    check(violations == 0, format!("{violations} violations in {checked} grid points"))
}

fn scaling_law() -> Outcome {
    let k = Profile::function(|s: f64| -0.4 - 0.05 * (s - 0.5 * PI).powi(2));
    let base = FermiDomain::from_profiles(PI, &k, &Profile::Constant(0.5), 513).unwrap();
    let (ns, nt) = (64, 8);
    let mut worst_mu: f64 = 0.0;
    let mut worst_threshold: f64 = 0.0;
    let t0 = odd_mode_threshold(&base).unwrap().value;
    let mesh0 = build_mesh(&base, ns, nt).unwrap();
    let mu0: Vec<f64> = [2.0, 3.0]
        .iter()
        .map(|&p| solve_mu1(&mesh0, p, Mode::Full).unwrap().mu)
        .collect();
    for c in [0.5, 2.0] {
        let d = base.dilated(c).unwrap();
        let t = odd_mode_threshold(&d).unwrap().value;
        worst_threshold = worst_threshold.max((t - t0 / (c * c)).abs() / t);
        let mesh = build_mesh(&d, ns, nt).unwrap();
        for (i, p) in [2.0, 3.0].into_iter().enumerate() {
            let mu = solve_mu1(&mesh, p, Mode::Full).unwrap().mu;
            let expected = mu0[i] * c.powf(-p);
            worst_mu = worst_mu.max((mu - expected).abs() / expected);
        }
    }
    check(
        worst_mu <= 1e-3 && worst_threshold <= 1e-12,
        format!("eigenvalue scaling error {worst_mu:.2e}, threshold scaling error {worst_threshold:.2e}"),
    )
}

fn certificate_flip(template: &FermiDomain, epsilons: &[f64]) -> Outcome {
    let mut flags = Vec::new();
    let mut scaled = Vec::new();
    for &eps in epsilons {
        let d = template.with_width_scale(eps).unwrap();
        let cert = certify_odd(&d).unwrap();
        flags.push(cert.certified);
        scaled.push(cert.threshold * eps * eps);
    }
    // certified from some tested ε on down
    let first = flags.iter().position(|&c| c);
    let tail_certified = first.is_some_and(|i| flags[i..].iter().all(|&c| c));
    let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
    check(
        tail_certified && hi <= 2.0 * lo,
        format!("certified {flags:?}, threshold * eps^2 in [{lo:.4}, {hi:.4}]"),
    )
}

type Criterion<'a> = (&'static str, Duration, Box<dyn FnMut() -> Outcome + 'a>);

fn main() -> ExitCode {
    let epsilons = [0.4, 0.2, 0.1, 0.05];
    let tube = domain(PI, -0.5, 1.0);

    let criteria: Vec<Criterion> = vec![
        ("generalized pi: closed form vs quadrature", Duration::from_secs(1), Box::new(pi_p_consistency)),
        ("comparison curve b - r > 0", Duration::from_secs(1), Box::new(comparison_curve)),
        ("rectangle exactness and sharpness", Duration::from_secs(30), Box::new(rectangle)),
        ("1-D constant weight and cross-check", Duration::from_secs(10), Box::new(one_dim)),
        ("bound sandwich on curved domain", Duration::from_secs(300), Box::new(bound_sandwich)),
        ("Lyapunov dominance", Duration::from_secs(10), Box::new(lyapunov_dominance)),
        (
            "thin-domain convergence",
            Duration::from_secs(300),
            Box::new(|| thin_limit(&epsilon_sweep(&tube, 2.0, &epsilons, &MeshPolicy::default()).unwrap())),
        ),
        ("radial constants below closed forms", Duration::from_secs(5), Box::new(proof_constants)),
        ("dilation scaling", Duration::from_secs(120), Box::new(scaling_law)),
        (
            "certificate flip for thin tubes",
            Duration::from_secs(60),
            Box::new(|| certificate_flip(&tube, &epsilons)),
        ),
    ];

    let mut failures = 0;
    for (i, (name, budget, mut run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let passed = outcome.passed && in_time;
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} [{:.2}s / {}s] {}",
            i + 1,
            if passed { "PASS" } else { "FAIL" },
            name,
            elapsed.as_secs_f64(),
            budget.as_secs(),
            outcome.detail
        );
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
