//! First nonzero eigenvalue of `−(w |u′|^{p−2} u′)′ = μ w |u|^{p−2} u` on
//! `(0, L)` with Neumann ends, for weights even about `L/2`.
//!
//! [`solve_shooting`] integrates the half-interval initial value problem and
//! bisects on `μ`; [`solve_discretized`] minimizes the Rayleigh quotient over
//! continuous piecewise-linear functions and serves as an independent check.

use serde::{Deserialize, Serialize};

use crate::analysis::{check_weight, lyapunov_bound};
use crate::error::{check_exponent, Error, Result};
use crate::fem::{QuadPoint, QuadratureModel};
use crate::geometry::FermiDomain;
use crate::linalg::{smallest_eigenpair, EigenOptions};
use crate::pquotient::{minimize_p_quotient, PQuotientOptions};
use crate::quadrature::gauss_legendre;
use crate::sampling::UniformSamples;

/// Default number of integration steps on `[0, L/2]`.
pub const DEFAULT_SHOOTING_STEPS: usize = 8192;
/// Minimum number of integration steps on `[0, L/2]`.
pub const MIN_SHOOTING_STEPS: usize = 4096;
/// Floor on `|z|` inside `|z|^{q−2} z` for `q < 2`.
const PHI_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OneDimProblem {
    pub p: f64,
    /// Positive weight on `[0, L]`, even about `L/2`.
    pub weight: UniformSamples,
}

impl OneDimProblem {
    pub fn new(p: f64, weight: UniformSamples) -> Result<Self> {
        check_exponent(p)?;
        check_weight(&weight)?;
        Ok(OneDimProblem { p, weight })
    }

    pub fn from_fn(length: f64, p: f64, n_samples: usize, w: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(p, UniformSamples::from_fn(length, n_samples, w))
    }

    /// The thin-domain limit problem of a Fermi domain: weight `δ(s)`.
    pub fn thin_limit(domain: &FermiDomain, p: f64) -> Result<Self> {
        Self::new(p, domain.width.delta.clone())
    }

    pub fn length(&self) -> f64 {
        self.weight.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Shooting,
    Discretized,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenResult {
    pub mu: f64,
    /// Eigenfunction normalized by `u(0) = 1`.
    pub u: UniformSamples,
    /// `u′` on the same grid.
    pub du: UniformSamples,
    /// Shooting: `|u(L/2)|`. Discretized: eigen residual (`p = 2`) or the
    /// relative preconditioned gradient norm.
    pub residual: f64,
    pub method: SolveMethod,
    pub iterations: usize,
    /// Next discrete eigenvalue (`p = 2` discretization only).
    pub second_mu: Option<f64>,
}

impl EigenResult {
    /// Number of sign changes of the sampled eigenfunction, ignoring values
    /// below `1e−9 · max|u|`.
    pub fn sign_changes(&self) -> usize {
        let floor = 1e-9 * self.u.max_abs();
        let mut last = 0.0;
        let mut changes = 0;
        for &v in &self.u.values {
            if v.abs() <= floor {
                continue;
            }
            if last != 0.0 && v.signum() != last {
                changes += 1;
            }
            last = v.signum();
        }
        changes
    }

    /// `max |u(s) + u(L − s)| / max |u|`.
    pub fn oddness_residual(&self) -> f64 {
        self.u.oddness_residual() / self.u.max_abs()
    }
}

fn phi(z: f64, exponent: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    z.abs().max(PHI_FLOOR).powf(exponent - 2.0) * z
}

struct Shooter<'a> {
    problem: &'a OneDimProblem,
    q: f64,
    steps: usize,
    h: f64,
}

struct Trajectory {
    u: Vec<f64>,
    du: Vec<f64>,
}

impl<'a> Shooter<'a> {
    fn new(problem: &'a OneDimProblem, steps: usize) -> Self {
        let q = problem.p / (problem.p - 1.0);
        Shooter {
            problem,
            q,
            steps,
            h: 0.5 * problem.length() / steps as f64,
        }
    }

    fn rhs(&self, s: f64, u: f64, v: f64, mu: f64) -> (f64, f64) {
        let w = self.problem.weight.eval(s);
        (phi(v / w, self.q), -mu * w * phi(u, self.problem.p))
    }

    /// Integrates from `u(0) = 1, v(0) = 0`. With `record` the full trajectory
    /// is kept; otherwise integration stops at the first `u ≤ 0`.
    /// Returns whether `u` reached zero on `(0, L/2]`, and `u(L/2)`.
    fn run(&self, mu: f64, record: Option<&mut Trajectory>) -> Result<(bool, f64)> {
        let (mut u, mut v) = (1.0, 0.0);
        let h = self.h;
        let mut rec = record;
        if let Some(t) = rec.as_deref_mut() {
            t.u.push(u);
            t.du.push(self.rhs(0.0, u, v, mu).0);
        }
        for i in 0..self.steps {
            let s = i as f64 * h;
            let (k1u, k1v) = self.rhs(s, u, v, mu);
            let (k2u, k2v) = self.rhs(s + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, mu);
            let (k3u, k3v) = self.rhs(s + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, mu);
            let (k4u, k4v) = self.rhs(s + h, u + h * k3u, v + h * k3v, mu);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if !u.is_finite() || !v.is_finite() {
                return Err(Error::StiffFailure { s: s + h, mu });
            }
            match rec.as_deref_mut() {
                Some(t) => {
                    t.u.push(u);
                    t.du.push(self.rhs(s + h, u, v, mu).0);
                }
                None if u <= 0.0 => return Ok((true, u)),
                None => {}
            }
        }
        Ok((u <= 0.0, u))
    }
}

fn shooting_steps(weight: &UniformSamples, minimum: usize) -> usize {
    let cells = weight.len() - 1;
    if cells.is_multiple_of(2) {
        // step nodes land on the sample nodes, where the interpolant has kinks
        let half = cells / 2;
        half * minimum.div_ceil(half)
    } else {
        minimum
    }
}

/// Shooting on `[0, L/2]` with bisection on `μ` to relative tolerance `tol`.
pub fn solve_shooting(problem: &OneDimProblem, tol: f64) -> Result<EigenResult> {
    solve_shooting_with_steps(problem, tol, DEFAULT_SHOOTING_STEPS)
}

pub fn solve_shooting_with_steps(problem: &OneDimProblem, tol: f64, steps: usize) -> Result<EigenResult> {
    let steps = shooting_steps(&problem.weight, steps.max(MIN_SHOOTING_STEPS));
    let shooter = Shooter::new(problem, steps);
    let seed = lyapunov_bound(&problem.weight, problem.p)?;
    let cap = seed * 1e8;

    let mut lo = 0.0;
    let mut hi = seed;
    let mut iterations = 0;
    loop {
        iterations += 1;
        if shooter.run(hi, None)?.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > cap {
            return Err(Error::NoCrossing { cap });
        }
    }
    while hi - lo > tol * hi {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if shooter.run(mid, None)?.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mu = 0.5 * (lo + hi);

    let mut traj = Trajectory {
        u: Vec::with_capacity(steps + 1),
        du: Vec::with_capacity(steps + 1),
    };
    let (_, u_mid) = shooter.run(mu, Some(&mut traj))?;
    let total = 2 * steps + 1;
    let mut u = vec![0.0; total];
    let mut du = vec![0.0; total];
    for i in 0..=steps {
        u[i] = traj.u[i];
        du[i] = traj.du[i];
        u[total - 1 - i] = -traj.u[i];
        du[total - 1 - i] = traj.du[i];
    }
    u[steps] = 0.0;
    let length = problem.length();
    Ok(EigenResult {
        mu,
        u: UniformSamples::new(length, u),
        du: UniformSamples::new(length, du),
        residual: u_mid.abs(),
        method: SolveMethod::Shooting,
        iterations,
        second_mu: None,
    })
}

/// Continuous piecewise-linear model on `n` equal cells, three Gauss points per cell.
pub(crate) fn interval_model(weight: &UniformSamples, n: usize) -> QuadratureModel<2, 1> {
    let length = weight.length;
    let h = length / n as f64;
    let (x, gw) = gauss_legendre(3);
    let mut points = Vec::with_capacity(3 * n);
    for e in 0..n {
        let a = e as f64 * h;
        for (xi, wi) in x.iter().zip(&gw) {
            let t = 0.5 * (xi + 1.0);
            let s = a + t * h;
            points.push(QuadPoint {
                dofs: [Some(e), Some(e + 1)],
                phi: [1.0 - t, t],
                grad: [[-1.0 / h], [1.0 / h]],
                metric: [[1.0]],
                weight: 0.5 * h * wi * weight.eval(s),
            });
        }
    }
    QuadratureModel {
        n_dofs: n + 1,
        bandwidth: 1,
        points,
        contains_constants: true,
    }
}

/// Rayleigh-quotient minimization over piecewise-linear functions on `n` cells.
pub fn solve_discretized(problem: &OneDimProblem, n: usize) -> Result<EigenResult> {
    solve_discretized_with(problem, n, &PQuotientOptions::default())
}

pub fn solve_discretized_with(problem: &OneDimProblem, n: usize, opts: &PQuotientOptions) -> Result<EigenResult> {
    if n < 32 {
        return Err(Error::InvalidGrid(format!("need at least 32 cells, got {n}")));
    }
    let model = interval_model(&problem.weight, n);
    let (k, m) = model.assemble_linear();
    let ones = vec![1.0; model.n_dofs];
    let seed = lyapunov_bound(&problem.weight, 2.0)?;
    let pair = smallest_eigenpair(
        &k,
        &m,
        Some(&ones),
        &EigenOptions {
            shift: -0.5 * seed,
            ..Default::default()
        },
    )?;

    let (mu, vector, residual, iterations, second) = if problem.p == 2.0 {
        let second = pair.ritz_values.get(1).copied();
        (pair.value, pair.vector, pair.residual, pair.iterations, second)
    } else {
        let tau = pair.ritz_values.get(1).copied().unwrap_or(pair.value);
        let pre = k.plus_scaled(tau, &m).cholesky()?;
        let res = minimize_p_quotient(&model, problem.p, &pair.vector, &pre, opts);
        if !res.converged {
            return Err(Error::NonConvergence {
                iterations: res.iterations,
                best: res.value,
            });
        }
        (res.value, res.vector, res.gradient_norm, res.iterations, None)
    };

    let scale = 1.0 / vector[0];
    let u = UniformSamples::new(problem.length(), vector.iter().map(|v| v * scale).collect());
    let du = u.derivative();
    Ok(EigenResult {
        mu,
        u,
        du,
        residual,
        method: SolveMethod::Discretized,
        iterations,
        second_mu: second,
    })
}
