//! Thin-domain sweeps: `μ₁(D_ε)` for widths `ε δ(s)` against the weighted
//! interval eigenvalue `μ₁(0, L; δ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{certify_odd, radial_mass, radial_stiffness, Certificate};
use crate::eig1d::{solve_shooting, EigenResult, OneDimProblem};
use crate::eig2d::{build_mesh, solve_mu1, Mode};
use crate::error::{check_exponent, Error, Result};
use crate::geometry::FermiDomain;
use crate::quadrature::gauss_legendre;

/// Mesh sizes as a function of `ε`: `nt` fixed and the cell aspect ratio
/// `h_s / h_r` at most `max_aspect`, with `ns` a power of two in
/// `[min_ns, max_ns]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshPolicy {
    pub nt: usize,
    pub max_aspect: f64,
    pub min_ns: usize,
    pub max_ns: usize,
    /// Also solve on `(ns/2, nt/2)` to estimate the discretization error.
    pub estimate_error: bool,
}

impl Default for MeshPolicy {
    fn default() -> Self {
        MeshPolicy {
            nt: 16,
            max_aspect: 0.125,
            min_ns: 256,
            max_ns: 16_384,
            estimate_error: true,
        }
    }
}

impl MeshPolicy {
    pub fn mesh_for(&self, domain: &FermiDomain) -> (usize, usize) {
        let nt = self.nt.max(16);
        let h_r = domain.width.delta.min() / nt as f64;
        let needed = domain.length() / (self.max_aspect * h_r);
        let mut ns = self.min_ns.max(8).next_power_of_two();
        while (ns as f64) < needed && ns < self.max_ns {
            ns *= 2;
        }
        (ns, nt)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub mu: Option<f64>,
    pub rel_error: Option<f64>,
    /// `|μ_{2h} − μ_h| / 3` from the coarsened mesh.
    pub disc_error: Option<f64>,
    pub ns: usize,
    pub nt: usize,
    pub converged: bool,
    /// Quotient of the interval eigenfunction on `D_ε`.
    pub upper_bound: Option<f64>,
    /// `upper_bound ≥ mu − disc_error`.
    pub upper_bound_holds: Option<bool>,
    /// `p = 2` only.
    pub certificate: Option<Certificate>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub p: f64,
    pub mu_star: f64,
    pub points: Vec<SweepPoint>,
    /// Least-squares slope of `log |μ − μ*|` against `log ε` on the last three
    /// successful points.
    pub fitted_rate: Option<f64>,
    pub policy: MeshPolicy,
}

impl SweepResult {
    pub fn epsilons(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.epsilon).collect()
    }

    pub fn mu_values(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.mu).collect()
    }

    pub fn rel_errors(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.rel_error).collect()
    }
}

/// `∫∫ |u′|^p (1 + rk)^{1−p} / ∫∫ |u|^p (1 + rk)` over `D_ε` for the
/// piecewise-linear interpolant of the interval eigenfunction `u`.
///
/// `u` is odd about `L/2` and the radial weights are even, so `u` has zero
/// p-mean and the quotient bounds `μ₁(D_ε)` from above.
pub fn upper_bound_epsilon(template: &FermiDomain, p: f64, eps: f64, star: &EigenResult) -> Result<f64> {
    check_exponent(p)?;
    let domain = template.with_width_scale(eps)?;
    domain.require_valid()?;
    let u = &star.u;
    let h = u.spacing();
    let (x, w) = gauss_legendre(3);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..u.len() - 1 {
        let a = u.node(i);
        let (ua, ub) = (u.values[i], u.values[i + 1]);
        let slope = ((ub - ua) / h).abs().powf(p);
        for (xi, wi) in x.iter().zip(&w) {
            let t = 0.5 * (xi + 1.0);
            let s = a + t * h;
            let delta = domain.width_at(s);
            let k = domain.curvature_at(s);
            let weight = 0.5 * h * wi;
            num += weight * slope * radial_stiffness(delta, k, p);
            den += weight * (ua + t * (ub - ua)).abs().powf(p) * radial_mass(delta, k);
        }
    }
    Ok(num / den)
}

fn fit_rate(points: &[SweepPoint], mu_star: f64) -> Option<f64> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|pt| pt.mu.map(|mu| (pt.epsilon.ln(), (mu - mu_star).abs().ln())))
        .filter(|(_, y)| y.is_finite())
        .collect();
    if data.len() < 3 {
        return None;
    }
    let tail = &data[data.len() - 3..];
    let n = tail.len() as f64;
    let mx = tail.iter().map(|d| d.0).sum::<f64>() / n;
    let my = tail.iter().map(|d| d.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = tail.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn sweep_point(template: &FermiDomain, p: f64, eps: f64, policy: &MeshPolicy, star: &EigenResult) -> SweepPoint {
    let mut point = SweepPoint {
        epsilon: eps,
        mu: None,
        rel_error: None,
        disc_error: None,
        ns: 0,
        nt: 0,
        converged: false,
        upper_bound: None,
        upper_bound_holds: None,
        certificate: None,
        error: None,
    };
    let run = |point: &mut SweepPoint| -> Result<()> {
        let domain = template.with_width_scale(eps)?;
        domain.require_valid()?;
        let (ns, nt) = policy.mesh_for(&domain);
        point.ns = ns;
        point.nt = nt;
        let fine = solve_mu1(&build_mesh(&domain, ns, nt)?, p, Mode::Full)?;
        point.mu = Some(fine.mu);
        point.converged = fine.converged;
        point.rel_error = Some((fine.mu - star.mu).abs() / star.mu);
        if policy.estimate_error {
            let coarse = solve_mu1(&build_mesh(&domain, ns / 2, (nt / 2).max(1))?, p, Mode::Full)?;
            point.disc_error = Some((coarse.mu - fine.mu).abs() / 3.0);
        }
        let ub = upper_bound_epsilon(template, p, eps, star)?;
        point.upper_bound = Some(ub);
        point.upper_bound_holds = Some(ub >= fine.mu - point.disc_error.unwrap_or(0.0));
        if p == 2.0 {
            point.certificate = Some(certify_odd(&domain)?);
        }
        Ok(())
    };
    if let Err(e) = run(&mut point) {
        point.error = Some(e.to_string());
    }
    point
}

/// `μ₁(D_ε)` for each `ε` (strictly decreasing), against `μ₁(0, L; δ)` from
/// shooting. Failures at individual `ε` are recorded in the point.
pub fn epsilon_sweep(template: &FermiDomain, p: f64, epsilons: &[f64], policy: &MeshPolicy) -> Result<SweepResult> {
    check_exponent(p)?;
    if epsilons.is_empty() || epsilons.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidGrid("epsilons must be positive and nonempty".into()));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidGrid("epsilons must be strictly decreasing".into()));
    }
    let star = solve_shooting(&OneDimProblem::thin_limit(template, p)?, 1e-12)?;
    let points: Vec<SweepPoint> = epsilons
        .par_iter()
        .map(|&eps| sweep_point(template, p, eps, policy, &star))
        .collect();
    let fitted_rate = fit_rate(&points, star.mu);
    Ok(SweepResult {
        p,
        mu_star: star.mu,
        points,
        fitted_rate,
        policy: policy.clone(),
    })
}
