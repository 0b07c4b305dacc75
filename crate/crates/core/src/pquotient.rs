//! Minimization of the discrete p-Rayleigh quotient `F(u) = E(u) / N(u)`.
//!
//! The iteration is a preconditioned L-BFGS descent with Armijo backtracking.
//! After every step `u` is shifted by its p-mean (when constants are in the
//! space) and rescaled to `N(u) = 1`; both operations leave `F` unchanged.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::fem::QuadratureModel;
use crate::linalg::{dot, BandCholesky};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PQuotientOptions {
    pub max_iter: usize,
    /// Stop when `F` decreased by less than `rel_tol · F` over `window` iterations.
    pub window: usize,
    pub rel_tol: f64,
    /// Number of stored L-BFGS correction pairs.
    pub memory: usize,
}

impl Default for PQuotientOptions {
    fn default() -> Self {
        PQuotientOptions {
            max_iter: 20_000,
            window: 50,
            rel_tol: 1e-10,
            memory: 12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Relative decrease over the window fell below tolerance.
    Stalled,
    /// No descent step could be found along the preconditioned gradient.
    LineSearch,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct PQuotientResult {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    /// Preconditioned gradient norm `sqrt(gᵀ P⁻¹ g) / F` at the last iterate.
    pub gradient_norm: f64,
}

struct Evaluator<'a, const K: usize, const D: usize> {
    model: &'a QuadratureModel<K, D>,
    p: f64,
}

impl<const K: usize, const D: usize> Evaluator<'_, K, D> {
    /// Normalizes `u` in place and returns `E(u)`, which equals `F(u)` since `N(u) = 1`.
    fn normalize(&self, u: &mut [f64]) -> f64 {
        let (n, c) = self.model.p_mass(u, self.p, None);
        let scale = n.powf(-1.0 / self.p);
        u.iter_mut().for_each(|x| *x = (*x - c) * scale);
        self.model.energy(u, self.p, None)
    }

    fn value_and_gradient(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let mut ge = vec![0.0; u.len()];
        let mut gn = vec![0.0; u.len()];
        let e = self.model.energy(u, self.p, Some(&mut ge));
        let (n, _) = self.model.p_mass(u, self.p, Some(&mut gn));
        let f = e / n;
        let g = ge.iter().zip(&gn).map(|(a, b)| (a - f * b) / n).collect();
        (f, g)
    }

    fn value(&self, u: &[f64]) -> f64 {
        self.model.quotient(u, self.p)
    }
}

/// Minimizes the discrete p-quotient of `model` starting from `init`.
///
/// `precond` factors a symmetric positive definite matrix (typically `K + τ M`
/// of the same model) used as the initial inverse Hessian.
pub fn minimize_p_quotient<const K: usize, const D: usize>(
    model: &QuadratureModel<K, D>,
    p: f64,
    init: &[f64],
    precond: &BandCholesky,
    opts: &PQuotientOptions,
) -> PQuotientResult {
    let eval = Evaluator { model, p };
    let mut u = init.to_vec();
    eval.normalize(&mut u);
    let (mut f, mut g) = eval.value_and_gradient(&u);
    let mut history: VecDeque<f64> = VecDeque::with_capacity(opts.window + 1);
    history.push_back(f);
    let mut pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut stop = StopReason::MaxIterations;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let mut d = two_loop(&g, &pairs, precond);
        d.iter_mut().for_each(|x| *x = -*x);
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            pairs.clear();
            d = precond.solve(&g);
            d.iter_mut().for_each(|x| *x = -*x);
            slope = dot(&g, &d);
        }

        let step = armijo(&eval, &u, f, &d, slope).or_else(|| {
            if pairs.is_empty() {
                return None;
            }
            pairs.clear();
            d = precond.solve(&g);
            d.iter_mut().for_each(|x| *x = -*x);
            slope = dot(&g, &d);
            armijo(&eval, &u, f, &d, slope)
        });
        let Some(mut next) = step else {
            stop = StopReason::LineSearch;
            break;
        };

        eval.normalize(&mut next);
        let (f_next, g_next) = eval.value_and_gradient(&next);
        let s: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if pairs.len() == opts.memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, sy));
        }
        u = next;
        f = f_next;
        g = g_next;

        history.push_back(f);
        if history.len() > opts.window + 1 {
            history.pop_front();
        }
        if history.len() == opts.window + 1 && history[0] - f <= opts.rel_tol * f {
            stop = StopReason::Stalled;
            break;
        }
    }

    let pg = precond.solve(&g);
    PQuotientResult {
        value: f,
        gradient_norm: dot(&g, &pg).max(0.0).sqrt() / f.abs().max(f64::MIN_POSITIVE),
        vector: u,
        iterations,
        converged: stop != StopReason::MaxIterations,
        stop,
    }
}

fn two_loop(g: &[f64], pairs: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, precond: &BandCholesky) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y, sy) in pairs.iter().rev() {
        let a = dot(s, &q) / sy;
        q.iter_mut().zip(y).for_each(|(x, yi)| *x -= a * yi);
        alphas.push(a);
    }
    let mut r = precond.solve(&q);
    if let Some((_, y, sy)) = pairs.back() {
        let hy = precond.solve(y);
        let gamma = sy / dot(y, &hy);
        r.iter_mut().for_each(|x| *x *= gamma);
    }
    for ((s, y, sy), a) in pairs.iter().zip(alphas.iter().rev()) {
        let b = dot(y, &r) / sy;
        r.iter_mut().zip(s).for_each(|(x, si)| *x += (a - b) * si);
    }
    r
}

fn armijo<const K: usize, const D: usize>(
    eval: &Evaluator<'_, K, D>,
    u: &[f64],
    f: f64,
    d: &[f64],
    slope: f64,
) -> Option<Vec<f64>> {
    if !(slope < 0.0) {
        return None;
    }
    let mut alpha = 1.0;
    for _ in 0..60 {
        let trial: Vec<f64> = u.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
        let ft = eval.value(&trial);
        if ft.is_finite() && ft <= f + 1e-4 * alpha * slope && ft < f {
            return Some(trial);
        }
        alpha *= 0.5;
    }
    None
}
