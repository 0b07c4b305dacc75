//! Quadrature-point representation of a conforming discretization.
//!
//! Both the 1-D weighted problem and the 2-D Fermi-rectangle problem reduce to
//! the same data: at every quadrature point, the shape functions, their
//! parameter-space gradients, a metric `G` and a weight `ω`, so that
//!
//! ```text
//! E(u) = Σ_q ω_q (∇u_qᵀ G_q ∇u_q)^{p/2},   N(u) = Σ_q ω_q |u_q − c|^p.
//! ```

use crate::linalg::BandMatrix;

#[derive(Debug, Clone)]
pub struct QuadPoint<const K: usize, const D: usize> {
    /// Degree of freedom of each local shape function; `None` = held at zero.
    pub dofs: [Option<usize>; K],
    pub phi: [f64; K],
    pub grad: [[f64; D]; K],
    pub metric: [[f64; D]; D],
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct QuadratureModel<const K: usize, const D: usize> {
    pub n_dofs: usize,
    pub bandwidth: usize,
    pub points: Vec<QuadPoint<K, D>>,
    /// Whether constants belong to the space (pure Neumann). When they do the
    /// p-mass is measured after the optimal shift `c`.
    pub contains_constants: bool,
}

impl<const K: usize, const D: usize> QuadratureModel<K, D> {
    pub fn value_at(&self, q: &QuadPoint<K, D>, u: &[f64]) -> f64 {
        q.dofs
            .iter()
            .zip(&q.phi)
            .map(|(d, phi)| d.map_or(0.0, |i| phi * u[i]))
            .sum()
    }

    fn gradient_at(&self, q: &QuadPoint<K, D>, u: &[f64]) -> [f64; D] {
        let mut g = [0.0; D];
        for (d, grad) in q.dofs.iter().zip(&q.grad) {
            if let Some(i) = d {
                for c in 0..D {
                    g[c] += grad[c] * u[*i];
                }
            }
        }
        g
    }

    fn metric_apply(q: &QuadPoint<K, D>, g: &[f64; D]) -> [f64; D] {
        let mut out = [0.0; D];
        for (r, row) in q.metric.iter().enumerate() {
            out[r] = row.iter().zip(g).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Stiffness (`p = 2` energy) and mass matrices.
    pub fn assemble_linear(&self) -> (BandMatrix, BandMatrix) {
        let mut k = BandMatrix::zeros(self.n_dofs, self.bandwidth);
        let mut m = BandMatrix::zeros(self.n_dofs, self.bandwidth);
        for q in &self.points {
            let gg: Vec<[f64; D]> = q.grad.iter().map(|g| Self::metric_apply(q, g)).collect();
            for a in 0..K {
                let Some(ia) = q.dofs[a] else { continue };
                for b in 0..K {
                    let Some(ib) = q.dofs[b] else { continue };
                    if ib > ia {
                        continue;
                    }
                    let kab: f64 = gg[a].iter().zip(&q.grad[b]).map(|(x, y)| x * y).sum();
                    k.add(ia, ib, q.weight * kab);
                    m.add(ia, ib, q.weight * q.phi[a] * q.phi[b]);
                }
            }
        }
        (k, m)
    }

    /// `E(u)`, adding `∇E` into `grad` when given.
    pub fn energy(&self, u: &[f64], p: f64, mut grad: Option<&mut [f64]>) -> f64 {
        let mut total = 0.0;
        for q in &self.points {
            let g = self.gradient_at(q, u);
            let gg = Self::metric_apply(q, &g);
            let quad: f64 = g.iter().zip(&gg).map(|(a, b)| a * b).sum();
            if quad <= 0.0 {
                continue;
            }
            total += q.weight * quad.powf(0.5 * p);
            if let Some(out) = grad.as_deref_mut() {
                let coef = q.weight * p * quad.powf(0.5 * p - 1.0);
                for (d, gr) in q.dofs.iter().zip(&q.grad) {
                    if let Some(i) = d {
                        let v: f64 = gg.iter().zip(gr).map(|(a, b)| a * b).sum();
                        out[*i] += coef * v;
                    }
                }
            }
        }
        total
    }

    /// The shift `c` with `Σ ω |u_q − c|^{p−2}(u_q − c) = 0`.
    pub fn p_mean(&self, u: &[f64], p: f64) -> f64 {
        let vals: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|q| (self.value_at(q, u), q.weight))
            .collect();
        p_mean_of(&vals, p)
    }

    /// `N(u) = Σ ω |u_q − c|^p` with `c` the p-mean (or 0 without constants),
    /// adding `∇N` into `grad` when given. Returns `(N, c)`.
    pub fn p_mass(&self, u: &[f64], p: f64, mut grad: Option<&mut [f64]>) -> (f64, f64) {
        let c = if self.contains_constants {
            self.p_mean(u, p)
        } else {
            0.0
        };
        let mut total = 0.0;
        for q in &self.points {
            let v = self.value_at(q, u) - c;
            let a = v.abs();
            if a == 0.0 {
                continue;
            }
            total += q.weight * a.powf(p);
            if let Some(out) = grad.as_deref_mut() {
                let coef = q.weight * p * a.powf(p - 2.0) * v;
                for (d, phi) in q.dofs.iter().zip(&q.phi) {
                    if let Some(i) = d {
                        out[*i] += coef * phi;
                    }
                }
            }
        }
        (total, c)
    }

    /// Discrete p-Rayleigh quotient `E(u) / N(u)`.
    pub fn quotient(&self, u: &[f64], p: f64) -> f64 {
        self.energy(u, p, None) / self.p_mass(u, p, None).0
    }

    /// `∫ u^{p-1}`-type constraint residual `Σ ω |u_q|^{p−2} u_q`.
    pub fn p_moment(&self, u: &[f64], p: f64) -> f64 {
        self.points
            .iter()
            .map(|q| {
                let v = self.value_at(q, u);
                q.weight * v.abs().powf(p - 1.0) * v.signum()
            })
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|q| q.weight).sum()
    }
}

/// Solve `Σ w |v − c|^{p−2}(v − c) = 0` for `c` over weighted values `(v, w)`.
///
/// The sum is decreasing in `c`; Newton steps are taken inside a shrinking
/// bisection bracket and rejected in favour of bisection when they leave it.
pub fn p_mean_of(vals: &[(f64, f64)], p: f64) -> f64 {
    let eval = |c: f64| -> (f64, f64) {
        let mut f = 0.0;
        let mut df = 0.0;
        for (v, w) in vals {
            let d = v - c;
            let a = d.abs();
            if a == 0.0 {
                continue;
            }
            let pw = a.powf(p - 2.0);
            f += w * pw * d;
            df += w * pw;
        }
        (f, -(p - 1.0) * df)
    };
    let mut lo = vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let mut hi = vals.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    if !(lo < hi) {
        return lo;
    }
    let total: f64 = vals.iter().map(|v| v.1).sum();
    let mut c = (vals.iter().map(|(v, w)| v * w).sum::<f64>() / total).clamp(lo, hi);
    for _ in 0..200 {
        let (f, df) = eval(c);
        if f == 0.0 {
            return c;
        }
        if f > 0.0 {
            lo = c;
        } else {
            hi = c;
        }
        let newton = c - f / df;
        let next = if df < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - c).abs() <= 4.0 * f64::EPSILON * (lo.abs() + hi.abs()) || next <= lo || next >= hi {
            return next.clamp(lo, hi);
        }
        c = next;
    }
    c
}
