//! First nonzero Neumann eigenvalue on the Fermi rectangle.
//!
//! The coordinate rectangle `0 < s < L, 0 < r < δ(s)` is mapped to
//! `(s, t) ∈ [0, L] × [0, 1]` by `r = t δ(s)`. In these variables the Dirichlet
//! energy density is
//!
//! ```text
//! ((φ_s − a φ_t)² / J² + φ_t² / δ²) · J δ,   a = t δ′/δ,   J = 1 + t δ k,
//! ```
//!
//! and the mass density is `φ² J δ`. Bilinear elements on a tensor grid with a
//! 2×2 Gauss rule per cell turn both into a [`QuadratureModel`].

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};
use crate::fem::{QuadPoint, QuadratureModel};
use crate::geometry::FermiDomain;
use crate::linalg::{smallest_eigenpair, EigenOptions};
use crate::pquotient::{minimize_p_quotient, PQuotientOptions};

pub const DEFAULT_NS: usize = 256;
pub const DEFAULT_NT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// All functions with zero p-mean.
    Full,
    /// Functions odd about `s = L/2`, computed on the half mesh with a zero
    /// condition on the symmetry line.
    Odd,
}

#[derive(Debug, Clone)]
pub struct FermiMesh {
    pub ns: usize,
    pub nt: usize,
    pub length: f64,
    /// Quadrature data of the full mesh, four points per cell in cell order
    /// `i · nt + j`.
    pub model: QuadratureModel<4, 2>,
    /// Smallest `J δ` over the quadrature points.
    pub min_area_factor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeshSummary {
    pub ns: usize,
    pub nt: usize,
    pub length: f64,
}

impl FermiMesh {
    /// Node numbering `i (nt + 1) + j` for `s_i = i L / ns`, `t_j = j / nt`.
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        i * (self.nt + 1) + j
    }

    pub fn node_count(&self) -> usize {
        (self.ns + 1) * (self.nt + 1)
    }

    /// Parameter coordinates `(s, t)` of node `(i, j)`.
    pub fn node(&self, i: usize, j: usize) -> (f64, f64) {
        (self.length * i as f64 / self.ns as f64, j as f64 / self.nt as f64)
    }

    pub fn summary(&self) -> MeshSummary {
        MeshSummary {
            ns: self.ns,
            nt: self.nt,
            length: self.length,
        }
    }

    /// `Σ ω = ∫∫ (1 + r k) dr ds`.
    pub fn total_mass(&self) -> f64 {
        self.model.total_weight()
    }

    /// Model restricted to `s ≤ L/2` with nodes on `s = L/2` held at zero.
    pub fn half_model(&self) -> QuadratureModel<4, 2> {
        let half = self.ns / 2;
        let n_free = half * (self.nt + 1);
        let per_half = 4 * half * self.nt;
        let points = self.model.points[..per_half]
            .iter()
            .map(|q| {
                let mut q = q.clone();
                for d in q.dofs.iter_mut() {
                    if matches!(d, Some(i) if *i >= n_free) {
                        *d = None;
                    }
                }
                q
            })
            .collect();
        QuadratureModel {
            n_dofs: n_free,
            bandwidth: self.model.bandwidth,
            points,
            contains_constants: false,
        }
    }

    pub fn model_for(&self, mode: Mode) -> QuadratureModel<4, 2> {
        match mode {
            Mode::Full => self.model.clone(),
            Mode::Odd => self.half_model(),
        }
    }
}

/// Tensor mesh with `ns × nt` bilinear cells; `ns` must be even so the
/// symmetry line is a grid line.
pub fn build_mesh(domain: &FermiDomain, ns: usize, nt: usize) -> Result<FermiMesh> {
    domain.require_valid()?;
    if ns < 8 || nt < 1 || !ns.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!("need even ns >= 8 and nt >= 1, got {ns} x {nt}")));
    }
    let length = domain.length();
    let hs = length / ns as f64;
    let ht = 1.0 / nt as f64;
    let g = 0.5 / 3f64.sqrt();
    let gauss = [0.5 - g, 0.5 + g];
    let mut points = Vec::with_capacity(4 * ns * nt);
    let mut min_area_factor = f64::INFINITY;

    for i in 0..ns {
        for &xs in &gauss {
            let s = (i as f64 + xs) * hs;
            let delta = domain.width_at(s);
            let slope = domain.width.slope_at(s);
            let k = domain.curvature_at(s);
            for j in 0..nt {
                for &xt in &gauss {
                    let t = (j as f64 + xt) * ht;
                    let jac = 1.0 + t * delta * k;
                    let area = jac * delta;
                    min_area_factor = min_area_factor.min(area);
                    if !(area > 0.0) {
                        return Err(Error::DegenerateCell { cell: i * nt + j, det: area });
                    }
                    let a = t * slope / delta;
                    let inv_j2 = 1.0 / (jac * jac);
                    let metric = [
                        [inv_j2, -a * inv_j2],
                        [-a * inv_j2, a * a * inv_j2 + 1.0 / (delta * delta)],
                    ];
                    let n00 = i * (nt + 1) + j;
                    let n01 = n00 + 1;
                    let n10 = n00 + nt + 1;
                    let n11 = n10 + 1;
                    points.push((
                        i * nt + j,
                        QuadPoint {
                            dofs: [Some(n00), Some(n01), Some(n10), Some(n11)],
                            phi: [(1.0 - xs) * (1.0 - xt), (1.0 - xs) * xt, xs * (1.0 - xt), xs * xt],
                            grad: [
                                [-(1.0 - xt) / hs, -(1.0 - xs) / ht],
                                [-xt / hs, (1.0 - xs) / ht],
                                [(1.0 - xt) / hs, -xs / ht],
                                [xt / hs, xs / ht],
                            ],
                            metric,
                            weight: 0.25 * hs * ht * area,
                        },
                    ));
                }
            }
        }
    }
    // cell order, stable within each cell
    points.sort_by_key(|(cell, _)| *cell);
    let points = points.into_iter().map(|(_, q)| q).collect();
    Ok(FermiMesh {
        ns,
        nt,
        length,
        model: QuadratureModel {
            n_dofs: (ns + 1) * (nt + 1),
            bandwidth: nt + 2,
            points,
            contains_constants: true,
        },
        min_area_factor,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Eigen2DResult {
    pub mu: f64,
    pub p: f64,
    pub mode: Mode,
    pub dofs: usize,
    /// Eigen residual (`p = 2` linear solve) or relative preconditioned gradient norm.
    pub residual: f64,
    pub mesh: MeshSummary,
    pub iterations: usize,
    pub converged: bool,
    /// Next Ritz value of the linear problem, when available.
    pub second_mu: Option<f64>,
    /// Nodal values in the numbering of the mode's model.
    #[serde(skip)]
    pub vector: Vec<f64>,
}

fn default_shift(mesh: &FermiMesh) -> f64 {
    -0.5 * (std::f64::consts::PI / mesh.length).powi(2)
}

fn linear_solve(mesh: &FermiMesh, mode: Mode) -> Result<(Eigen2DResult, QuadratureModel<4, 2>)> {
    let model = mesh.model_for(mode);
    let (k, m) = model.assemble_linear();
    let ones = vec![1.0; model.n_dofs];
    let deflate = (mode == Mode::Full).then_some(ones.as_slice());
    let opts = EigenOptions {
        shift: default_shift(mesh),
        ..Default::default()
    };
    let pair = smallest_eigenpair(&k, &m, deflate, &opts)?;
    Ok((
        Eigen2DResult {
            mu: pair.value,
            p: 2.0,
            mode,
            dofs: model.n_dofs,
            residual: pair.residual,
            mesh: mesh.summary(),
            iterations: pair.iterations,
            converged: true,
            second_mu: pair.ritz_values.get(1).copied(),
            vector: pair.vector,
        },
        model,
    ))
}

/// Smallest nonzero eigenvalue of the `p = 2` problem on the full mesh.
pub fn solve_mu1_linear(mesh: &FermiMesh) -> Result<Eigen2DResult> {
    Ok(linear_solve(mesh, Mode::Full)?.0)
}

/// Smallest eigenvalue with an eigenfunction odd about `s = L/2`.
pub fn solve_mu1_odd_linear(mesh: &FermiMesh) -> Result<Eigen2DResult> {
    Ok(linear_solve(mesh, Mode::Odd)?.0)
}

/// Minimum of the discrete p-quotient, started from the `p = 2` eigenfunction.
/// A run that hits the iteration cap is returned with `converged = false`.
pub fn solve_mu1_nonlinear(mesh: &FermiMesh, p: f64, mode: Mode) -> Result<Eigen2DResult> {
    solve_mu1_nonlinear_with(mesh, p, mode, &PQuotientOptions::default())
}

pub fn solve_mu1_nonlinear_with(
    mesh: &FermiMesh,
    p: f64,
    mode: Mode,
    opts: &PQuotientOptions,
) -> Result<Eigen2DResult> {
    check_exponent(p)?;
    let (linear, model) = linear_solve(mesh, mode)?;
    let (k, m) = model.assemble_linear();
    let tau = linear.second_mu.unwrap_or(linear.mu);
    let pre = k.plus_scaled(tau, &m).cholesky()?;
    let res = minimize_p_quotient(&model, p, &linear.vector, &pre, opts);
    Ok(Eigen2DResult {
        mu: res.value,
        p,
        mode,
        dofs: model.n_dofs,
        residual: res.gradient_norm,
        mesh: mesh.summary(),
        iterations: res.iterations,
        converged: res.converged,
        second_mu: None,
        vector: res.vector,
    })
}

/// Linear solver for `p = 2`, nonlinear otherwise.
pub fn solve_mu1(mesh: &FermiMesh, p: f64, mode: Mode) -> Result<Eigen2DResult> {
    if p == 2.0 {
        linear_solve(mesh, mode).map(|r| r.0)
    } else {
        solve_mu1_nonlinear(mesh, p, mode)
    }
}
