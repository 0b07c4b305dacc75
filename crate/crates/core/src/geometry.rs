//! Reference curves, width profiles and the Fermi-coordinate domain
//! `{ γ(s) + r n(s) : 0 < s < L, 0 < r < δ(s) }` with `n = (y', -x')`.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quadrature;
use crate::sampling::UniformSamples;

/// Default number of nodes along `s` (1024 cells).
pub const DEFAULT_SAMPLES: usize = 1025;
pub const DEFAULT_VALIDATION_GRID: (usize, usize) = (1024, 128);
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-9;

pub type Point = [f64; 2];

/// A scalar function of arc length, as the user supplied it.
#[derive(Clone)]
pub enum Profile {
    Constant(f64),
    Expr(Expr),
    /// Equispaced samples over `[0, L]`, linearly interpolated.
    Samples(Vec<f64>),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Profile {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile::Function(Arc::new(f))
    }

    pub fn eval(&self, s: f64, length: f64) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::Expr(e) => e.eval_s(s, length),
            Profile::Samples(v) => UniformSamples::new(length, v.clone()).eval(s),
            Profile::Function(f) => f(s),
        }
    }

    pub fn sample(&self, length: f64, n: usize) -> UniformSamples {
        match self {
            Profile::Samples(v) if v.len() == n => UniformSamples::new(length, v.clone()),
            Profile::Samples(v) => {
                let src = UniformSamples::new(length, v.clone());
                UniformSamples::from_fn(length, n, |s| src.eval(s))
            }
            _ => UniformSamples::from_fn(length, n, |s| self.eval(s, length)),
        }
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(v) => write!(f, "Constant({v})"),
            Profile::Expr(e) => write!(f, "Expr({e})"),
            Profile::Samples(v) => write!(f, "Samples(len={})", v.len()),
            Profile::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// Arc-length parametrized reference curve, sampled on a uniform grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSpec {
    pub length: f64,
    pub curvature: UniformSamples,
    pub points: Vec<Point>,
    pub tangents: Vec<Point>,
    pub symmetry_tol: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct SymmetryResiduals {
    pub curvature: f64,
    pub x: f64,
    pub y: f64,
    pub width: f64,
}

impl CurveSpec {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.curvature.spacing()
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        self.curvature.eval(s)
    }

    fn interp(&self, data: &[Point], s: f64) -> Point {
        let n = data.len();
        let (i, a) = crate::sampling::locate(s, self.spacing(), n);
        if a == 0.0 {
            return data[i];
        }
        [
            data[i][0] * (1.0 - a) + data[i + 1][0] * a,
            data[i][1] * (1.0 - a) + data[i + 1][1] * a,
        ]
    }

    pub fn point_at(&self, s: f64) -> Point {
        self.interp(&self.points, s)
    }

    pub fn tangent_at(&self, s: f64) -> Point {
        self.interp(&self.tangents, s)
    }

    pub fn symmetry_residuals(&self) -> SymmetryResiduals {
        let n = self.points.len();
        let (mut rx, mut ry) = (0.0_f64, 0.0_f64);
        for i in 0..n.div_ceil(2) {
            let (a, b) = (self.points[i], self.points[n - 1 - i]);
            rx = rx.max((a[0] + b[0]).abs());
            ry = ry.max((a[1] - b[1]).abs());
        }
        SymmetryResiduals {
            curvature: self.curvature.evenness_residual(),
            x: rx,
            y: ry,
            width: 0.0,
        }
    }

    fn check_symmetry(&self) -> Result<()> {
        let res = self.symmetry_residuals();
        let kscale = self.curvature.max_abs().max(1.0);
        let pscale = self
            .points
            .iter()
            .fold(1.0_f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
        let tol = self.symmetry_tol;
        if res.curvature > tol * kscale {
            return Err(Error::SymmetryViolation {
                residual: res.curvature / kscale,
                tol,
            });
        }
        let worst = res.x.max(res.y);
        if worst > tol * pscale {
            return Err(Error::SymmetryViolation {
                residual: worst / pscale,
                tol,
            });
        }
        Ok(())
    }

    /// Same curve dilated by `c` (curvature scales by `1/c`).
    pub fn dilated(&self, c: f64) -> CurveSpec {
        CurveSpec {
            length: self.length * c,
            curvature: self.curvature.dilated(c, 1.0 / c),
            points: self.points.iter().map(|p| [p[0] * c, p[1] * c]).collect(),
            tangents: self.tangents.clone(),
            symmetry_tol: self.symmetry_tol,
        }
    }
}

fn check_grid(n: usize) -> Result<()> {
    if n < 5 || n.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "curve grids need an odd node count >= 5 so that s = L/2 is a node, got {n}"
        )));
    }
    Ok(())
}

/// Integrate `θ' = k`, `γ' = (cos θ, sin θ)` from the anchor `γ(L/2) = 0`, `θ(L/2) = 0`.
pub fn reconstruct_from_curvature(length: f64, k: &Profile, n_samples: usize) -> Result<CurveSpec> {
    reconstruct_with_tol(length, k, n_samples, DEFAULT_SYMMETRY_TOL)
}

pub fn reconstruct_with_tol(
    length: f64,
    k: &Profile,
    n_samples: usize,
    symmetry_tol: f64,
) -> Result<CurveSpec> {
    check_grid(n_samples)?;
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidDomain(format!("length must be positive, got {length}")));
    }
    let curvature = k.sample(length, n_samples);
    let resid = curvature.evenness_residual();
    let scale = curvature.max_abs().max(1.0);
    if resid > symmetry_tol * scale {
        return Err(Error::AsymmetricCurvature {
            residual: resid / scale,
            tol: symmetry_tol,
        });
    }

    let h = length / (n_samples - 1) as f64;
    let mid = (n_samples - 1) / 2;
    let mut state = vec![[0.0; 3]; n_samples];
    let kfun = |s: f64| k.eval(s, length);
    let rhs = |s: f64, y: [f64; 3]| [kfun(s), y[0].cos(), y[0].sin()];
    for dir in [1.0_f64, -1.0] {
        let mut y = [0.0; 3];
        let mut i = mid;
        loop {
            let next = if dir > 0.0 {
                if i + 1 >= n_samples {
                    break;
                }
                i + 1
            } else {
                if i == 0 {
                    break;
                }
                i - 1
            };
            let s = i as f64 * h;
            let step = dir * h;
            y = rk4_step(&rhs, s, y, step);
            state[next] = y;
            i = next;
        }
    }
    let points = state.iter().map(|y| [y[1], y[2]]).collect();
    let tangents = state.iter().map(|y| [y[0].cos(), y[0].sin()]).collect();
    let curve = CurveSpec {
        length,
        curvature,
        points,
        tangents,
        symmetry_tol,
    };
    curve.check_symmetry()?;
    Ok(curve)
}

fn rk4_step(f: &impl Fn(f64, [f64; 3]) -> [f64; 3], s: f64, y: [f64; 3], h: f64) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
    let k1 = f(s, y);
    let k2 = f(s + 0.5 * h, add(y, k1, 0.5 * h));
    let k3 = f(s + 0.5 * h, add(y, k2, 0.5 * h));
    let k4 = f(s + h, add(y, k3, h));
    [
        y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Reparametrize `t ↦ (x(t), y(t))` by arc length and sample its curvature.
pub fn curvature_from_parametric(
    x: &Expr,
    y: &Expr,
    t_range: (f64, f64),
    n_samples: usize,
) -> Result<CurveSpec> {
    check_grid(n_samples)?;
    let (t0, t1) = t_range;
    if !(t1 > t0) {
        return Err(Error::InvalidGrid(format!("empty parameter range [{t0}, {t1}]")));
    }
    let (dx, dy) = (x.derivative("t"), y.derivative("t"));
    let (ddx, ddy) = (dx.derivative("t"), dy.derivative("t"));
    let speed = |t: f64| dx.eval_t(t).hypot(dy.eval_t(t));

    // fine parameter table with cumulative arc length
    let m = 4 * (n_samples - 1);
    let dt = (t1 - t0) / m as f64;
    let ts: Vec<f64> = (0..=m).map(|j| if j == m { t1 } else { t0 + j as f64 * dt }).collect();
    for &t in &ts {
        let v = speed(t);
        if !(v >= 1e-12) {
            return Err(Error::ZeroSpeed { t, speed: v });
        }
    }
    let mut cumulative = vec![0.0; m + 1];
    for j in 0..m {
        cumulative[j + 1] = cumulative[j] + quadrature::adaptive(speed, ts[j], ts[j + 1], 1e-14);
    }
    let length = cumulative[m];

    let h = length / (n_samples - 1) as f64;
    let mut params = Vec::with_capacity(n_samples);
    let mut j = 0;
    for i in 0..n_samples {
        let target = if i + 1 == n_samples { length } else { i as f64 * h };
        while j + 1 < m && cumulative[j + 1] < target {
            j += 1;
        }
        // Newton on S(t) = target, safeguarded to [ts[j], ts[j+1]]
        let (lo, hi) = (ts[j], ts[j + 1]);
        let mut t = lo + (target - cumulative[j]) / speed(lo).max(1e-300);
        t = t.clamp(lo, hi);
        for _ in 0..30 {
            let s_t = cumulative[j] + quadrature::adaptive(speed, lo, t, 1e-14);
            let step = (s_t - target) / speed(t);
            t = (t - step).clamp(lo, hi);
            if step.abs() < 1e-15 * (1.0 + t.abs()) {
                break;
            }
        }
        params.push(t);
    }
    params[0] = t0;
    params[n_samples - 1] = t1;

    let mut curvature = Vec::with_capacity(n_samples);
    let mut points = Vec::with_capacity(n_samples);
    let mut tangents = Vec::with_capacity(n_samples);
    for &t in &params {
        let (xp, yp) = (dx.eval_t(t), dy.eval_t(t));
        let (xpp, ypp) = (ddx.eval_t(t), ddy.eval_t(t));
        let v = xp.hypot(yp);
        if !(v >= 1e-12) {
            return Err(Error::ZeroSpeed { t, speed: v });
        }
        curvature.push((xp * ypp - yp * xpp) / (v * v * v));
        points.push([x.eval_t(t), y.eval_t(t)]);
        tangents.push([xp / v, yp / v]);
    }
    let curve = CurveSpec {
        length,
        curvature: UniformSamples::new(length, curvature),
        points,
        tangents,
        symmetry_tol: DEFAULT_SYMMETRY_TOL.max(1e-8),
    };
    curve.check_symmetry()?;
    Ok(curve)
}

/// Width `δ(s) > 0` and its derivative on the curve's grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidthProfile {
    pub delta: UniformSamples,
    pub ddelta: UniformSamples,
    pub evenness_tol: f64,
}

impl WidthProfile {
    pub fn from_samples(delta: UniformSamples, evenness_tol: f64) -> Result<Self> {
        for (i, &v) in delta.values.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::NonpositiveWidth {
                    s: delta.node(i),
                    value: v,
                });
            }
        }
        let resid = delta.evenness_residual();
        let scale = delta.max_abs();
        if resid > evenness_tol * scale {
            return Err(Error::AsymmetricWidth {
                residual: resid / scale,
                tol: evenness_tol,
            });
        }
        let ddelta = delta.derivative();
        Ok(WidthProfile {
            delta,
            ddelta,
            evenness_tol,
        })
    }

    pub fn from_profile(profile: &Profile, length: f64, n_samples: usize) -> Result<Self> {
        Self::from_samples(profile.sample(length, n_samples), DEFAULT_SYMMETRY_TOL)
    }

    pub fn constant(length: f64, n_samples: usize, value: f64) -> Result<Self> {
        Self::from_profile(&Profile::Constant(value), length, n_samples)
    }

    pub fn at(&self, s: f64) -> f64 {
        self.delta.eval(s)
    }

    pub fn slope_at(&self, s: f64) -> f64 {
        self.ddelta.eval(s)
    }

    pub fn scaled(&self, factor: f64) -> WidthProfile {
        WidthProfile {
            delta: self.delta.map(|v| v * factor),
            ddelta: self.ddelta.map(|v| v * factor),
            evenness_tol: self.evenness_tol,
        }
    }

    fn dilated(&self, c: f64) -> WidthProfile {
        WidthProfile {
            delta: self.delta.dilated(c, c),
            ddelta: self.ddelta.dilated(c, 1.0),
            evenness_tol: self.evenness_tol,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub grid: (usize, usize),
    pub jacobian_min: f64,
    /// Location `(s, r)` of the Jacobian minimum.
    pub jacobian_argmin: (f64, f64),
    pub symmetry: SymmetryResiduals,
    pub collisions: usize,
    pub first_collision: Option<[(f64, f64); 2]>,
    pub injectivity_checked: bool,
    pub valid: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FermiDomain {
    pub curve: CurveSpec,
    pub width: WidthProfile,
    pub jacobian_min: f64,
    /// Outer boundary `γ(s) + δ(s) n(s)` at the curve nodes.
    pub offset_curve: Vec<Point>,
    pub valid: bool,
    pub injectivity_checked: bool,
    pub validation: ValidationReport,
}

impl FermiDomain {
    pub fn new(curve: CurveSpec, width: WidthProfile) -> Result<Self> {
        Self::with_validation_grid(curve, width, DEFAULT_VALIDATION_GRID)
    }

    pub fn with_validation_grid(
        curve: CurveSpec,
        width: WidthProfile,
        grid: (usize, usize),
    ) -> Result<Self> {
        if width.delta.len() != curve.len() {
            return Err(Error::InvalidGrid(format!(
                "width has {} samples, curve has {}",
                width.delta.len(),
                curve.len()
            )));
        }
        if (width.delta.length - curve.length).abs() > 1e-12 * curve.length {
            return Err(Error::InvalidGrid("width and curve lengths differ".into()));
        }
        let offset_curve = curve
            .points
            .iter()
            .zip(&curve.tangents)
            .zip(&width.delta.values)
            .map(|((p, t), d)| [p[0] + d * t[1], p[1] - d * t[0]])
            .collect();
        let mut domain = FermiDomain {
            curve,
            width,
            jacobian_min: f64::NAN,
            offset_curve,
            valid: false,
            injectivity_checked: false,
            validation: ValidationReport {
                grid,
                jacobian_min: f64::NAN,
                jacobian_argmin: (0.0, 0.0),
                symmetry: SymmetryResiduals::default(),
                collisions: 0,
                first_collision: None,
                injectivity_checked: false,
                valid: false,
            },
        };
        let report = validate_domain(&domain, grid)?;
        domain.apply(report);
        Ok(domain)
    }

    /// Curvature, width and sample count in one go.
    pub fn from_profiles(length: f64, k: &Profile, delta: &Profile, n_samples: usize) -> Result<Self> {
        let curve = reconstruct_from_curvature(length, k, n_samples)?;
        let width = WidthProfile::from_profile(delta, length, n_samples)?;
        Self::new(curve, width)
    }

    fn apply(&mut self, report: ValidationReport) {
        self.jacobian_min = report.jacobian_min;
        self.valid = report.valid;
        self.injectivity_checked = report.injectivity_checked;
        self.validation = report;
    }

    pub fn length(&self) -> f64 {
        self.curve.length
    }

    pub fn samples(&self) -> usize {
        self.curve.len()
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        self.curve.curvature_at(s)
    }

    pub fn width_at(&self, s: f64) -> f64 {
        self.width.at(s)
    }

    pub fn require_valid(&self) -> Result<()> {
        if self.valid {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!(
                "jacobian_min = {:.6e}, collisions = {}",
                self.jacobian_min, self.validation.collisions
            )))
        }
    }

    /// Same reference curve with width `factor · δ(s)`.
    pub fn with_width_scale(&self, factor: f64) -> Result<FermiDomain> {
        FermiDomain::with_validation_grid(
            self.curve.clone(),
            self.width.scaled(factor),
            self.validation.grid,
        )
    }

    /// Uniform dilation by `c`: `L → cL`, `δ → cδ`, `k → k/c`.
    pub fn dilated(&self, c: f64) -> Result<FermiDomain> {
        FermiDomain::with_validation_grid(
            self.curve.dilated(c),
            self.width.dilated(c),
            self.validation.grid,
        )
    }
}

/// Physical point of Fermi coordinates `(s, r)`.
pub fn fermi_map(domain: &FermiDomain, s: f64, r: f64) -> Result<Point> {
    let length = domain.length();
    let tol = 1e-12 * length.max(1.0);
    if s < -tol || s > length + tol || r < -tol || r > domain.width_at(s) + tol {
        return Err(Error::OutOfDomain { s, r });
    }
    Ok(map_unchecked(&domain.curve, s, r))
}

fn map_unchecked(curve: &CurveSpec, s: f64, r: f64) -> Point {
    let p = curve.point_at(s);
    let t = curve.tangent_at(s);
    [p[0] + r * t[1], p[1] - r * t[0]]
}

/// Jacobian minimum, symmetry residuals and a grid-collision injectivity check.
pub fn validate_domain(domain: &FermiDomain, grid: (usize, usize)) -> Result<ValidationReport> {
    let (ns, nr) = grid;
    if ns < 3 || nr < 2 {
        return Err(Error::InvalidGrid(format!("validation grid {ns}x{nr} too small")));
    }
    let length = domain.length();
    let s_at = |i: usize| if i + 1 == ns { length } else { i as f64 * length / (ns - 1) as f64 };

    let mut jacobian_min = f64::INFINITY;
    let mut argmin = (0.0, 0.0);
    let mut pts = Vec::with_capacity(ns * nr);
    for i in 0..ns {
        let s = s_at(i);
        let k = domain.curvature_at(s);
        let d = domain.width_at(s);
        for j in 0..nr {
            let r = d * j as f64 / (nr - 1) as f64;
            let jac = 1.0 + r * k;
            if jac < jacobian_min {
                jacobian_min = jac;
                argmin = (s, r);
            }
            pts.push(map_unchecked(&domain.curve, s, r));
        }
    }

    // Local spacing: distance to the nearest grid neighbour.
    let idx = |i: usize, j: usize| i * nr + j;
    let dist = |a: Point, b: Point| (a[0] - b[0]).hypot(a[1] - b[1]);
    let mut spacing = vec![f64::INFINITY; ns * nr];
    for i in 0..ns {
        for j in 0..nr {
            let p = pts[idx(i, j)];
            let mut h = f64::INFINITY;
            if i > 0 {
                h = h.min(dist(p, pts[idx(i - 1, j)]));
            }
            if i + 1 < ns {
                h = h.min(dist(p, pts[idx(i + 1, j)]));
            }
            if j > 0 {
                h = h.min(dist(p, pts[idx(i, j - 1)]));
            }
            if j + 1 < nr {
                h = h.min(dist(p, pts[idx(i, j + 1)]));
            }
            spacing[idx(i, j)] = h;
        }
    }

    let bucket = spacing
        .iter()
        .copied()
        .filter(|h| h.is_finite() && *h > 0.0)
        .fold(0.0_f64, f64::max)
        * 0.5;
    let mut collisions = 0;
    let mut first_collision = None;
    if bucket > 0.0 {
        let key = |p: Point| ((p[0] / bucket).floor() as i64, (p[1] / bucket).floor() as i64);
        let mut table: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (n, p) in pts.iter().enumerate() {
            table.entry(key(*p)).or_default().push(n);
        }
        for (n, p) in pts.iter().enumerate() {
            let (i, j) = (n / nr, n % nr);
            let (bx, by) = key(*p);
            for ox in -1..=1 {
                for oy in -1..=1 {
                    let Some(cands) = table.get(&(bx + ox, by + oy)) else {
                        continue;
                    };
                    for &m in cands {
                        if m <= n {
                            continue;
                        }
                        let (i2, j2) = (m / nr, m % nr);
                        if i.abs_diff(i2) <= 1 && j.abs_diff(j2) <= 1 {
                            continue;
                        }
                        let threshold = 0.5 * spacing[n].min(spacing[m]);
                        if dist(*p, pts[m]) < threshold {
                            collisions += 1;
                            if first_collision.is_none() {
                                let r_of = |ii: usize, jj: usize| {
                                    domain.width_at(s_at(ii)) * jj as f64 / (nr - 1) as f64
                                };
                                first_collision =
                                    Some([(s_at(i), r_of(i, j)), (s_at(i2), r_of(i2, j2))]);
                            }
                        }
                    }
                }
            }
        }
    }

    let mut symmetry = domain.curve.symmetry_residuals();
    symmetry.width = domain.width.delta.evenness_residual();
    let valid = jacobian_min > 0.0 && collisions == 0;
    Ok(ValidationReport {
        grid,
        jacobian_min,
        jacobian_argmin: argmin,
        symmetry,
        collisions,
        first_collision,
        injectivity_checked: true,
        valid,
    })
}
