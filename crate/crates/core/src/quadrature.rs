//! One-dimensional quadrature and scalar maximization.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss rule: `panels` equal panels, `order`-point rule on each.
#[derive(Debug, Clone)]
pub struct CompositeGauss {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    panels: usize,
}

impl CompositeGauss {
    pub fn new(order: usize, panels: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        CompositeGauss {
            nodes,
            weights,
            panels,
        }
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = (b - a) / self.panels as f64;
        let mut total = 0.0;
        for j in 0..self.panels {
            let mid = a + (j as f64 + 0.5) * h;
            let mut panel = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                panel += w * f(mid + 0.5 * h * x);
            }
            total += 0.5 * h * panel;
        }
        total
    }
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss 7-point weights for the odd-indexed Kronrod nodes (1, 3, 5) and the center.
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15(a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = KRONROD_WEIGHTS[7] * fc;
    let mut g = GAUSS7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * KRONROD_NODES[i];
        let pair = f(c - x) + f(c + x);
        k += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            g += GAUSS7_WEIGHTS[i / 2] * pair;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) with bisection until the error estimate
/// is below `tol * max(1, |I|)`.
pub fn adaptive(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &mut impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        whole: (f64, f64),
        tol: f64,
        depth: usize,
    ) -> f64 {
        let (value, err) = whole;
        if err <= tol || depth == 0 {
            return value;
        }
        let m = 0.5 * (a + b);
        let left = kronrod15(a, m, f);
        let right = kronrod15(m, b, f);
        recurse(f, a, m, left, 0.5 * tol, depth - 1) + recurse(f, m, b, right, 0.5 * tol, depth - 1)
    }
    let whole = kronrod15(a, b, &mut f);
    let abs_tol = tol * whole.0.abs().max(1.0);
    recurse(&mut f, a, b, whole, abs_tol, 40)
}

/// Tanh–sinh quadrature on `[a, b]`; tolerates integrable endpoint singularities.
///
/// The integrand receives the abscissa and its distance to the nearer endpoint,
/// so singular factors like `(b - x)^-a` can be evaluated without cancellation.
pub fn tanh_sinh(mut f: impl FnMut(f64, f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let half = 0.5 * (b - a);
    let t_max = 6.5;
    // x(t) = a + (b - a) / (1 + exp(-pi sinh t)); the complement 1 - u is computed directly.
    let mut eval = |t: f64| -> f64 {
        let q = PI * t.sinh();
        let (u, v) = if q >= 0.0 {
            let e = (-q).exp();
            (1.0 / (1.0 + e), e / (1.0 + e))
        } else {
            let e = q.exp();
            (e / (1.0 + e), 1.0 / (1.0 + e))
        };
        let w = 2.0 * half * PI * t.cosh() * u * v;
        if w == 0.0 || u == 0.0 || v == 0.0 {
            return 0.0;
        }
        let (x, dist) = if u <= v {
            (a + 2.0 * half * u, 2.0 * half * u)
        } else {
            (b - 2.0 * half * v, 2.0 * half * v)
        };
        let fx = f(x, dist);
        if fx.is_finite() {
            w * fx
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t) + eval(-t);
        k += 1;
    }
    let mut estimate = sum * h;
    for _level in 0..12 {
        h *= 0.5;
        // add the new odd-indexed points
        let mut k = 1;
        while (k as f64) * h <= t_max {
            let t = k as f64 * h;
            sum += eval(t) + eval(-t);
            k += 2;
        }
        let next = sum * h;
        let done = (next - estimate).abs() <= tol * next.abs().max(f64::MIN_POSITIVE);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
/// Returns `(argmax, max)`; the endpoints are compared as well.
pub fn golden_max(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol * (1.0 + a.abs().max(b.abs())) {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    let mut best = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 10] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 {
                2.0 / deg as f64
            } else {
                0.0
            };
            assert!((approx - exact).abs() < 1e-13, "n={n}: {approx} vs {exact}");
        }
    }

    #[test]
    fn composite_and_adaptive_agree_on_smooth_integrand() {
        let f = |x: f64| (-x).exp() * x.sin();
        // closed form of int_0^3 e^-x sin x dx
        let closed = 0.5 * (1.0 - (-3.0f64).exp() * (3.0f64.sin() + 3.0f64.cos()));
        let cg = CompositeGauss::new(10, 16).integrate(0.0, 3.0, f);
        let ad = adaptive(f, 0.0, 3.0, 1e-13);
        assert!((cg - closed).abs() < 1e-14);
        assert!((ad - closed).abs() < 1e-13);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularities() {
        // int_0^1 x^-0.9 dx = 10
        let v = tanh_sinh(|x, _| x.powf(-0.9), 0.0, 1.0, 1e-12);
        assert!((v - 10.0).abs() < 1e-9, "{v}");
        // int_0^1 (1 - x)^-0.5 dx = 2, using the endpoint distance
        let v = tanh_sinh(|x, d| if x > 0.5 { d.powf(-0.5) } else { (1.0 - x).powf(-0.5) }, 0.0, 1.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn golden_section_finds_interior_and_endpoint_maxima() {
        let (x, v) = golden_max(|r| (1.0 - r) * r, 0.0, 1.0, 1e-12);
        assert!((x - 0.5).abs() < 1e-6 && (v - 0.25).abs() < 1e-12);
        let (x, _) = golden_max(|r| r, 0.0, 2.0, 1e-12);
        assert_eq!(x, 2.0);
    }
}
