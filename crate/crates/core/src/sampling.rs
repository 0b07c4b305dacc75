//! Functions sampled on a uniform grid of `[0, L]`.

use serde::{Deserialize, Serialize};

/// Values at `n` equispaced nodes `s_i = i L / (n - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformSamples {
    pub length: f64,
    pub values: Vec<f64>,
}

impl UniformSamples {
    pub fn new(length: f64, values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= 2);
        UniformSamples { length, values }
    }

    pub fn from_fn(length: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = length / (n - 1) as f64;
        let values = (0..n).map(|i| f(node(i, n, h, length))).collect();
        UniformSamples { length, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.values.len() - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        node(i, self.values.len(), self.spacing(), self.length)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.node(i))
    }

    /// Piecewise-linear interpolation, clamped to `[0, L]`.
    pub fn eval(&self, s: f64) -> f64 {
        let (i, frac) = locate(s, self.spacing(), self.values.len());
        if frac == 0.0 {
            return self.values[i];
        }
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Centered differences inside, second-order one-sided differences at the ends.
    pub fn derivative(&self) -> UniformSamples {
        let n = self.values.len();
        let h = self.spacing();
        let v = &self.values;
        let mut d = vec![0.0; n];
        if n == 2 {
            let slope = (v[1] - v[0]) / h;
            d.fill(slope);
        } else {
            for i in 1..n - 1 {
                d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
            }
            d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
            d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        }
        UniformSamples::new(self.length, d)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `max_i |f(s_i) - f(L - s_i)|`.
    pub fn evenness_residual(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2)
            .map(|i| (self.values[i] - self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    /// `max_i |f(s_i) + f(L - s_i)|`.
    pub fn oddness_residual(&self) -> f64 {
        let n = self.values.len();
        (0..n.div_ceil(2))
            .map(|i| (self.values[i] + self.values[n - 1 - i]).abs())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> UniformSamples {
        UniformSamples::new(self.length, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Same function on the dilated interval `[0, c L]` with values multiplied by `scale`.
    pub fn dilated(&self, c: f64, scale: f64) -> UniformSamples {
        UniformSamples::new(
            self.length * c,
            self.values.iter().map(|v| v * scale).collect(),
        )
    }
}

/// Cell index and fractional offset of `s` on a grid of `n` nodes with spacing `h`.
/// Positions within 1e-9 cells of a node snap to it.
pub(crate) fn locate(s: f64, h: f64, n: usize) -> (usize, f64) {
    let x = (s / h).clamp(0.0, (n - 1) as f64);
    let nearest = x.round();
    if (x - nearest).abs() < 1e-9 {
        let i = nearest as usize;
        return if i == n - 1 { (n - 2, 1.0) } else { (i, 0.0) };
    }
    let i = (x.floor() as usize).min(n - 2);
    (i, x - i as f64)
}

fn node(i: usize, n: usize, h: f64, length: f64) -> f64 {
    if i + 1 == n {
        length
    } else {
        i as f64 * h
    }
}
