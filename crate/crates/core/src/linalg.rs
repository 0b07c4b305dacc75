//! Symmetric banded matrices and a shift-and-invert subspace eigensolver for
//! the generalized problem `K x = μ M x`.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric matrix with half-bandwidth `bw`; only the lower band is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandMatrix {
            n,
            bw,
            data: vec![0.0; n * (bw + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(i - j <= self.bw, "entry ({i}, {j}) outside band {}", self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i.abs_diff(j) > self.bw {
            return 0.0;
        }
        self.data[self.slot(i, j)]
    }

    /// Adds `v` to entry `(i, j)` (and, implicitly, `(j, i)`).
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j);
        self.data[k] += v;
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..n {
            let row = &self.data[i * (bw + 1)..(i + 1) * (bw + 1)];
            let j0 = i.saturating_sub(bw);
            let mut acc = row[bw] * x[i];
            for j in j0..i {
                let a = row[j + bw - i];
                acc += a * x[j];
                y[j] += a * x[i];
            }
            y[i] += acc;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        y
    }

    /// `self + alpha * other`, same shape.
    pub fn plus_scaled(&self, alpha: f64, other: &BandMatrix) -> BandMatrix {
        assert_eq!((self.n, self.bw), (other.n, other.bw));
        BandMatrix {
            n: self.n,
            bw: self.bw,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.apply(x))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// Band Cholesky factorization `A = L Lᵀ`.
    pub fn cholesky(&self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let mut l = self.data.clone();
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                // L[i][j] = (A[i][j] - sum_k L[i][k] L[j][k]) / L[j][j]
                let k0 = j0.max(j.saturating_sub(bw));
                let mut sum = l[i * w + (j + bw - i)];
                for k in k0..j {
                    sum -= l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return Err(Error::SolveFailure { pivot: i, value: sum });
                    }
                    l[i * w + bw] = sum.sqrt();
                } else {
                    l[i * w + (j + bw - i)] = sum / l[j * w + bw];
                }
            }
        }
        Ok(BandCholesky { n, bw, l })
    }
}

#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        for i in 0..n {
            let mut sum = b[i];
            for k in i.saturating_sub(bw)..i {
                sum -= self.l[i * w + (k + bw - i)] * b[k];
            }
            b[i] = sum / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut sum = b[i];
            for k in i + 1..(i + bw + 1).min(n) {
                sum -= self.l[k * w + (i + bw - k)] * b[k];
            }
            b[i] = sum / self.l[i * w + bw];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Shift `σ < 0` so that `K - σ M` is positive definite.
    pub shift: f64,
    pub block: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            shift: -1.0,
            block: 4,
            tol: 1e-10,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// M-normalized eigenvector.
    pub vector: Vec<f64>,
    /// `‖K x − μ M x‖ / (‖K x‖ + |σ| ‖M x‖)`.
    pub residual: f64,
    /// All Ritz values of the final block, ascending.
    pub ritz_values: Vec<f64>,
    pub iterations: usize,
}

/// Smallest eigenpair of `K x = μ M x` on the M-orthogonal complement of `deflate`
/// (if given), by block inverse iteration on `K − σ M` with Rayleigh–Ritz.
pub fn smallest_eigenpair(
    k: &BandMatrix,
    m: &BandMatrix,
    deflate: Option<&[f64]>,
    opts: &EigenOptions,
) -> Result<EigenPair> {
    let n = k.dim();
    let b = opts.block.min(n.saturating_sub(usize::from(deflate.is_some()))).max(1);
    let factor = k.plus_scaled(-opts.shift, m).cholesky()?;

    let defl = deflate.map(|c| {
        let mc = m.apply(c);
        let cmc = dot(c, &mc);
        (c.to_vec(), mc, cmc)
    });
    let project = |v: &mut [f64]| {
        if let Some((c, mc, cmc)) = &defl {
            let a = dot(mc, v) / cmc;
            v.iter_mut().zip(c).for_each(|(x, ci)| *x -= a * ci);
        }
    };

    let mut rng = SplitMix(0x5eed_1234_abcd_0001);
    let mut block: Vec<Vec<f64>> = (0..b)
        .map(|_| (0..n).map(|_| rng.next_f64() - 0.5).collect())
        .collect();

    let mut last = f64::INFINITY;
    let mut ritz = Vec::new();
    for iter in 1..=opts.max_iter {
        for v in block.iter_mut() {
            project(v);
            let mv = m.apply(v);
            *v = factor.solve(&mv);
            project(v);
        }
        m_orthonormalize(&mut block, m)?;
        let kb: Vec<Vec<f64>> = block.iter().map(|v| k.apply(v)).collect();
        let small = DMatrix::from_fn(block.len(), block.len(), |i, j| {
            0.5 * (dot(&block[i], &kb[j]) + dot(&block[j], &kb[i]))
        });
        let eig = SymmetricEigen::new(small);
        let mut order: Vec<usize> = (0..block.len()).collect();
        order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
        ritz = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let rotated: Vec<Vec<f64>> = order
            .iter()
            .map(|&col| {
                let mut out = vec![0.0; n];
                for (r, v) in block.iter().enumerate() {
                    let c = eig.eigenvectors[(r, col)];
                    out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
                }
                out
            })
            .collect();
        block = rotated;

        let value = ritz[0];
        let x = &block[0];
        let kx = k.apply(x);
        let mx = m.apply(x);
        let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - value * b).collect();
        let scale = norm(&kx) + opts.shift.abs() * norm(&mx);
        let residual = norm(&r) / scale.max(f64::MIN_POSITIVE);
        let settled = (value - last).abs() <= opts.tol * value.abs();
        last = value;
        if residual <= opts.tol.sqrt() * 1e-2 && settled {
            return Ok(EigenPair {
                value,
                vector: block.swap_remove(0),
                residual,
                ritz_values: ritz,
                iterations: iter,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        best: ritz.first().copied().unwrap_or(f64::NAN),
    })
}

fn m_orthonormalize(block: &mut [Vec<f64>], m: &BandMatrix) -> Result<()> {
    for i in 0..block.len() {
        for _pass in 0..2 {
            let mv = m.apply(&block[i]);
            for j in 0..i {
                let a = dot(&block[j], &mv);
                let (head, tail) = block.split_at_mut(i);
                tail[0].iter_mut().zip(&head[j]).for_each(|(x, y)| *x -= a * y);
            }
        }
        let nrm = m.quad_form(&block[i]).sqrt();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::SolveFailure { pivot: i, value: nrm });
        }
        block[i].iter_mut().for_each(|x| *x /= nrm);
    }
    Ok(())
}

/// Small deterministic generator for start vectors.
struct SplitMix(u64);

impl SplitMix {
    fn next_f64(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }
}
