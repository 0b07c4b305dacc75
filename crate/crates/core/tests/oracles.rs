//! Comparisons against discretizations built independently of the Fermi-coordinate code.

use fermi_spectra::eig2d::{build_mesh, solve_mu1_linear, solve_mu1_odd_linear};
use fermi_spectra::geometry::{FermiDomain, Profile};
use nalgebra::{DMatrix, SymmetricEigen};

/// P1 stiffness and mass on a uniform grid of `n` cells of width `h`.
fn p1_matrices(n: usize, h: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut k = DMatrix::zeros(n + 1, n + 1);
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for e in 0..n {
        for (a, b, kv, mv) in [(0, 0, 1.0, 2.0), (1, 1, 1.0, 2.0), (0, 1, -1.0, 1.0), (1, 0, -1.0, 1.0)] {
            k[(e + a, e + b)] += kv / h;
            m[(e + a, e + b)] += mv * h / 6.0;
        }
    }
    (k, m)
}

#[test]
fn rectangle_assembly_matches_tensor_product() {
    let (length, delta, ns, nt) = (2.5, 0.4, 12, 8);
    let domain = FermiDomain::from_profiles(length, &Profile::Constant(0.0), &Profile::Constant(delta), 257).unwrap();
    let mesh = build_mesh(&domain, ns, nt).unwrap();
    let (k, m) = mesh.model.assemble_linear();
    let (k, m) = (k.to_dense(), m.to_dense());

    let (ks, ms) = p1_matrices(ns, length / ns as f64);
    let (kt, mt) = p1_matrices(nt, delta / nt as f64);
    // node i (nt + 1) + j, i along s
    let k_ref = ks.kronecker(&mt) + ms.kronecker(&kt);
    let m_ref = ms.kronecker(&mt);
    let scale = k_ref.amax();
    assert!((&k - &k_ref).amax() <= 1e-12 * scale, "{}", (&k - &k_ref).amax());
    assert!((&m - &m_ref).amax() <= 1e-12 * m_ref.amax());
}

/// Smallest eigenvalue of `−(ρR′)′ + (ν²/ρ)R = μρR` on `[a, b]` with Neumann ends,
/// P1 elements with 3-point Gauss, dense generalized solve via Cholesky.
fn radial_eigenvalue(a: f64, b: f64, nu: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let gauss = [
        (-(0.6f64).sqrt(), 5.0 / 9.0),
        (0.0, 8.0 / 9.0),
        ((0.6f64).sqrt(), 5.0 / 9.0),
    ];
    let mut k: DMatrix<f64> = DMatrix::zeros(n + 1, n + 1);
    let mut m: DMatrix<f64> = DMatrix::zeros(n + 1, n + 1);
    for e in 0..n {
        for (x, w) in gauss {
            let t = 0.5 * (x + 1.0);
            let rho = a + (e as f64 + t) * h;
            let wq = 0.5 * h * w;
            let phi = [1.0 - t, t];
            let dphi = [-1.0 / h, 1.0 / h];
            for i in 0..2 {
                for j in 0..2 {
                    k[(e + i, e + j)] += wq * (rho * dphi[i] * dphi[j] + nu * nu / rho * phi[i] * phi[j]);
                    m[(e + i, e + j)] += wq * rho * phi[i] * phi[j];
                }
            }
        }
    }
    let l = m.cholesky().expect("mass is positive definite").l();
    let l_inv = l.clone().try_inverse().unwrap();
    let a_mat = &l_inv * k * l_inv.transpose();
    let sym = (&a_mat + a_mat.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}

#[test]
fn annular_sector_matches_radial_oracle() {
    // radius-2 arc of angle π/2, width 0.5 toward the centre: the sector
    // 1.5 < ρ < 2, |θ| < π/4, whose first mode is R(ρ) sin(2θ)
    let domain = FermiDomain::from_profiles(
        std::f64::consts::PI,
        &Profile::Constant(-0.5),
        &Profile::Constant(0.5),
        1025,
    )
    .unwrap();
    let exact = radial_eigenvalue(1.5, 2.0, 2.0, 400);
    let refined = radial_eigenvalue(1.5, 2.0, 2.0, 800);
    assert!((exact - refined).abs() < 1e-6 * exact, "radial oracle not converged");

    let mut errors = Vec::new();
    for (ns, nt) in [(64, 8), (128, 16), (256, 32)] {
        let mesh = build_mesh(&domain, ns, nt).unwrap();
        let full = solve_mu1_linear(&mesh).unwrap();
        let odd = solve_mu1_odd_linear(&mesh).unwrap();
        assert!((full.mu - odd.mu).abs() < 1e-8 * full.mu, "first mode should be odd");
        errors.push((full.mu - refined).abs() / refined);
    }
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    // second-order convergence: halving h cuts the error by about 4
    assert!(errors[1] / errors[2] > 3.0, "{errors:?}");
    assert!(errors[2] < 1e-4, "{errors:?}");
}
