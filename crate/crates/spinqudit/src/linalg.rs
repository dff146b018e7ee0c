//! Small dense linear-algebra helpers on top of nalgebra.

use crate::{CMatrix, CVector, Complex64};
use nalgebra::{DVector, SymmetricEigen};
use std::f64::consts::PI;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

pub fn zeros(n: usize) -> CMatrix {
    CMatrix::zeros(n, n)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> CMatrix {
    CMatrix::from_fn(entries.len(), entries.len(), |i, j| {
        if i == j {
            c(entries[i], 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

/// Symmetrizes away rounding noise before an eigendecomposition.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eigh(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(h));
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// `exp(-i 2 pi H t)` for Hermitian `H` in Hz.
pub fn propagator(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let phases: Vec<Complex64> = vals.iter().map(|&l| cis(-2.0 * PI * l * t)).collect();
    &vecs * diag(&phases) * vecs.adjoint()
}

/// `exp(i x A)` for Hermitian `A` and real `x`.
pub fn expi_hermitian(a: &CMatrix, x: f64) -> CMatrix {
    let (vals, vecs) = eigh(a);
    let phases: Vec<Complex64> = vals.iter().map(|&l| cis(x * l)).collect();
    &vecs * diag(&phases) * vecs.adjoint()
}

pub fn expect(op: &CMatrix, psi: &CVector) -> f64 {
    psi.dotc(&(op * psi)).re
}

pub fn expect_rho(op: &CMatrix, rho: &CMatrix) -> f64 {
    (op * rho).trace().re
}

pub fn overlap(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

pub fn outer(a: &CVector, b: &CVector) -> CMatrix {
    a * b.adjoint()
}

pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let (vals, _) = eigh(&(a - b));
    0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
}

/// Positive square root of a positive semidefinite Hermitian matrix.
pub fn sqrtm_psd(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = eigh(m);
    let s: Vec<Complex64> = vals.iter().map(|&l| c(l.max(0.0).sqrt(), 0.0)).collect();
    &vecs * diag(&s) * vecs.adjoint()
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2`.
pub fn uhlmann_fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
    let sa = sqrtm_psd(a);
    let inner = &sa * b * &sa;
    let (vals, _) = eigh(&inner);
    let t: f64 = vals.iter().map(|&l| l.max(0.0).sqrt()).sum();
    t * t
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn eigenvalues(h: &CMatrix) -> DVector<f64> {
    DVector::from_vec(eigh(h).0)
}
