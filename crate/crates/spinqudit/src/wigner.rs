//! Spin Wigner function built from orthonormal irreducible tensor operators.
//!
//! `T_kq` has elements `<m|T_kq|m'> = (-1)^(I-m) sqrt(2k+1) (I k I; -m q m')`,
//! so `Tr(T_kq^dag T_k'q') = delta delta` and `T_00 = 1/sqrt(d)`. The function
//! is `W(theta, phi) = sqrt(2/pi) sum_kq Y_kq(theta, phi) rho_kq` with
//! `rho_kq = Tr(rho T_kq^dag)`, which integrates to `sqrt(8/d) Tr rho`.

use crate::linalg::{c, gauss_legendre};
use crate::spincore::{DensityMatrix, SpinQuantum};
use crate::{CMatrix, Complex64, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

fn factorial(n: i64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Wigner 3j symbol with every argument given as twice its value.
pub fn three_j(tj1: i64, tj2: i64, tj3: i64, tm1: i64, tm2: i64, tm3: i64) -> f64 {
    if tm1 + tm2 + tm3 != 0 {
        return 0.0;
    }
    let parity_ok = |j: i64, m: i64| m.abs() <= j && (j + m) % 2 == 0;
    if !parity_ok(tj1, tm1) || !parity_ok(tj2, tm2) || !parity_ok(tj3, tm3) {
        return 0.0;
    }
    if tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() || (tj1 + tj2 + tj3) % 2 != 0 {
        return 0.0;
    }
    // all of these are integers once halved
    let a = (tj1 + tj2 - tj3) / 2;
    let b = (tj1 - tj2 + tj3) / 2;
    let cc = (-tj1 + tj2 + tj3) / 2;
    let big = (tj1 + tj2 + tj3) / 2 + 1;
    let tri = factorial(a) * factorial(b) * factorial(cc) / factorial(big);
    let pre = (tri
        * factorial((tj1 + tm1) / 2)
        * factorial((tj1 - tm1) / 2)
        * factorial((tj2 + tm2) / 2)
        * factorial((tj2 - tm2) / 2)
        * factorial((tj3 + tm3) / 2)
        * factorial((tj3 - tm3) / 2))
        .sqrt();
    let k1 = (tj2 - tj3 - tm1) / 2;
    let k2 = (tj1 - tj3 + tm2) / 2;
    let kmin = 0.max(k1).max(k2);
    let kmax = a.min((tj1 - tm1) / 2).min((tj2 + tm2) / 2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let den = factorial(k)
            * factorial(a - k)
            * factorial((tj1 - tm1) / 2 - k)
            * factorial((tj2 + tm2) / 2 - k)
            * factorial(k - k1)
            * factorial(k - k2);
        sum += if k % 2 == 0 { 1.0 } else { -1.0 } / den;
    }
    let phase_exp = (tj1 - tj2 - tm3) / 2;
    let sign = if phase_exp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * pre * sum
}

/// Orthonormal tensor operators `T_kq`, `k = 0..=2I`, `q = -k..=k`.
#[derive(Clone, Debug)]
pub struct SphericalTensorBasis {
    pub q: SpinQuantum,
    /// `ops[k][q + k]`.
    pub ops: Vec<Vec<CMatrix>>,
}

impl SphericalTensorBasis {
    pub fn new(q: SpinQuantum) -> Self {
        let d = q.dim();
        let ti = q.two_i() as i64;
        let ops = (0..=ti)
            .map(|k| {
                (-k..=k)
                    .map(|qq| {
                        CMatrix::from_fn(d, d, |a, b| {
                            let (ma, mb) = (q.two_m(a) as i64, q.two_m(b) as i64);
                            let sign = if ((ti - ma) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                            let v = sign
                                * ((2 * k + 1) as f64).sqrt()
                                * three_j(ti, 2 * k, ti, -ma, 2 * qq, mb);
                            c(v, 0.0)
                        })
                    })
                    .collect()
            })
            .collect();
        Self { q, ops }
    }

    pub fn get(&self, k: usize, qq: i64) -> &CMatrix {
        &self.ops[k][(qq + k as i64) as usize]
    }
}

/// `rho_kq = Tr(rho T_kq^dag)`, laid out as `coeffs[k][q + k]`.
pub fn tensor_decompose(rho: &DensityMatrix, basis: &SphericalTensorBasis) -> Vec<Vec<Complex64>> {
    basis
        .ops
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| {
                    // Tr(rho T^dag) = sum_ab rho_ab conj(T_ab)
                    rho.elements.iter().zip(t.iter()).map(|(r, x)| r * x.conj()).sum()
                })
                .collect()
        })
        .collect()
}

/// `sum_kq rho_kq T_kq`.
pub fn tensor_reconstruct(coeffs: &[Vec<Complex64>], basis: &SphericalTensorBasis) -> CMatrix {
    let d = basis.q.dim();
    let mut out = CMatrix::zeros(d, d);
    for (row, ops) in coeffs.iter().zip(&basis.ops) {
        for (z, t) in row.iter().zip(ops) {
            out += t * *z;
        }
    }
    out
}

/// Orthonormal spherical harmonics (Condon-Shortley phase) for all
/// `l <= lmax` at one point, laid out as `out[l][m + l]`.
pub fn spherical_harmonics(lmax: usize, theta: f64, phi: f64) -> Vec<Vec<Complex64>> {
    let x = theta.cos();
    let s = theta.sin();
    // normalised associated Legendre pbar[l][m], m >= 0
    let mut p = vec![vec![0.0; lmax + 1]; lmax + 1];
    p[0][0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=lmax {
        p[m][m] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s * p[m - 1][m - 1];
    }
    for m in 0..lmax {
        p[m + 1][m] = ((2 * m + 3) as f64).sqrt() * x * p[m][m];
    }
    for m in 0..=lmax {
        for l in m + 2..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[l][m] = a * (x * p[l - 1][m] - b * p[l - 2][m]);
        }
    }
    (0..=lmax)
        .map(|l| {
            (-(l as i64)..=l as i64)
                .map(|m| {
                    let ma = m.unsigned_abs() as usize;
                    let pos = Complex64::from_polar(p[l][ma], ma as f64 * phi);
                    if m >= 0 {
                        pos
                    } else if ma.is_multiple_of(2) {
                        pos.conj()
                    } else {
                        -pos.conj()
                    }
                })
                .collect()
        })
        .collect()
}

fn wigner_from_coeffs(coeffs: &[Vec<Complex64>], theta: f64, phi: f64) -> Complex64 {
    let y = spherical_harmonics(coeffs.len() - 1, theta, phi);
    let mut w = c(0.0, 0.0);
    for (yr, cr) in y.iter().zip(coeffs) {
        for (a, b) in yr.iter().zip(cr) {
            w += a * b;
        }
    }
    w * (2.0 / PI).sqrt()
}

/// Imaginary residue allowed before [`wigner_value`] refuses a result.
pub const IMAG_RESIDUE_LIMIT: f64 = 1e-10;

/// Precomputed decomposition for repeated evaluation.
#[derive(Clone, Debug)]
pub struct WignerFunction {
    pub coeffs: Vec<Vec<Complex64>>,
}

impl WignerFunction {
    pub fn new(rho: &DensityMatrix) -> Self {
        let basis = SphericalTensorBasis::new(rho.q);
        Self { coeffs: tensor_decompose(rho, &basis) }
    }

    pub fn value(&self, theta: f64, phi: f64) -> Result<f64> {
        let w = wigner_from_coeffs(&self.coeffs, theta, phi);
        if w.im.abs() > IMAG_RESIDUE_LIMIT {
            return Err(Error::Numerical(format!("Wigner value has imaginary part {}", w.im)));
        }
        Ok(w.re)
    }
}

pub fn wigner_value(rho: &DensityMatrix, theta: f64, phi: f64) -> Result<f64> {
    if !theta.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidArgument("angles must be finite".into()));
    }
    WignerFunction::new(rho).value(theta, phi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    #[default]
    None,
    Hammer,
    Polar,
}

/// Planar coordinates of a point on the sphere.
///
/// Hammer uses latitude `pi/2 - theta` and longitude `phi` wrapped to
/// `[-pi, pi]`, spanning `|x| <= 2 sqrt 2`, `|y| <= sqrt 2`. Polar views the
/// sphere from the south pole: radius `(pi - theta) / pi`, so the south pole
/// is the centre and the north pole the unit circle; seen from below the
/// azimuth runs clockwise.
pub fn project(projection: Projection, theta: f64, phi: f64) -> (f64, f64) {
    match projection {
        Projection::None => (phi, theta),
        Projection::Hammer => {
            let lat = PI / 2.0 - theta;
            let lon = (phi + PI).rem_euclid(2.0 * PI) - PI;
            let den = (1.0 + lat.cos() * (lon / 2.0).cos()).sqrt();
            (2.0 * 2f64.sqrt() * lat.cos() * (lon / 2.0).sin() / den, 2f64.sqrt() * lat.sin() / den)
        }
        Projection::Polar => {
            let r = (PI - theta) / PI;
            (r * phi.cos(), -r * phi.sin())
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WignerGrid {
    pub thetas: Vec<f64>,
    pub phis: Vec<f64>,
    /// `values[i][j]` at `(thetas[i], phis[j])`.
    pub values: Vec<Vec<f64>>,
    pub projection: Projection,
}

pub const DEFAULT_GRID: (usize, usize) = (181, 361);

impl WignerGrid {
    pub fn min(&self) -> f64 {
        self.values.iter().flatten().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Rows of `(theta, phi, x, y, value)`.
    pub fn points(&self) -> Vec<[f64; 5]> {
        let mut out = Vec::with_capacity(self.thetas.len() * self.phis.len());
        for (i, &t) in self.thetas.iter().enumerate() {
            for (j, &p) in self.phis.iter().enumerate() {
                let (x, y) = project(self.projection, t, p);
                out.push([t, p, x, y, self.values[i][j]]);
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta_rad,phi_rad,x,y,value\n");
        for r in self.points() {
            s.push_str(&format!("{},{},{},{},{}\n", r[0], r[1], r[2], r[3], r[4]));
        }
        s
    }
}

/// Uniform grid with `theta` in `[0, pi]` and `phi` in `[-pi, pi]`, both
/// endpoints included; rows are evaluated in parallel.
pub fn wigner_grid(rho: &DensityMatrix, n_theta: usize, n_phi: usize, projection: Projection) -> Result<WignerGrid> {
    if n_theta < 2 || n_phi < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points per axis".into()));
    }
    let wf = WignerFunction::new(rho);
    let thetas: Vec<f64> = (0..n_theta).map(|i| PI * i as f64 / (n_theta - 1) as f64).collect();
    let phis: Vec<f64> = (0..n_phi).map(|j| -PI + 2.0 * PI * j as f64 / (n_phi - 1) as f64).collect();
    let values = thetas
        .par_iter()
        .map(|&t| phis.iter().map(|&p| wf.value(t, p)).collect::<Result<Vec<f64>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(WignerGrid { thetas, phis, values, projection })
}

/// `int W dOmega` by Gauss-Legendre in `cos theta` and the trapezoid rule in
/// `phi` (exact for band-limited integrands once `n` exceeds `2I + 1`).
pub fn integrate(rho: &DensityMatrix, n: usize) -> Result<f64> {
    let wf = WignerFunction::new(rho);
    let (xs, ws) = gauss_legendre(n);
    let n_phi = 2 * n + 1;
    let mut total = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        let theta = x.acos();
        for j in 0..n_phi {
            let phi = 2.0 * PI * j as f64 / n_phi as f64;
            total += w * wf.value(theta, phi)? * 2.0 * PI / n_phi as f64;
        }
    }
    Ok(total)
}

/// Samples `W(pi/2, phi)` on `n` uniform points of `[0, 2 pi)` and returns
/// the amplitude and phase of the `cycles`-th harmonic,
/// `W ~ a0 + amp cos(cycles phi - phase)`.
pub fn equatorial_fringe(rho: &DensityMatrix, cycles: u32, n: usize) -> Result<(f64, f64)> {
    let wf = WignerFunction::new(rho);
    let (mut a, mut b) = (0.0, 0.0);
    for j in 0..n {
        let phi = 2.0 * PI * j as f64 / n as f64;
        let w = wf.value(PI / 2.0, phi)?;
        a += w * (cycles as f64 * phi).cos();
        b += w * (cycles as f64 * phi).sin();
    }
    let (a, b) = (2.0 * a / n as f64, 2.0 * b / n as f64);
    Ok(((a * a + b * b).sqrt(), b.atan2(a)))
}
