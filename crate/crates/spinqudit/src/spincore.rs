//! Spin-I algebra: angular-momentum operators, parity, coherent states,
//! Wigner small-d functions and the symmetric (Dicke) qubit embedding.

use crate::linalg::{c, cis, eigh, hermiticity_defect, max_abs};
use crate::{CMatrix, CVector, Complex64, Error, Result};
use serde::{Deserialize, Serialize};

/// Spin quantum number stored as `2I`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinQuantum {
    two_i: u32,
}

impl SpinQuantum {
    pub fn new(two_i: u32) -> Result<Self> {
        if two_i == 0 {
            return Err(Error::InvalidArgument("2I must be at least 1".into()));
        }
        Ok(Self { two_i })
    }

    /// The spin-7/2 qudit.
    pub fn seven_halves() -> Self {
        Self { two_i: 7 }
    }

    pub fn two_i(&self) -> u32 {
        self.two_i
    }

    pub fn spin(&self) -> f64 {
        self.two_i as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.two_i as usize + 1
    }

    pub fn is_half_odd(&self) -> bool {
        self.two_i % 2 == 1
    }

    /// Magnetic quantum number of basis index `j`.
    pub fn m(&self, j: usize) -> f64 {
        self.spin() - j as f64
    }

    /// `2m` of basis index `j`.
    pub fn two_m(&self, j: usize) -> i32 {
        self.two_i as i32 - 2 * j as i32
    }

    /// Basis index of the level with projection `two_m / 2`.
    pub fn index_of(&self, two_m: i32) -> Result<usize> {
        let t = self.two_i as i32;
        if two_m.abs() > t || (t - two_m) % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "2m = {two_m} is not a level of spin {}/2",
                self.two_i
            )));
        }
        Ok(((t - two_m) / 2) as usize)
    }

    /// Basis indices `(lower m, upper m)` joined by transition `k` (1-based),
    /// where transition 1 couples `-I` and `-I + 1`.
    pub fn transition_levels(&self, k: usize) -> (usize, usize) {
        assert!(k >= 1 && k <= self.two_i as usize, "transition index out of range");
        let d = self.dim();
        (d - k, d - 1 - k)
    }

    /// Basis index of level `k` counted upward from `m = -I`.
    pub fn ascending_index(&self, k: usize) -> usize {
        self.dim() - 1 - k
    }

    /// `<m+1|I+|m>` for the lower level of each transition `k = 1..2I`.
    pub fn ladder_coefficients(&self) -> Vec<f64> {
        let i = self.spin();
        (1..=self.two_i as usize)
            .map(|k| {
                let m = -i + (k as f64 - 1.0);
                (i * (i + 1.0) - m * (m + 1.0)).sqrt()
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    pub q: SpinQuantum,
    pub amplitudes: CVector,
}

impl PureState {
    /// Wraps amplitudes, rejecting norms further than 1e-12 from one.
    pub fn new(q: SpinQuantum, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: q.dim(),
                got: amplitudes.len(),
            });
        }
        let n = amplitudes.norm();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("state norm {n} is not 1")));
        }
        Ok(Self { q, amplitudes })
    }

    pub fn normalized(q: SpinQuantum, amplitudes: CVector) -> Result<Self> {
        let n = amplitudes.norm();
        if n == 0.0 {
            return Err(Error::InvalidArgument("zero vector".into()));
        }
        Self::new(q, amplitudes.unscale(n))
    }

    /// The eigenstate `|m = two_m / 2>`.
    pub fn basis(q: SpinQuantum, two_m: i32) -> Result<Self> {
        let j = q.index_of(two_m)?;
        let mut v = CVector::zeros(q.dim());
        v[j] = c(1.0, 0.0);
        Ok(Self { q, amplitudes: v })
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            q: self.q,
            elements: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn apply(&self, u: &CMatrix) -> PureState {
        PureState {
            q: self.q,
            amplitudes: u * &self.amplitudes,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub q: SpinQuantum,
    pub elements: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-12), unit trace (1e-10) and eigenvalues >= -1e-10.
    pub fn new(q: SpinQuantum, elements: CMatrix) -> Result<Self> {
        if elements.nrows() != q.dim() || elements.ncols() != q.dim() {
            return Err(Error::DimensionMismatch {
                expected: q.dim(),
                got: elements.nrows(),
            });
        }
        let herm = hermiticity_defect(&elements);
        if herm > 1e-12 {
            return Err(Error::InvalidArgument(format!("not Hermitian ({herm:e})")));
        }
        let tr = elements.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("trace {tr} is not 1")));
        }
        let (vals, _) = eigh(&elements);
        if vals[0] < -1e-10 {
            return Err(Error::InvalidArgument(format!(
                "negative eigenvalue {}",
                vals[0]
            )));
        }
        Ok(Self { q, elements })
    }

    pub fn maximally_mixed(q: SpinQuantum) -> Self {
        let d = q.dim();
        Self {
            q,
            elements: CMatrix::identity(d, d).unscale(d as f64),
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.q.dim()).map(|j| self.elements[(j, j)].re).collect()
    }

    pub fn conjugate_by(&self, u: &CMatrix) -> DensityMatrix {
        DensityMatrix {
            q: self.q,
            elements: u * &self.elements * u.adjoint(),
        }
    }

    pub fn purity(&self) -> f64 {
        (&self.elements * &self.elements).trace().re
    }
}

/// Dimensionless angular-momentum operators in the descending-`m` basis.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub ix: CMatrix,
    pub iy: CMatrix,
    pub iz: CMatrix,
}

impl SpinOperators {
    /// Raising operator `I+ = Ix + i Iy`.
    pub fn raising(&self) -> CMatrix {
        &self.ix + &self.iy * c(0.0, 1.0)
    }

    /// `n . I` for the unit vector with polar angle `theta` and azimuth `phi`.
    pub fn along(&self, theta: f64, phi: f64) -> CMatrix {
        self.ix.scale(theta.sin() * phi.cos())
            + self.iy.scale(theta.sin() * phi.sin())
            + self.iz.scale(theta.cos())
    }
}

pub fn spin_operators(q: SpinQuantum) -> SpinOperators {
    let d = q.dim();
    let i = q.spin();
    let mut plus = CMatrix::zeros(d, d);
    for j in 1..d {
        let m = q.m(j);
        plus[(j - 1, j)] = c((i * (i + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let ix = (&plus + &minus).scale(0.5);
    let iy = (&plus - &minus) * c(0.0, -0.5);
    let iz = CMatrix::from_fn(d, d, |a, b| if a == b { c(q.m(a), 0.0) } else { c(0.0, 0.0) });
    SpinOperators { ix, iy, iz }
}

/// Diagonal parity `(-1)^(I + m)`.
pub fn parity_operator(q: SpinQuantum) -> CMatrix {
    let d = q.dim();
    CMatrix::from_fn(d, d, |a, b| {
        if a != b {
            c(0.0, 0.0)
        } else if (q.two_i() as usize - a).is_multiple_of(2) {
            c(1.0, 0.0)
        } else {
            c(-1.0, 0.0)
        }
    })
}

fn factorial(n: i32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Wigner small-d `d^I_{m', m}(beta) = <I m'| exp(-i beta Iy) |I m>` from the
/// explicit factorial sum. Projections are passed doubled.
pub fn wigner_d(q: SpinQuantum, two_m_row: i32, two_m_col: i32, beta: f64) -> f64 {
    let j2 = q.two_i() as i32;
    assert!(two_m_row.abs() <= j2 && two_m_col.abs() <= j2, "|m| exceeds I");
    assert!(j2 <= 40, "2I too large for the factorial sum");
    let jpmp = (j2 + two_m_row) / 2;
    let jmmp = (j2 - two_m_row) / 2;
    let jpm = (j2 + two_m_col) / 2;
    let jmm = (j2 - two_m_col) / 2;
    let mp_m = (two_m_row - two_m_col) / 2;
    let pre = (factorial(jpmp) * factorial(jmmp) * factorial(jpm) * factorial(jmm)).sqrt();
    let (cb, sb) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let s_min = 0.max(-mp_m);
    let s_max = jpm.min(jmmp);
    let mut total = 0.0;
    for s in s_min..=s_max {
        let sign = if (mp_m + s) % 2 == 0 { 1.0 } else { -1.0 };
        let den = factorial(jpm - s) * factorial(s) * factorial(mp_m + s) * factorial(jmmp - s);
        let pc = j2 + (two_m_col - two_m_row) / 2 - 2 * s;
        let ps = mp_m + 2 * s;
        total += sign / den * cb.powi(pc) * sb.powi(ps);
    }
    pre * total
}

/// Full `d^I(beta)` matrix in the descending-`m` basis.
pub fn wigner_d_matrix(q: SpinQuantum, beta: f64) -> nalgebra::DMatrix<f64> {
    let d = q.dim();
    nalgebra::DMatrix::from_fn(d, d, |a, b| wigner_d(q, q.two_m(a), q.two_m(b), beta))
}

/// Rotation `exp(-i theta (-sin(phi) Ix + cos(phi) Iy))`, which carries the
/// z axis onto `(sin theta cos phi, sin theta sin phi, cos theta)`.
pub fn axis_rotation(q: SpinQuantum, theta: f64, phi: f64) -> CMatrix {
    let d = q.dim();
    CMatrix::from_fn(d, d, |a, b| {
        let (ma, mb) = (q.m(a), q.m(b));
        cis(-(ma - mb) * phi) * wigner_d(q, q.two_m(a), q.two_m(b), theta)
    })
}

/// Spin coherent state pointing along `(theta, phi)`; see [`axis_rotation`]
/// for the phase convention.
pub fn spin_coherent_state(q: SpinQuantum, theta: f64, phi: f64) -> PureState {
    let i = q.spin();
    let amps = CVector::from_fn(q.dim(), |j, _| {
        cis(-(q.m(j) - i) * phi) * wigner_d(q, q.two_m(j), q.two_i() as i32, theta)
    });
    PureState { q, amplitudes: amps }
}

/// `<psi| rho |psi>` clipped to [0, 1].
pub fn fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.q != psi.q {
        return Err(Error::DimensionMismatch {
            expected: rho.q.dim(),
            got: psi.q.dim(),
        });
    }
    let f = psi.amplitudes.dotc(&(&rho.elements * &psi.amplitudes)).re;
    Ok(f.clamp(0.0, 1.0))
}

/// Default refusal threshold for [`dicke_embed`].
pub const DICKE_CAP: u32 = 10;

/// Symmetric Dicke state of `2I` qubits with `I - m` excitations. Qubit 0 is
/// the most significant bit and `0` denotes spin up.
pub fn dicke_embed(q: SpinQuantum, two_m: i32, cap: u32) -> Result<CVector> {
    let n = q.two_i();
    if n > cap {
        return Err(Error::Unsupported(format!(
            "Dicke embedding of 2I = {n} qubits exceeds cap {cap}"
        )));
    }
    let k = q.index_of(two_m)? as u32;
    let binom = factorial(n as i32) / (factorial(k as i32) * factorial((n - k) as i32));
    let amp = 1.0 / binom.sqrt();
    Ok(CVector::from_fn(1 << n, |b, _| {
        if (b as u32).count_ones() == k {
            c(amp, 0.0)
        } else {
            c(0.0, 0.0)
        }
    }))
}

/// Embeds a superposition `sum a_m |m>` into the symmetric qubit subspace.
pub fn dicke_embed_state(psi: &PureState, cap: u32) -> Result<CVector> {
    let q = psi.q;
    let mut out = CVector::zeros(1 << q.two_i());
    for j in 0..q.dim() {
        out += dicke_embed(q, q.two_m(j), cap)? * psi.amplitudes[j];
    }
    Ok(out)
}

/// Residual of `[ix, iy] = i iz`, used by diagnostics.
pub fn commutation_defect(ops: &SpinOperators) -> f64 {
    let lhs = &ops.ix * &ops.iy - &ops.iy * &ops.ix;
    max_abs(&(lhs - &ops.iz * c(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let q = SpinQuantum::seven_halves();
        for j in 0..8 {
            assert_eq!(q.index_of(q.two_m(j)).unwrap(), j);
        }
        assert!(q.index_of(6).is_err());
        assert_eq!(q.transition_levels(1), (7, 6));
        assert_eq!(q.transition_levels(7), (1, 0));
    }

    #[test]
    fn ladder_coefficients_seven_halves() {
        let c2: Vec<f64> = SpinQuantum::seven_halves()
            .ladder_coefficients()
            .iter()
            .map(|c| c * c)
            .collect();
        let want = [7.0, 12.0, 15.0, 16.0, 15.0, 12.0, 7.0];
        for (a, b) in c2.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
