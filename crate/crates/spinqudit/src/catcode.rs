//! Spin-cat code: codewords `|0> = |I,-I>_x`, `|1> = |I,I>_x`, a generic
//! Knill-Laflamme checker and the covariant pi-rotation logical gates.

use crate::linalg::{c, expi_hermitian};
use crate::spincore::{spin_operators, wigner_d, PureState, SpinQuantum};
use crate::{CMatrix, CVector, Complex64, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct CodePair {
    pub zero_l: PureState,
    pub one_l: PureState,
}

impl CodePair {
    /// Arbitrary pair, e.g. codewords of another spin code.
    pub fn new(zero_l: PureState, one_l: PureState) -> Result<Self> {
        if zero_l.q != one_l.q {
            return Err(Error::DimensionMismatch { expected: zero_l.q.dim(), got: one_l.q.dim() });
        }
        Ok(Self { zero_l, one_l })
    }

    pub fn q(&self) -> SpinQuantum {
        self.zero_l.q
    }

    pub fn projector(&self) -> CMatrix {
        let a = &self.zero_l.amplitudes;
        let b = &self.one_l.amplitudes;
        a * a.adjoint() + b * b.adjoint()
    }
}

/// `|0> = sum_m d_{m,-I}(pi/2) |m>`, `|1> = sum_m d_{m,I}(pi/2) |m>`.
pub fn codewords(q: SpinQuantum) -> Result<CodePair> {
    if !q.is_half_odd() {
        return Err(Error::Unsupported("spin-cat logical gates need a half-odd-integer spin".into()));
    }
    let ti = q.two_i() as i32;
    let column = |two_m_col: i32| {
        let v = CVector::from_fn(q.dim(), |j, _| c(wigner_d(q, q.two_m(j), two_m_col, std::f64::consts::FRAC_PI_2), 0.0));
        PureState { q, amplitudes: v }
    };
    Ok(CodePair { zero_l: column(-ti), one_l: column(ti) })
}

#[derive(Clone, Debug)]
pub struct ErrorSet {
    pub labels: Vec<String>,
    pub operators: Vec<CMatrix>,
}

impl ErrorSet {
    pub fn new(labels: Vec<String>, operators: Vec<CMatrix>) -> Result<Self> {
        if labels.len() != operators.len() || operators.is_empty() {
            return Err(Error::InvalidArgument("one label per error operator, at least one".into()));
        }
        let d = operators[0].nrows();
        let id = CMatrix::identity(d, d);
        if !operators.iter().any(|e| (e - &id).iter().all(|z| z.norm() < 1e-14)) {
            return Err(Error::InvalidArgument("error set must contain the identity".into()));
        }
        Ok(Self { labels, operators })
    }

    /// `{1, Iz, ..., Iz^max_power}`.
    pub fn iz_powers(q: SpinQuantum, max_power: u32) -> Self {
        let iz = spin_operators(q).iz;
        let mut ops = vec![CMatrix::identity(q.dim(), q.dim())];
        let mut labels = vec!["1".to_string()];
        for p in 1..=max_power {
            ops.push(ops.last().unwrap() * &iz);
            labels.push(if p == 1 { "Iz".into() } else { format!("Iz^{p}") });
        }
        Self { labels, operators: ops }
    }

    /// `{1, Ix, Iy, Iz}`.
    pub fn first_order_rotations(q: SpinQuantum) -> Self {
        let ops = spin_operators(q);
        Self {
            labels: ["1", "Ix", "Iy", "Iz"].iter().map(|s| s.to_string()).collect(),
            operators: vec![CMatrix::identity(q.dim(), q.dim()), ops.ix, ops.iy, ops.iz],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KlReport {
    pub labels: Vec<String>,
    /// `C_ij = <0|E_i^dag E_j|0>`.
    pub c_matrix: Vec<Vec<Complex64>>,
    /// Largest `|<0|E_i^dag E_j|1>|` (either order).
    pub max_offdiag_violation: f64,
    /// Largest `|<0|E_i^dag E_j|0> - <1|E_i^dag E_j|1>|`.
    pub max_diag_mismatch: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Knill-Laflamme conditions `<a|E_i^dag E_j|b> = C_ij delta_ab`.
pub fn kl_check(code: &CodePair, errors: &ErrorSet, tol: f64) -> KlReport {
    let z = &code.zero_l.amplitudes;
    let o = &code.one_l.amplitudes;
    let n = errors.operators.len();
    let mut cm = vec![vec![c(0.0, 0.0); n]; n];
    let mut off: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let m = errors.operators[i].adjoint() * &errors.operators[j];
            let mz = &m * z;
            let mo = &m * o;
            let c00 = z.dotc(&mz);
            let c11 = o.dotc(&mo);
            off = off.max(z.dotc(&mo).norm()).max(o.dotc(&mz).norm());
            diag = diag.max((c00 - c11).norm());
            cm[i][j] = c00;
        }
    }
    KlReport {
        labels: errors.labels.clone(),
        c_matrix: cm,
        max_offdiag_violation: off,
        max_diag_mismatch: diag,
        tol,
        pass: off < tol && diag < tol,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogicalGate {
    X,
    Z,
}

/// `X = exp(-i pi Iz)`, `Z = exp(-i pi Ix)`.
pub fn logical_gate(q: SpinQuantum, kind: LogicalGate) -> Result<CMatrix> {
    if !q.is_half_odd() {
        return Err(Error::Unsupported("logical gates need a half-odd-integer spin".into()));
    }
    let ops = spin_operators(q);
    let gen = match kind {
        LogicalGate::X => ops.iz,
        LogicalGate::Z => ops.ix,
    };
    Ok(expi_hermitian(&gen, -std::f64::consts::PI))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BiasReport {
    /// Least-squares scalar with `U E U^dag ~ c E`.
    pub c: Complex64,
    /// `||U E U^dag - c E|| / ||E||` (Frobenius).
    pub residual: f64,
}

pub fn bias_preservation_check(u: &CMatrix, e: &CMatrix) -> BiasReport {
    let conj = u * e * u.adjoint();
    let ee: Complex64 = e.iter().map(|z| z.norm_sqr()).sum::<f64>().into();
    let cc: Complex64 = e.iter().zip(conj.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() / ee;
    let residual = (conj - e * cc).norm() / e.norm();
    BiasReport { c: cc, residual }
}
