//! Static and driven Hamiltonians (Hz) in the laboratory frame and in the
//! generalised rotating frame (GRF) defined by one software clock per
//! transition.

use crate::linalg::{c, cis, eigh};
use crate::spincore::{spin_operators, SpinQuantum};
use crate::{CMatrix, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default tolerance on eigenvector mixing for [`nmr_frequencies`].
pub const ZEEMAN_MIXING_LIMIT: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticParams {
    /// Static field (T).
    pub b0: f64,
    /// Gyromagnetic ratio (Hz/T).
    pub gamma_n: f64,
    /// Quadrupole tensor `Q_ab` (Hz), rows/cols ordered x, y, z.
    pub quad: [[f64; 3]; 3],
}

impl StaticParams {
    pub fn new(b0: f64, gamma_n: f64, quad: [[f64; 3]; 3]) -> Result<Self> {
        if !(b0 > 0.0) {
            return Err(Error::InvalidArgument(format!("b0 must be positive, got {b0}")));
        }
        for a in 0..3 {
            for b in 0..3 {
                if (quad[a][b] - quad[b][a]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument("quadrupole tensor not symmetric".into()));
                }
            }
        }
        Ok(Self { b0, gamma_n, quad })
    }

    /// Diagonal tensor with `Q_zz = -f_q / 2`, so that `f_{k+1} - f_k = f_q`
    /// with `f_1` the `-I <-> -I+1` line.
    pub fn from_fq(b0: f64, gamma_n: f64, f_q: f64) -> Result<Self> {
        let mut quad = [[0.0; 3]; 3];
        quad[2][2] = -f_q / 2.0;
        Self::new(b0, gamma_n, quad)
    }

    /// Zeeman frequency `gamma_n * B0` (Hz).
    pub fn larmor(&self) -> f64 {
        self.gamma_n * self.b0
    }
}

/// `-gamma_n B0 Iz + sum_ab Q_ab I_a I_b`.
pub fn static_hamiltonian(p: &StaticParams, q: SpinQuantum) -> CMatrix {
    let ops = spin_operators(q);
    let comps = [&ops.ix, &ops.iy, &ops.iz];
    let mut h = ops.iz.scale(-p.larmor());
    for a in 0..3 {
        for b in 0..3 {
            if p.quad[a][b] != 0.0 {
                h += (comps[a] * comps[b]).scale(p.quad[a][b]);
            }
        }
    }
    h
}

/// Level energies (Hz) of `h` assigned to basis indices by maximal overlap,
/// together with the largest mixing `1 - |<m|psi>|^2`.
pub fn assigned_levels(h: &CMatrix) -> Result<(Vec<f64>, f64)> {
    let d = h.nrows();
    let (vals, vecs) = eigh(h);
    let mut energies = vec![f64::NAN; d];
    let mut mixing: f64 = 0.0;
    for (col, &e) in vals.iter().enumerate() {
        let (j, w) = (0..d)
            .map(|j| (j, vecs[(j, col)].norm_sqr()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if !energies[j].is_nan() {
            return Err(Error::NotZeemanDominant { mixing: 1.0, limit: ZEEMAN_MIXING_LIMIT });
        }
        energies[j] = e;
        mixing = mixing.max(1.0 - w);
    }
    Ok((energies, mixing))
}

/// Adjacent-level transition frequencies `f_1 .. f_2I` (Hz), `f_1` joining
/// `m = -I` and `m = -I + 1`.
pub fn nmr_frequencies(h_static: &CMatrix, q: SpinQuantum, mixing_limit: f64) -> Result<Vec<f64>> {
    let (e, mixing) = assigned_levels(h_static)?;
    if mixing > mixing_limit {
        return Err(Error::NotZeemanDominant { mixing, limit: mixing_limit });
    }
    Ok((1..=q.two_i() as usize)
        .map(|k| {
            let (lo, hi) = q.transition_levels(k);
            e[lo] - e[hi]
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveTone {
    /// Addressed transition `k`, 1-based.
    pub transition: usize,
    /// Carrier (Hz); only used by the laboratory-frame model.
    pub freq: f64,
    /// Phase `phi_k` (rad).
    pub phase: f64,
    /// Amplitude (T).
    pub b1: f64,
}

/// Laboratory drive `-gamma_n Ix sum_k B_k cos(2 pi f_k t - phi_k)`.
///
/// The phase enters with a minus sign so that the rotating-wave limit in the
/// GRF carries `exp(+i phi_k)` on the lower-`m` row, matching
/// [`grf_drive_hamiltonian`] and the virtual-SNAP algebra.
pub fn lab_drive_hamiltonian(t: f64, tones: &[DriveTone], q: SpinQuantum, gamma_n: f64) -> CMatrix {
    let amp: f64 = tones
        .iter()
        .map(|tone| tone.b1 * (2.0 * PI * tone.freq * t - tone.phase).cos())
        .sum();
    spin_operators(q).ix.scale(-gamma_n * amp)
}

/// Reference clocks of the generalised rotating frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameDefinition {
    /// Per-transition reference frequencies `f_i^ref` (Hz).
    pub ref_freqs: Vec<f64>,
    /// Accumulated clock phase updates `sum Delta phi_k` (rad).
    pub phases: Vec<f64>,
    /// Static per-clock phase error added to every tone (rad).
    pub phase_offsets: Vec<f64>,
    /// `delta_i = f_i^ref - f_i^0` (Hz).
    pub detunings: Vec<f64>,
    /// Clock frequency of the `m = -I` level (Hz); only shifts a global phase.
    pub base: f64,
}

impl FrameDefinition {
    /// Frame with reference clocks `f0 + delta` and zero phases.
    pub fn new(f0: &[f64], detunings: &[f64], base: f64) -> Result<Self> {
        if f0.len() != detunings.len() {
            return Err(Error::DimensionMismatch { expected: f0.len(), got: detunings.len() });
        }
        Ok(Self {
            ref_freqs: f0.iter().zip(detunings).map(|(f, d)| f + d).collect(),
            phases: vec![0.0; f0.len()],
            phase_offsets: vec![0.0; f0.len()],
            detunings: detunings.to_vec(),
            base,
        })
    }

    /// Frame locked to the static Hamiltonian of `p`.
    pub fn resonant(p: &StaticParams, q: SpinQuantum) -> Result<Self> {
        let h = static_hamiltonian(p, q);
        let f0 = nmr_frequencies(&h, q, ZEEMAN_MIXING_LIMIT)?;
        let (e, _) = assigned_levels(&h)?;
        Self::new(&f0, &vec![0.0; f0.len()], e[q.dim() - 1])
    }

    /// Abstract on-resonance frame for GRF-only work (no static model).
    pub fn ideal(q: SpinQuantum) -> Self {
        let n = q.two_i() as usize;
        Self {
            ref_freqs: vec![0.0; n],
            phases: vec![0.0; n],
            phase_offsets: vec![0.0; n],
            detunings: vec![0.0; n],
            base: 0.0,
        }
    }

    /// Sets a static phase error on each clock, seen by every later tone.
    pub fn with_phase_offsets(mut self, offsets: &[f64]) -> Self {
        self.phase_offsets = offsets.to_vec();
        self
    }

    /// Level phase `xi_j = -sum_{i <= k} phases_i` of basis index `j`, where
    /// `k` counts levels upward from `m = -I`.
    pub fn level_phase(&self, q: SpinQuantum, j: usize) -> f64 {
        let k = q.dim() - 1 - j;
        -self.phases[..k].iter().sum::<f64>()
    }

    /// Clock frequency of basis index `j` (Hz).
    pub fn level_clock(&self, q: SpinQuantum, j: usize) -> f64 {
        let k = q.dim() - 1 - j;
        self.base - self.ref_freqs[..k].iter().sum::<f64>()
    }

    /// Cumulative detuning of basis index `j` (Hz).
    pub fn level_detuning(&self, q: SpinQuantum, j: usize) -> f64 {
        let k = q.dim() - 1 - j;
        self.detunings[..k].iter().sum()
    }
}

/// Rotating-wave GRF Hamiltonian of a set of resonant tones, written in the
/// frame of the current clocks. Entry `(lower m, upper m)` of transition `k`
/// is `-(gamma_n / 4) c_k B_k exp(i phi_k)` (plus any static clock offset);
/// the diagonal holds cumulative detunings counted from `m = -I`.
pub fn grf_drive_hamiltonian(
    tones: &[DriveTone],
    frame: &FrameDefinition,
    q: SpinQuantum,
    gamma_n: f64,
) -> Result<CMatrix> {
    let d = q.dim();
    let n = q.two_i() as usize;
    if frame.phase_offsets.len() != n || frame.detunings.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: frame.phases.len() });
    }
    let mut seen = vec![false; n + 1];
    let ladder = q.ladder_coefficients();
    let mut h = CMatrix::zeros(d, d);
    for j in 0..d {
        h[(j, j)] = c(frame.level_detuning(q, j), 0.0);
    }
    for tone in tones {
        let k = tone.transition;
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!("transition {k} out of range 1..={n}")));
        }
        if seen[k] {
            return Err(Error::InvalidArgument(format!("duplicate tone on transition {k}")));
        }
        seen[k] = true;
        let (lo, hi) = q.transition_levels(k);
        let v = cis(tone.phase + frame.phase_offsets[k - 1]) * (-gamma_n / 4.0 * ladder[k - 1] * tone.b1);
        h[(lo, hi)] += v;
        h[(hi, lo)] += v.conj();
    }
    Ok(h)
}

/// `U^dag H U - (i / 2 pi) U^dag dU/dt` with
/// `U = diag(exp(-i (2 pi F_j t + xi_j)))` built from the frame clocks `F_j`
/// and the level phases `xi_j` left by earlier frame updates.
pub fn grf_transform<F>(h_lab: F, frame: &FrameDefinition, q: SpinQuantum, t: f64) -> CMatrix
where
    F: Fn(f64) -> CMatrix,
{
    let h = h_lab(t);
    let d = q.dim();
    let clocks: Vec<f64> = (0..d).map(|j| frame.level_clock(q, j)).collect();
    let xi: Vec<f64> = (0..d).map(|j| frame.level_phase(q, j)).collect();
    CMatrix::from_fn(d, d, |a, b| {
        if a == b {
            h[(a, a)] - clocks[a]
        } else {
            h[(a, b)] * cis(2.0 * PI * (clocks[a] - clocks[b]) * t + xi[a] - xi[b])
        }
    })
}

/// Tone amplitude giving a two-level Rabi frequency `f_rabi` on transition `k`.
pub fn b1_for_transition_rabi(q: SpinQuantum, k: usize, f_rabi: f64, gamma_n: f64) -> f64 {
    2.0 * f_rabi / (gamma_n * q.ladder_coefficients()[k - 1])
}

/// Common amplitude giving a covariant Rabi frequency `f_rabi = gamma_n B1 / 2`.
pub fn b1_for_covariant_rabi(f_rabi: f64, gamma_n: f64) -> f64 {
    2.0 * f_rabi / gamma_n
}
