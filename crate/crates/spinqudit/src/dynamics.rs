//! Pulse schedules, GRF and laboratory-frame evolution, covariant and
//! subspace rotations, virtual-SNAP frame updates, cat-state recipes and a
//! phenomenological dephasing channel.

use crate::hamiltonian::{
    b1_for_covariant_rabi, b1_for_transition_rabi, grf_drive_hamiltonian, grf_transform,
    static_hamiltonian, DriveTone, FrameDefinition, StaticParams,
};
use crate::linalg::{c, cis, eigh, expi_hermitian};
use crate::ode::{Dop853, Dop853Options};
use crate::spincore::{parity_operator, spin_operators, DensityMatrix, PureState, SpinQuantum};
use crate::{CMatrix, CVector, Complex64, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    /// Piecewise-constant drive (duration in seconds).
    Pulse { duration: f64, tones: Vec<DriveTone> },
    /// Instantaneous clock phase update, one angle per transition (rad).
    FrameUpdate { delta_phi: Vec<f64> },
    /// Free evolution (seconds).
    Wait { duration: f64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub segments: Vec<Segment>,
}

impl PulseSchedule {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    pub fn validate(&self, q: SpinQuantum) -> Result<()> {
        let n = q.two_i() as usize;
        for seg in &self.segments {
            match seg {
                Segment::Pulse { duration, tones } => {
                    if !(*duration >= 0.0) {
                        return Err(Error::InvalidArgument(format!("negative duration {duration}")));
                    }
                    if tones.iter().any(|t| !(t.b1 >= 0.0)) {
                        return Err(Error::InvalidArgument("tone amplitude must be >= 0".into()));
                    }
                }
                Segment::Wait { duration } => {
                    if !(*duration >= 0.0) {
                        return Err(Error::InvalidArgument(format!("negative duration {duration}")));
                    }
                }
                Segment::FrameUpdate { delta_phi } => {
                    if delta_phi.len() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: delta_phi.len() });
                    }
                }
            }
        }
        Ok(())
    }

    /// Copy with every tone's carrier set to its transition's reference
    /// clock, as needed by [`evolve_lab`].
    pub fn with_carriers(&self, frame: &FrameDefinition) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| match s {
                Segment::Pulse { duration, tones } => Segment::Pulse {
                    duration: *duration,
                    tones: tones
                        .iter()
                        .map(|t| DriveTone { freq: frame.ref_freqs[t.transition - 1], ..t.clone() })
                        .collect(),
                },
                other => other.clone(),
            })
            .collect();
        Self { segments }
    }

    pub fn total_duration(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| match s {
                Segment::Pulse { duration, .. } | Segment::Wait { duration } => *duration,
                Segment::FrameUpdate { .. } => 0.0,
            })
            .sum()
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<PureState>,
    /// One row of level populations per time (descending `m`).
    pub populations: Vec<Vec<f64>>,
    pub iz_expect: Vec<f64>,
    pub final_frame: FrameDefinition,
}

impl EvolutionResult {
    fn new(frame: &FrameDefinition) -> Self {
        Self {
            times: Vec::new(),
            states: Vec::new(),
            populations: Vec::new(),
            iz_expect: Vec::new(),
            final_frame: frame.clone(),
        }
    }

    fn record(&mut self, t: f64, psi: &PureState) {
        let pops = psi.populations();
        let iz = pops.iter().enumerate().map(|(j, p)| p * psi.q.m(j)).sum();
        self.times.push(t);
        self.populations.push(pops);
        self.iz_expect.push(iz);
        self.states.push(psi.clone());
    }

    pub fn final_state(&self) -> &PureState {
        self.states.last().expect("evolution records the initial state")
    }
}

/// `R_theta(phi) = exp(i theta (Ix cos phi + Iy sin phi))`.
pub fn covariant_rotation(q: SpinQuantum, theta: f64, phi: f64) -> CMatrix {
    let ops = spin_operators(q);
    let axis = ops.ix.scale(phi.cos()) + ops.iy.scale(phi.sin());
    expi_hermitian(&axis, theta)
}

/// Equal-strength tones on every transition producing `R_theta(phi)` at
/// covariant Rabi frequency `f_rabi` (Hz).
pub fn covariant_pulse(q: SpinQuantum, theta: f64, phi: f64, f_rabi: f64, gamma_n: f64) -> Segment {
    let b1 = b1_for_covariant_rabi(f_rabi, gamma_n);
    Segment::Pulse {
        duration: theta / (2.0 * PI * f_rabi),
        tones: (1..=q.two_i() as usize)
            .map(|k| DriveTone { transition: k, freq: 0.0, phase: phi, b1 })
            .collect(),
    }
}

/// Virtual-SNAP: advances the clock phases by `delta_phi` and returns the
/// equivalent diagonal unitary `diag(exp(i xi_j))`, `xi = -cumsum(delta_phi)`
/// counted upward from `m = -I` (which keeps phase 0).
pub fn virtual_snap(frame: &FrameDefinition, q: SpinQuantum, delta_phi: &[f64]) -> Result<(FrameDefinition, CMatrix)> {
    let n = q.two_i() as usize;
    if delta_phi.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: delta_phi.len() });
    }
    let d = q.dim();
    let mut xi = vec![0.0; d];
    let mut acc = 0.0;
    for k in 1..d {
        acc -= delta_phi[k - 1];
        xi[q.ascending_index(k)] = acc;
    }
    let mut next = frame.clone();
    for (p, dp) in next.phases.iter_mut().zip(delta_phi) {
        *p += dp;
    }
    let phases: Vec<Complex64> = xi.iter().map(|&x| cis(x)).collect();
    Ok((next, crate::linalg::diag(&phases)))
}

/// Alternating `(-pi/2, +pi/2, ...)` update turning an equatorial coherent
/// state into an equatorial cat.
pub fn alternating_snap_phases(q: SpinQuantum) -> Vec<f64> {
    (0..q.two_i())
        .map(|i| if i % 2 == 0 { -PI / 2.0 } else { PI / 2.0 })
        .collect()
}

struct Diagonalized {
    vals: Vec<f64>,
    vecs: CMatrix,
}

impl Diagonalized {
    fn new(h: &CMatrix) -> Self {
        let (vals, vecs) = eigh(h);
        Self { vals, vecs }
    }

    fn apply(&self, psi: &CVector, t: f64) -> CVector {
        let mut coeff = self.vecs.adjoint() * psi;
        for (z, l) in coeff.iter_mut().zip(&self.vals) {
            *z *= cis(-2.0 * PI * l * t);
        }
        &self.vecs * coeff
    }
}

/// Exact evolution in the GRF: each pulse or wait is propagated with the
/// matrix exponential of its rotating-wave Hamiltonian; frame updates apply
/// the virtual-SNAP diagonal to the state. `samples_per_segment` extra points
/// are recorded evenly inside each timed segment (the end point included).
pub fn evolve_grf(
    psi0: &PureState,
    schedule: &PulseSchedule,
    frame: &FrameDefinition,
    gamma_n: f64,
    samples_per_segment: usize,
) -> Result<EvolutionResult> {
    let q = psi0.q;
    schedule.validate(q)?;
    let mut frame = frame.clone();
    let mut out = EvolutionResult::new(&frame);
    let mut psi = psi0.clone();
    let mut t0 = 0.0;
    out.record(t0, &psi);
    for seg in &schedule.segments {
        match seg {
            Segment::FrameUpdate { delta_phi } => {
                let (next, v) = virtual_snap(&frame, q, delta_phi)?;
                frame = next;
                psi = psi.apply(&v);
                out.record(t0, &psi);
            }
            Segment::Pulse { duration, tones } => {
                let h = grf_drive_hamiltonian(tones, &frame, q, gamma_n)?;
                psi = propagate_recording(&h, &psi, t0, *duration, samples_per_segment, &mut out);
                t0 += duration;
            }
            Segment::Wait { duration } => {
                let h = grf_drive_hamiltonian(&[], &frame, q, gamma_n)?;
                psi = propagate_recording(&h, &psi, t0, *duration, samples_per_segment, &mut out);
                t0 += duration;
            }
        }
    }
    out.final_frame = frame;
    Ok(out)
}

fn propagate_recording(
    h: &CMatrix,
    psi: &PureState,
    t0: f64,
    duration: f64,
    samples: usize,
    out: &mut EvolutionResult,
) -> PureState {
    let diag = Diagonalized::new(h);
    let n = samples.max(1);
    let mut last = psi.clone();
    for i in 1..=n {
        let dt = duration * i as f64 / n as f64;
        last = PureState {
            q: psi.q,
            amplitudes: diag.apply(&psi.amplitudes, dt),
        };
        if samples > 0 || i == n {
            out.record(t0 + dt, &last);
        }
    }
    last
}

/// Full time-dependent (no rotating-wave approximation) evolution of the
/// laboratory Hamiltonian, integrated with DOP853 in the interaction picture
/// of `frame` and reported there. Tone carriers come from the tones
/// themselves; norm is not renormalized.
pub fn evolve_lab(
    psi0: &PureState,
    schedule: &PulseSchedule,
    frame: &FrameDefinition,
    p: &StaticParams,
    tol: f64,
    samples_per_segment: usize,
) -> Result<EvolutionResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    let q = psi0.q;
    schedule.validate(q)?;
    let d = q.dim();
    let hs = static_hamiltonian(p, q);
    let ix = spin_operators(q).ix;
    let opts = Dop853Options { rtol: tol, atol: tol * 1e-2, ..Default::default() };
    let mut frame = frame.clone();
    let mut out = EvolutionResult::new(&frame);
    let mut psi = psi0.clone();
    let mut t0 = 0.0;
    out.record(t0, &psi);
    for seg in &schedule.segments {
        let (duration, tones) = match seg {
            Segment::FrameUpdate { delta_phi } => {
                let (next, v) = virtual_snap(&frame, q, delta_phi)?;
                frame = next;
                psi = psi.apply(&v);
                out.record(t0, &psi);
                continue;
            }
            Segment::Pulse { duration, tones } => (*duration, tones.clone()),
            Segment::Wait { duration } => (*duration, Vec::new()),
        };
        // physical carrier phase relative to the current clocks
        let lab_tones: Vec<DriveTone> = tones
            .iter()
            .map(|t| DriveTone {
                phase: t.phase + frame.phase_offsets[t.transition - 1] - frame.phases[t.transition - 1],
                ..t.clone()
            })
            .collect();
        let static_grf = grf_transform(|_| hs.clone(), &frame, q, 0.0);
        let clocks: Vec<f64> = (0..d).map(|j| frame.level_clock(q, j)).collect();
        let xi: Vec<f64> = (0..d).map(|j| frame.level_phase(q, j)).collect();
        let gamma = p.gamma_n;
        let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            let amp: f64 = lab_tones
                .iter()
                .map(|tone| tone.b1 * (2.0 * PI * tone.freq * t - tone.phase).cos())
                .sum();
            let g: Vec<Complex64> = (0..d).map(|j| cis(2.0 * PI * clocks[j] * t + xi[j])).collect();
            for a in 0..d {
                let mut acc = static_grf[(a, a)] * y[a];
                for b in 0..d {
                    if a == b {
                        continue;
                    }
                    let raw = hs[(a, b)] - ix[(a, b)] * (gamma * amp);
                    if raw.re != 0.0 || raw.im != 0.0 {
                        acc += raw * g[a] * g[b].conj() * y[b];
                    }
                }
                dy[a] = acc * c(0.0, -2.0 * PI);
            }
        };
        let mut ode = Dop853::new(d, rhs, opts);
        let mut y: Vec<Complex64> = psi.amplitudes.iter().copied().collect();
        let n = samples_per_segment.max(1);
        let mut t_prev = t0;
        for i in 1..=n {
            let t_next = t0 + duration * i as f64 / n as f64;
            ode.integrate(t_prev, t_next, &mut y)?;
            t_prev = t_next;
            psi = PureState { q, amplitudes: CVector::from_vec(y.clone()) };
            if samples_per_segment > 0 || i == n {
                out.record(t_next, &psi);
            }
        }
        t0 += duration;
    }
    out.final_frame = frame;
    Ok(out)
}

/// Per-tone amplitudes for a covariant rotation confined to the central
/// spin-`sub_two_i / 2` subspace, normalised to root-sum-square `budget` (T).
pub fn subspace_rotation_amplitudes(q: SpinQuantum, sub_two_i: u32, budget: f64) -> Result<Vec<f64>> {
    let n = q.two_i();
    if sub_two_i == 0 || sub_two_i > n || !(n - sub_two_i).is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "subspace 2I = {sub_two_i} incompatible with 2I = {n}"
        )));
    }
    let full = q.ladder_coefficients();
    let sub = SpinQuantum::new(sub_two_i)?.ladder_coefficients();
    let k0 = ((n - sub_two_i) / 2) as usize;
    let mut b = vec![0.0; n as usize];
    for (i, cs) in sub.iter().enumerate() {
        b[k0 + i] = cs / full[k0 + i];
    }
    let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(b.iter().map(|x| x * budget / norm).collect())
}

/// Covariant Rabi frequency (Hz) of a subspace drive built from `amplitudes`.
pub fn subspace_rabi_frequency(q: SpinQuantum, sub_two_i: u32, amplitudes: &[f64], gamma_n: f64) -> f64 {
    let k0 = ((q.two_i() - sub_two_i) / 2) as usize;
    let full = q.ladder_coefficients();
    let sub = SpinQuantum::new(sub_two_i).map(|s| s.ladder_coefficients()).unwrap_or_default();
    // every in-subspace tone gives gamma B_k c_k / 4 = (f_rabi / 2) * c_sub / 2
    gamma_n * amplitudes[k0] * full[k0] / sub[0] / 2.0
}

/// Population outside the central spin-`sub_two_i / 2` subspace.
pub fn leakage(psi: &PureState, sub_two_i: u32) -> f64 {
    let q = psi.q;
    let k0 = ((q.two_i() - sub_two_i) / 2) as usize;
    let inside: f64 = psi.populations()[k0..=k0 + sub_two_i as usize].iter().sum();
    1.0 - inside
}

/// Givens-rotation cat recipe: a pi/2 pulse on the lowest transition of the
/// central subspace, then ascending pi pulses, each at two-level Rabi
/// frequency `f_rabi`. Starting from `|-I_sub>` it yields
/// `(|I_sub> + e^{i xi} |-I_sub>) / sqrt 2`.
pub fn givens_cat_sequence(q: SpinQuantum, sub_two_i: u32, f_rabi: f64, gamma_n: f64) -> Result<PulseSchedule> {
    let n = q.two_i();
    if sub_two_i == 0 || sub_two_i > n || !(n - sub_two_i).is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "subspace 2I = {sub_two_i} incompatible with 2I = {n}"
        )));
    }
    let k0 = ((n - sub_two_i) / 2) as usize + 1;
    let mut segs = Vec::new();
    for (i, k) in (k0..k0 + sub_two_i as usize).enumerate() {
        let angle = if i == 0 { PI / 2.0 } else { PI };
        segs.push(Segment::Pulse {
            duration: angle / (2.0 * PI * f_rabi),
            tones: vec![DriveTone {
                transition: k,
                freq: 0.0,
                phase: 0.0,
                b1: b1_for_transition_rabi(q, k, f_rabi, gamma_n),
            }],
        });
    }
    Ok(PulseSchedule::new(segs))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CatOrientation {
    X,
    Z,
}

/// Covariant pi/2 about `-y`, alternating virtual-SNAP, and for `Z` a second
/// identical covariant pi/2. From `|-I>` this gives the x cat with
/// `xi = pi/2`, or `(|I> + i|-I>) / sqrt 2`.
pub fn snap_cat_sequence(q: SpinQuantum, f_rabi: f64, orient: CatOrientation, gamma_n: f64) -> PulseSchedule {
    let mut segs = vec![
        covariant_pulse(q, PI / 2.0, -PI / 2.0, f_rabi, gamma_n),
        Segment::FrameUpdate { delta_phi: alternating_snap_phases(q) },
    ];
    if orient == CatOrientation::Z {
        segs.push(covariant_pulse(q, PI / 2.0, -PI / 2.0, f_rabi, gamma_n));
    }
    PulseSchedule::new(segs)
}

/// `(|I> + e^{i xi} |-I>) / sqrt 2`.
pub fn z_cat(q: SpinQuantum, xi: f64) -> PureState {
    let d = q.dim();
    let mut v = CVector::zeros(d);
    v[0] = c(1.0 / 2f64.sqrt(), 0.0);
    v[d - 1] = cis(xi) / 2f64.sqrt();
    PureState { q, amplitudes: v }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    /// `T2[a][b]` (s) for coherence between basis indices `a` and `b`;
    /// diagonal entries are ignored.
    pub t2: Vec<Vec<f64>>,
    /// Stretch exponent of `exp[-(tau / T2)^alpha]`.
    pub alpha: f64,
    /// Optional symmetric misread probability (plumbing only).
    pub readout_flip: Option<f64>,
}

impl NoiseModel {
    pub fn new(t2: Vec<Vec<f64>>, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} outside (0, 2]")));
        }
        let d = t2.len();
        for a in 0..d {
            if t2[a].len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: t2[a].len() });
            }
            for b in 0..d {
                if a != b && !(t2[a][b] > 0.0) {
                    return Err(Error::InvalidArgument("T2 must be positive".into()));
                }
                if (t2[a][b] - t2[b][a]).abs() > 1e-12 * t2[a][b].abs().max(1.0) {
                    return Err(Error::InvalidArgument("T2 table must be symmetric".into()));
                }
            }
        }
        Ok(Self { t2, alpha, readout_flip: None })
    }

    /// Same `T2` for every coherence.
    pub fn uniform(q: SpinQuantum, t2: f64, alpha: f64) -> Result<Self> {
        Self::new(vec![vec![t2; q.dim()]; q.dim()], alpha)
    }

    /// Rate model `1/T2_{m,m'} = g_z |m - m'| + g_q |m^2 - m'^2|` from
    /// independent Lorentzian field and quadrupole noise. With `alpha = 1`
    /// the channel is completely positive by construction.
    pub fn from_rates(q: SpinQuantum, zeeman_rate: f64, quad_rate: f64, alpha: f64) -> Result<Self> {
        let d = q.dim();
        let t2 = (0..d)
            .map(|a| {
                (0..d)
                    .map(|b| {
                        let (ma, mb) = (q.m(a), q.m(b));
                        let rate = zeeman_rate * (ma - mb).abs() + quad_rate * (ma * ma - mb * mb).abs();
                        if a == b {
                            f64::INFINITY
                        } else {
                            1.0 / rate
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(t2, alpha)
    }

    pub fn with_readout_flip(mut self, p: f64) -> Self {
        self.readout_flip = Some(p);
        self
    }
}

/// `rho_ab -> rho_ab exp[-(tau / T2_ab)^alpha]`; populations untouched.
pub fn apply_dephasing(rho: &DensityMatrix, tau: f64, noise: &NoiseModel) -> Result<DensityMatrix> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument("tau must be >= 0".into()));
    }
    let d = rho.q.dim();
    if noise.t2.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: noise.t2.len() });
    }
    let el = CMatrix::from_fn(d, d, |a, b| {
        if a == b {
            rho.elements[(a, a)]
        } else {
            rho.elements[(a, b)] * (-(tau / noise.t2[a][b]).powf(noise.alpha)).exp()
        }
    });
    Ok(DensityMatrix { q: rho.q, elements: el })
}

#[derive(Clone, Debug)]
pub struct ParityOscillation {
    pub phis: Vec<f64>,
    pub samples: Vec<f64>,
    /// Half peak-to-peak amplitude of the fitted fringe.
    pub contrast: f64,
    /// Fitted `phase` in `<Pi> = offset + contrast cos(cycles phi - phase)`.
    pub phase: f64,
    pub offset: f64,
    /// RMS residual of the single-harmonic fit.
    pub residual: f64,
    pub flagged: bool,
}

/// Residual above which a parity fit is flagged.
pub const PARITY_FIT_RESIDUAL_LIMIT: f64 = 1e-3;

/// Samples `<Pi>` after `R_{pi/2}(phi)` on a uniform grid of `n_phi` angles
/// and fits a fringe with `cycles` periods per `2 pi` (`2I` for a full cat).
pub fn simulate_parity_oscillation(rho: &DensityMatrix, n_phi: usize, cycles: u32) -> Result<ParityOscillation> {
    let q = rho.q;
    if n_phi < 4 * q.dim() {
        return Err(Error::InvalidArgument(format!("n_phi must be >= {}", 4 * q.dim())));
    }
    let parity = parity_operator(q);
    let phis: Vec<f64> = (0..n_phi).map(|i| 2.0 * PI * i as f64 / n_phi as f64).collect();
    let samples: Vec<f64> = phis
        .iter()
        .map(|&phi| {
            let u = covariant_rotation(q, PI / 2.0, phi);
            (&parity * &u * &rho.elements * u.adjoint()).trace().re
        })
        .collect();
    // uniform grid: harmonic projections are exact least squares
    let nf = n_phi as f64;
    let offset = samples.iter().sum::<f64>() / nf;
    let w = cycles as f64;
    let a = 2.0 / nf * samples.iter().zip(&phis).map(|(s, p)| s * (w * p).cos()).sum::<f64>();
    let b = 2.0 / nf * samples.iter().zip(&phis).map(|(s, p)| s * (w * p).sin()).sum::<f64>();
    let contrast = (a * a + b * b).sqrt();
    let phase = b.atan2(a);
    let residual = (samples
        .iter()
        .zip(&phis)
        .map(|(s, p)| (s - offset - a * (w * p).cos() - b * (w * p).sin()).powi(2))
        .sum::<f64>()
        / nf)
        .sqrt();
    Ok(ParityOscillation {
        phis,
        samples,
        contrast,
        phase,
        offset,
        residual,
        flagged: residual > PARITY_FIT_RESIDUAL_LIMIT,
    })
}

/// Index of the largest non-constant DFT harmonic of uniformly spaced samples.
pub fn dominant_harmonic(samples: &[f64]) -> usize {
    let n = samples.len();
    (1..=n / 2)
        .map(|h| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, s) in samples.iter().enumerate() {
                let a = 2.0 * PI * (h * i) as f64 / n as f64;
                re += s * a.cos();
                im += s * a.sin();
            }
            (h, re * re + im * im)
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(h, _)| h)
        .unwrap_or(0)
}

/// Covariant Ramsey envelope: normalised transverse spin length
/// `|<I+>| / I` of `rho0` after dephasing for each `tau`. The second
/// analysis pulse's phase sweep maps this length onto the `<Iz>` fringe
/// amplitude.
pub fn ramsey_envelope(rho0: &DensityMatrix, noise: &NoiseModel, taus: &[f64]) -> Result<Vec<f64>> {
    let q = rho0.q;
    let plus = spin_operators(q).raising();
    let norm = (&plus * &rho0.elements).trace().norm();
    taus.iter()
        .map(|&tau| {
            let r = apply_dephasing(rho0, tau, noise)?;
            Ok((&plus * &r.elements).trace().norm() / norm)
        })
        .collect()
}

/// Fits `y = exp[-(tau / T2)^alpha]` by linear regression of
/// `ln(-ln y)` on `ln tau`; points with `y` outside (1e-6, 1 - 1e-9) or
/// `tau <= 0` are skipped. Returns `(T2, alpha)`.
pub fn fit_stretched_exponential(taus: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = taus
        .iter()
        .zip(values)
        .filter(|(t, y)| **t > 0.0 && **y > 1e-6 && **y < 1.0 - 1e-9)
        .map(|(t, y)| (t.ln(), (-y.ln()).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Numerical("too few points for a stretched-exponential fit".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let alpha = sxy / sxx;
    let t2 = (mx - my / alpha).exp();
    Ok((t2, alpha))
}
