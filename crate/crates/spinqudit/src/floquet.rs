//! Cross-coupling of multi-tone covariant drives: the periodic model where
//! every tone also drives the neighbouring transitions detuned by multiples
//! of `f_q`, its Magnus average Hamiltonian and the resulting loss of Rabi
//! contrast.
//!
//! Transition `k` (rows `a = d-k`, `b = d-1-k`) carries
//! `H_ab(t) = -(f/4) c_k e^{-i(k-1) w t} zeta(t)` with
//! `zeta = sum_{n=0}^{2I-1} e^{i n w t}` and `w = 2 pi f_q`. Its period
//! average is `-(f/2) Ix`, a covariant rotation at rate `f/2`.

use crate::linalg::{c, cis, commutator, eigh};
use crate::ode::{Dop853, Dop853Options};
use crate::spincore::{spin_operators, SpinQuantum};
use crate::{CMatrix, Complex64, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCouplingParams {
    /// Drive prefactor `f` (Hz).
    pub f_rabi: f64,
    /// Quadrupole spacing (Hz).
    pub f_q: f64,
}

impl CrossCouplingParams {
    pub fn new(f_rabi: f64, f_q: f64) -> Result<Self> {
        if f_q == 0.0 || !f_q.is_finite() || !f_rabi.is_finite() {
            return Err(Error::InvalidArgument("f_q must be finite and nonzero".into()));
        }
        Ok(Self { f_rabi, f_q })
    }

    pub fn ratio(&self) -> f64 {
        self.f_rabi / self.f_q
    }

    /// Rate of the averaged covariant rotation (Hz).
    pub fn covariant_rate(&self) -> f64 {
        self.f_rabi / 2.0
    }
}

/// Fourier components `H(t) = sum_p H_p e^{i p w t}`, keyed by `p`.
pub fn fourier_components(params: &CrossCouplingParams, q: SpinQuantum) -> Vec<(i64, CMatrix)> {
    let d = q.dim();
    let n = q.two_i() as i64;
    let ladder = q.ladder_coefficients();
    let mut out: Vec<(i64, CMatrix)> = (-(n - 1)..=(n - 1)).map(|p| (p, CMatrix::zeros(d, d))).collect();
    for k in 1..=n as usize {
        let (a, b) = q.transition_levels(k);
        let v = -params.f_rabi / 4.0 * ladder[k - 1];
        for s in 0..n {
            let p = s - (k as i64 - 1);
            let idx = (p + n - 1) as usize;
            out[idx].1[(a, b)] += c(v, 0.0);
            let idx = (-p + n - 1) as usize;
            out[idx].1[(b, a)] += c(v, 0.0);
        }
    }
    out
}

pub fn cross_coupling_hamiltonian(params: &CrossCouplingParams, q: SpinQuantum, t: f64) -> CMatrix {
    let d = q.dim();
    let n = q.two_i() as usize;
    let w = 2.0 * PI * params.f_q;
    let zeta: Complex64 = (0..n).map(|s| cis(s as f64 * w * t)).sum();
    let ladder = q.ladder_coefficients();
    let mut h = CMatrix::zeros(d, d);
    for k in 1..=n {
        let (a, b) = q.transition_levels(k);
        let v = cis(-((k - 1) as f64) * w * t) * zeta * (-params.f_rabi / 4.0 * ladder[k - 1]);
        h[(a, b)] = v;
        h[(b, a)] = v.conj();
    }
    h
}

#[derive(Clone, Debug)]
pub struct AverageHamiltonian {
    /// Period average (Hz), `-(f/2) Ix`.
    pub order0: CMatrix,
    /// First Magnus correction (Hz).
    pub order1: CMatrix,
    /// `f_rabi < f_q` fails: the expansion is not expected to converge.
    pub outside_perturbative_regime: bool,
}

impl AverageHamiltonian {
    pub fn total(&self) -> CMatrix {
        &self.order0 + &self.order1
    }
}

/// `int_0^T dt2 int_0^t2 dt1 e^{i(n t1 + m t2) w}` in closed form.
fn ordered_integral(n: i64, m: i64, w: f64) -> Complex64 {
    let t = 2.0 * PI / w;
    let delta = |x: i64| if x == 0 { 1.0 } else { 0.0 };
    match (n, m) {
        (0, 0) => c(t * t / 2.0, 0.0),
        (0, m) => c(t, 0.0) / c(0.0, m as f64 * w),
        (n, m) => c(t, 0.0) / c(0.0, n as f64 * w) * (delta(n + m) - delta(m)),
    }
}

/// Magnus terms of the Floquet Hamiltonian in Hz (`U(T) = exp(-2 pi i F T)`):
/// `F1 = (i pi / T) int_0^T dt2 int_0^t2 dt1 [H(t1), H(t2)]`.
pub fn average_hamiltonian(params: &CrossCouplingParams, q: SpinQuantum) -> AverageHamiltonian {
    let comps = fourier_components(params, q);
    let w = 2.0 * PI * params.f_q;
    let t = 1.0 / params.f_q.abs();
    let d = q.dim();
    let order0 = comps.iter().find(|(p, _)| *p == 0).map(|(_, m)| m.clone()).unwrap_or_else(|| CMatrix::zeros(d, d));
    let mut order1 = CMatrix::zeros(d, d);
    for (n, hn) in &comps {
        for (m, hm) in &comps {
            let iv = ordered_integral(*n, *m, w);
            if iv.norm() == 0.0 {
                continue;
            }
            order1 += commutator(hn, hm) * iv;
        }
    }
    order1 *= c(0.0, PI / t);
    AverageHamiltonian {
        order0,
        order1,
        outside_perturbative_regime: params.f_rabi.abs() >= params.f_q.abs(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMethod {
    Exact,
    Magnus1,
}

/// Time grid for contrast extraction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub rabi_periods: f64,
    pub samples_per_period: usize,
    /// Refine the best samples by a fine scan and golden-section search.
    pub refine: bool,
    pub tol: f64,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self { rabi_periods: 8.0, samples_per_period: 400, refine: true, tol: 1e-11 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepResult {
    pub ratios: Vec<f64>,
    /// `max <Iz> / I` per ratio.
    pub contrast: Vec<f64>,
    pub method: SweepMethod,
    /// Points where integration failed; their contrast is NaN.
    pub flagged: Vec<bool>,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let method = match self.method {
            SweepMethod::Exact => "exact",
            SweepMethod::Magnus1 => "magnus1",
        };
        let mut s = String::from("ratio,contrast,method\n");
        for (r, ct) in self.ratios.iter().zip(&self.contrast) {
            s.push_str(&format!("{r},{ct},{method}\n"));
        }
        s
    }
}

fn iz_expect(q: SpinQuantum, y: &[Complex64]) -> f64 {
    y.iter().enumerate().map(|(j, z)| z.norm_sqr() * q.m(j)).sum()
}

fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}

struct Trajectory {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Trajectory {
    fn top_candidates(&self, count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.values.len()).collect();
        idx.sort_by(|&a, &b| self.values[b].total_cmp(&self.values[a]));
        idx.truncate(count);
        idx
    }
}

fn exact_contrast(params: &CrossCouplingParams, q: SpinQuantum, grid: &SweepGrid) -> Result<f64> {
    let d = q.dim();
    let n_tr = q.two_i() as usize;
    let w = 2.0 * PI * params.f_q;
    let amp_v: Vec<f64> = q.ladder_coefficients().iter().map(|l| -params.f_rabi / 4.0 * l).collect();
    let amp = amp_v.as_slice();
    // tridiagonal product without building the matrix
    let rhs = move |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        let e1 = cis(w * t);
        let mut zeta = c(0.0, 0.0);
        let mut pw = c(1.0, 0.0);
        for _ in 0..n_tr {
            zeta += pw;
            pw *= e1;
        }
        for z in dy.iter_mut() {
            *z = c(0.0, 0.0);
        }
        let e1c = e1.conj();
        let mut shift = c(1.0, 0.0);
        for k in 1..=n_tr {
            let (a, b) = (d - k, d - 1 - k);
            let v = shift * zeta * amp[k - 1];
            dy[a] += v * y[b];
            dy[b] += v.conj() * y[a];
            shift *= e1c;
        }
        for z in dy.iter_mut() {
            *z *= c(0.0, -2.0 * PI);
        }
    };
    let opts = Dop853Options { rtol: grid.tol, atol: grid.tol * 1e-2, ..Default::default() };
    let period = 1.0 / params.covariant_rate().abs();
    let n = (grid.rabi_periods * grid.samples_per_period as f64).round() as usize;
    let dt = period / grid.samples_per_period as f64;
    let mut y = vec![c(0.0, 0.0); d];
    y[d - 1] = c(1.0, 0.0);
    let mut ode = Dop853::new(d, rhs, opts);
    let mut traj = Trajectory { times: vec![0.0], values: vec![iz_expect(q, &y)] };
    let mut states = vec![y.clone()];
    for i in 1..=n {
        let t = dt * i as f64;
        ode.integrate(dt * (i - 1) as f64, t, &mut y)?;
        traj.times.push(t);
        traj.values.push(iz_expect(q, &y));
        states.push(y.clone());
    }
    let mut best = traj.values.iter().cloned().fold(f64::MIN, f64::max);
    if grid.refine {
        let fine = (1.0 / params.f_q.abs()) / 20.0;
        for i in traj.top_candidates(6) {
            let start = i.saturating_sub(1);
            let stop = (i + 1).min(n);
            let t0 = traj.times[start];
            let t1 = traj.times[stop];
            let m = ((t1 - t0) / fine).ceil().max(4.0) as usize;
            let h = (t1 - t0) / m as f64;
            // fine scan from the stored state
            let mut ys = states[start].clone();
            let mut scan = Dop853::new(d, rhs, opts);
            let mut local = vec![(t0, iz_expect(q, &ys), ys.clone())];
            for j in 1..=m {
                let t = t0 + h * j as f64;
                scan.integrate(t - h, t, &mut ys)?;
                local.push((t, iz_expect(q, &ys), ys.clone()));
            }
            let (jb, _) = local
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                .map(|(j, v)| (j, v.1))
                .unwrap();
            let ja = jb.saturating_sub(1);
            let (ta, ya) = (local[ja].0, local[ja].2.clone());
            let tb = local[(jb + 1).min(m)].0;
            let mut fail = None;
            let v = golden_max(
                |t| {
                    let mut yy = ya.clone();
                    let mut o = Dop853::new(d, rhs, opts);
                    match o.integrate(ta, t, &mut yy) {
                        Ok(()) => iz_expect(q, &yy),
                        Err(e) => {
                            fail = Some(e);
                            f64::MIN
                        }
                    }
                },
                ta,
                tb,
                40,
            );
            if let Some(e) = fail {
                return Err(e);
            }
            best = best.max(v).max(local[jb].1);
        }
    }
    Ok(best / q.spin())
}

fn magnus_contrast(params: &CrossCouplingParams, q: SpinQuantum, grid: &SweepGrid) -> f64 {
    let d = q.dim();
    let f = average_hamiltonian(params, q).total();
    let (vals, vecs) = eigh(&f);
    let mut c0 = vec![c(0.0, 0.0); d];
    for (k, z) in c0.iter_mut().enumerate() {
        *z = vecs[(d - 1, k)].conj();
    }
    let iz_at = |t: f64| {
        let mut s = 0.0;
        for j in 0..d {
            let mut amp = c(0.0, 0.0);
            for k in 0..d {
                amp += vecs[(j, k)] * c0[k] * cis(-2.0 * PI * vals[k] * t);
            }
            s += amp.norm_sqr() * q.m(j);
        }
        s
    };
    let period = 1.0 / params.covariant_rate().abs();
    let n = (grid.rabi_periods * grid.samples_per_period as f64).round() as usize;
    let dt = period / grid.samples_per_period as f64;
    let values: Vec<f64> = (0..=n).map(|i| iz_at(dt * i as f64)).collect();
    let mut best = values.iter().cloned().fold(f64::MIN, f64::max);
    if grid.refine {
        let traj = Trajectory { times: (0..=n).map(|i| dt * i as f64).collect(), values };
        for i in traj.top_candidates(6) {
            let a = traj.times[i.saturating_sub(1)];
            let b = traj.times[(i + 1).min(n)];
            best = best.max(golden_max(iz_at, a, b, 60));
        }
    }
    best / q.spin()
}

/// `max <Iz>/I` from `|-I>` at each ratio `f_rabi / f_q` (with `f_q`
/// fixed), computed in parallel.
pub fn contrast_sweep(
    ratios: &[f64],
    f_q: f64,
    q: SpinQuantum,
    method: SweepMethod,
    grid: &SweepGrid,
) -> Result<SweepResult> {
    if ratios.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidArgument("ratios must be positive".into()));
    }
    let out: Vec<Option<f64>> = ratios
        .par_iter()
        .map(|r| {
            let p = CrossCouplingParams { f_rabi: r * f_q, f_q };
            match method {
                SweepMethod::Exact => exact_contrast(&p, q, grid).ok(),
                SweepMethod::Magnus1 => Some(magnus_contrast(&p, q, grid)),
            }
        })
        .collect();
    Ok(SweepResult {
        ratios: ratios.to_vec(),
        contrast: out.iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
        method,
        flagged: out.iter().map(Option::is_none).collect(),
    })
}

/// Ratios in `[0.3, 3]` where the driven top is chaotic.
pub fn is_chaotic_ratio(r: f64) -> bool {
    (0.3..=3.0).contains(&r)
}

/// Least-squares fit `1 - contrast = A r^slope` over ratios in `[lo, hi]`,
/// skipping chaotic or flagged points. Returns `(slope, A)`.
pub fn power_law_fit(sweep: &SweepResult, lo: f64, hi: f64) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = sweep
        .ratios
        .iter()
        .zip(&sweep.contrast)
        .zip(&sweep.flagged)
        .filter(|((r, ct), fl)| !**fl && **r >= lo && **r <= hi && !is_chaotic_ratio(**r) && **ct < 1.0)
        .map(|((r, ct), _)| (r.ln(), (1.0 - ct).ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Numerical("need two points for a power-law fit".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mx).exp()))
}

/// Logarithmically spaced values from `lo` to `hi`, inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// The averaged generator expressed with spin operators, for checks.
pub fn order0_reference(params: &CrossCouplingParams, q: SpinQuantum) -> CMatrix {
    spin_operators(q).ix.scale(-params.f_rabi / 2.0)
}
