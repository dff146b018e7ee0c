//! Spin-axis measurement tomography: rank-1 effects of `I.n`, design
//! efficiency, shot simulation, maximum-likelihood reconstruction and
//! loglikelihood-ratio validation by parametric bootstrap.

use crate::linalg::{c, eigh, trace_distance};
use crate::spincore::{axis_rotation, DensityMatrix, SpinQuantum};
use crate::{CMatrix, Complex64, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentDesign {
    /// Measurement axes `(theta, phi)` in radians.
    pub axes: Vec<(f64, f64)>,
    pub shots_per_axis: u64,
}

impl ExperimentDesign {
    pub fn new(axes: Vec<(f64, f64)>, shots_per_axis: u64) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidArgument("design needs at least one axis".into()));
        }
        if shots_per_axis == 0 {
            return Err(Error::InvalidArgument("shots_per_axis must be positive".into()));
        }
        if axes.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::InvalidArgument("axis angles must be finite".into()));
        }
        Ok(Self { axes, shots_per_axis })
    }

    pub fn n_axes(&self) -> usize {
        self.axes.len()
    }

    /// `N_axes (d - 1) - (d^2 - 1)`.
    pub fn dof_nominal(&self, q: SpinQuantum) -> i64 {
        let d = q.dim() as i64;
        self.axes.len() as i64 * (d - 1) - (d * d - 1)
    }

    /// Rigid rotation of every axis.
    pub fn rotated(&self, rot: &nalgebra::Rotation3<f64>) -> Self {
        let axes = self
            .axes
            .iter()
            .map(|&(t, p)| {
                let n = rot * nalgebra::Vector3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
                (n.z.clamp(-1.0, 1.0).acos(), n.y.atan2(n.x))
            })
            .collect();
        Self { axes, shots_per_axis: self.shots_per_axis }
    }

    pub fn with_shots(mut self, shots_per_axis: u64) -> Self {
        self.shots_per_axis = shots_per_axis;
        self
    }
}

/// Grid of `4I + 1` equally spaced azimuths at polar angles
/// `pi/4, pi/3, 9 pi/20`, 15 shots per axis (45 axes, 675 shots at `I = 7/2`).
pub fn grid_design(q: SpinQuantum) -> ExperimentDesign {
    let n_phi = 2 * q.two_i() as usize + 1;
    let mut axes = Vec::with_capacity(3 * n_phi);
    for theta in [PI / 4.0, PI / 3.0, 9.0 * PI / 20.0] {
        for n in 0..n_phi {
            axes.push((theta, 2.0 * PI * n as f64 / n_phi as f64));
        }
    }
    ExperimentDesign { axes, shots_per_axis: 15 }
}

/// `n_axes` axes drawn uniformly on the sphere.
pub fn uniform_design(n_axes: usize, shots_per_axis: u64, seed: u64) -> Result<ExperimentDesign> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axes = (0..n_axes)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..=1.0);
            let phi: f64 = rng.random_range(-PI..PI);
            (z.acos(), phi)
        })
        .collect();
    ExperimentDesign::new(axes, shots_per_axis)
}

/// Projectors onto the eigenstates of `I.n`, ordered by descending eigenvalue.
pub fn axis_effects(q: SpinQuantum, theta: f64, phi: f64) -> Vec<CMatrix> {
    let r = axis_rotation(q, theta, phi);
    (0..q.dim())
        .map(|j| {
            let v = r.column(j);
            v * v.adjoint()
        })
        .collect()
}

/// Effect vectors of a whole design, stored flat: effect `(a, j)` occupies
/// `vecs[(a d + j) d ..][..d]`.
#[derive(Clone, Debug)]
pub struct EffectTable {
    pub q: SpinQuantum,
    pub n_axes: usize,
    pub vecs: Vec<Complex64>,
}

impl EffectTable {
    pub fn new(q: SpinQuantum, design: &ExperimentDesign) -> Self {
        let d = q.dim();
        let mut vecs = Vec::with_capacity(design.axes.len() * d * d);
        for &(t, p) in &design.axes {
            let r = axis_rotation(q, t, p);
            for j in 0..d {
                vecs.extend(r.column(j).iter());
            }
        }
        Self { q, n_axes: design.axes.len(), vecs }
    }

    pub fn n_effects(&self) -> usize {
        self.n_axes * self.q.dim()
    }

    #[inline]
    pub fn vector(&self, e: usize) -> &[Complex64] {
        let d = self.q.dim();
        &self.vecs[e * d..(e + 1) * d]
    }

    /// Born probabilities `<v_e|rho|v_e>` for every effect.
    pub fn probabilities(&self, rho: &CMatrix) -> Vec<f64> {
        let d = self.q.dim();
        let flat = row_major(rho);
        (0..self.n_effects()).map(|e| quad_form(&flat, self.vector(e), d)).collect()
    }
}

fn row_major(m: &CMatrix) -> Vec<Complex64> {
    let d = m.nrows();
    (0..d * d).map(|i| m[(i / d, i % d)]).collect()
}

fn from_row_major(v: &[Complex64], d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |a, b| v[a * d + b])
}

#[inline]
fn quad_form(rho: &[Complex64], v: &[Complex64], d: usize) -> f64 {
    let mut acc = c(0.0, 0.0);
    for a in 0..d {
        let row = &rho[a * d..(a + 1) * d];
        let mut s = c(0.0, 0.0);
        for b in 0..d {
            s += row[b] * v[b];
        }
        acc += v[a].conj() * s;
    }
    acc.re
}

/// `F = (1/N) sum_e |E_e>><<E_e|` over all `N = N_axes d` effects, acting on
/// row-major vectorised operators.
pub fn frame_superoperator(q: SpinQuantum, design: &ExperimentDesign) -> CMatrix {
    let table = EffectTable::new(q, design);
    let d = q.dim();
    let n2 = d * d;
    let mut f = vec![c(0.0, 0.0); n2 * n2];
    let mut e = vec![c(0.0, 0.0); n2];
    for k in 0..table.n_effects() {
        let v = table.vector(k);
        for a in 0..d {
            for b in 0..d {
                e[a * d + b] = v[a] * v[b].conj();
            }
        }
        for i in 0..n2 {
            let ei = e[i];
            let row = &mut f[i * n2..(i + 1) * n2];
            for j in i..n2 {
                row[j] += ei * e[j].conj();
            }
        }
    }
    let norm = table.n_effects() as f64;
    CMatrix::from_fn(n2, n2, |i, j| if j >= i { f[i * n2 + j] / norm } else { f[j * n2 + i].conj() / norm })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Efficiency {
    /// `sqrt(Tr F^-1)`, infinite for a rank-deficient frame.
    pub f_te: f64,
    pub rank: usize,
}

/// Eigenvalues below `1e-10` times the largest count as zero.
pub fn tomographic_efficiency(f: &CMatrix) -> Efficiency {
    let (vals, _) = eigh(f);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    let rank = vals.iter().filter(|&&l| l > 1e-10 * top).count();
    let f_te = if rank < f.nrows() { f64::INFINITY } else { vals.iter().map(|l| 1.0 / l).sum::<f64>().sqrt() };
    Efficiency { f_te, rank }
}

/// Analytic `f_te` of a rank-1 projective 2-design under the normalisation of
/// [`frame_superoperator`]: `F = (1 + |1>><<1|) / (d (d + 1))`, so
/// `Tr F^-1 = d + (d^2 - 1) d (d + 1)`.
pub fn two_design_bound(q: SpinQuantum) -> f64 {
    let d = q.dim() as f64;
    (d + (d * d - 1.0) * d * (d + 1.0)).sqrt()
}

/// Per-axis outcome counts, outcomes ordered as in [`axis_effects`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotRecord {
    pub counts: Vec<Vec<u64>>,
    pub seed: u64,
}

impl ShotRecord {
    pub fn validate(&self, q: SpinQuantum, design: &ExperimentDesign) -> Result<()> {
        if self.counts.len() != design.axes.len() {
            return Err(Error::DimensionMismatch { expected: design.axes.len(), got: self.counts.len() });
        }
        for (a, row) in self.counts.iter().enumerate() {
            if row.len() != q.dim() {
                return Err(Error::DimensionMismatch { expected: q.dim(), got: row.len() });
            }
            let s: u64 = row.iter().sum();
            if s != design.shots_per_axis {
                return Err(Error::InvalidArgument(format!(
                    "axis {a}: {s} shots recorded, design has {}",
                    design.shots_per_axis
                )));
            }
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Largest-remainder rounding of `shots_per_axis * p`, so that every axis
    /// sums exactly.
    pub fn expected(rho: &DensityMatrix, design: &ExperimentDesign) -> Result<Self> {
        let table = EffectTable::new(rho.q, design);
        let probs = table.probabilities(&rho.elements);
        let d = rho.q.dim();
        let n = design.shots_per_axis;
        let mut counts = Vec::with_capacity(design.axes.len());
        for a in 0..design.axes.len() {
            let p = clean_probabilities(&probs[a * d..(a + 1) * d])?;
            let exact: Vec<f64> = p.iter().map(|x| x * n as f64).collect();
            let mut row: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
            let mut order: Vec<usize> = (0..d).collect();
            order.sort_by(|&i, &j| (exact[j] - exact[j].floor()).total_cmp(&(exact[i] - exact[i].floor())));
            let missing = n - row.iter().sum::<u64>();
            for &i in order.iter().take(missing as usize) {
                row[i] += 1;
            }
            counts.push(row);
        }
        Ok(Self { counts, seed: 0 })
    }

    /// `axis_index,outcome,count`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("axis_index,outcome,count\n");
        for (a, row) in self.counts.iter().enumerate() {
            for (j, n) in row.iter().enumerate() {
                s.push_str(&format!("{a},{j},{n}\n"));
            }
        }
        s
    }
}

fn clean_probabilities(p: &[f64]) -> Result<Vec<f64>> {
    let clipped: Vec<f64> = p.iter().map(|x| x.max(0.0)).collect();
    let s: f64 = clipped.iter().sum();
    let defect = (s - 1.0).abs().max(p.iter().map(|x| (-x).max(0.0)).fold(0.0, f64::max));
    if defect > 1e-6 {
        return Err(Error::ProbabilityDefect(defect));
    }
    Ok(clipped.iter().map(|x| x / s).collect())
}

fn draw_counts(table: &EffectTable, rho: &CMatrix, shots: u64, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<u64>>> {
    let d = table.q.dim();
    let probs = table.probabilities(rho);
    let mut counts = Vec::with_capacity(table.n_axes);
    for a in 0..table.n_axes {
        let p = clean_probabilities(&probs[a * d..(a + 1) * d])?;
        let mut cdf = p.clone();
        for j in 1..d {
            cdf[j] += cdf[j - 1];
        }
        let mut row = vec![0u64; d];
        for _ in 0..shots {
            let u: f64 = rng.random();
            let j = cdf.iter().position(|&x| u < x).unwrap_or_else(|| p.iter().rposition(|&x| x > 0.0).unwrap_or(d - 1));
            row[j] += 1;
        }
        counts.push(row);
    }
    Ok(counts)
}

/// Multinomial shots from `Tr(E rho)` on every axis; deterministic in `seed`.
pub fn simulate_shots(rho: &DensityMatrix, design: &ExperimentDesign, seed: u64) -> Result<ShotRecord> {
    let table = EffectTable::new(rho.q, design);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = draw_counts(&table, &rho.elements, design.shots_per_axis, &mut rng)?;
    Ok(ShotRecord { counts, seed })
}

/// Floor applied to probabilities inside logarithms.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleOptions {
    /// Stop when a full-strength step gains less loglikelihood than this.
    pub tol: f64,
    pub max_iter: usize,
    /// Largest step parameter; above 1 the update extrapolates past `R rho R`.
    pub max_step: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 5000, max_step: 4.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MleResult {
    #[serde(with = "density_serde")]
    pub rho: DensityMatrix,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Loglikelihood after every accepted step, starting from the initial state.
    pub loglik_history: Vec<f64>,
}

mod density_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Raw {
        two_i: u32,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    }

    pub fn serialize<S: Serializer>(rho: &DensityMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
        let d = rho.q.dim();
        let raw = Raw {
            two_i: rho.q.two_i(),
            re: (0..d).map(|a| (0..d).map(|b| rho.elements[(a, b)].re).collect()).collect(),
            im: (0..d).map(|a| (0..d).map(|b| rho.elements[(a, b)].im).collect()).collect(),
        };
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<DensityMatrix, D::Error> {
        let raw = Raw::deserialize(de)?;
        let q = SpinQuantum::new(raw.two_i).map_err(serde::de::Error::custom)?;
        let d = q.dim();
        if raw.re.len() != d || raw.im.len() != d || raw.re.iter().chain(&raw.im).any(|r| r.len() != d) {
            return Err(serde::de::Error::custom("density matrix has the wrong shape"));
        }
        let m = CMatrix::from_fn(d, d, |a, b| c(raw.re[a][b], raw.im[a][b]));
        DensityMatrix::new(q, m).map_err(serde::de::Error::custom)
    }
}

/// `sum n log max(p, floor)` over all effects.
pub fn loglik(record: &ShotRecord, design: &ExperimentDesign, rho: &DensityMatrix) -> Result<f64> {
    record.validate(rho.q, design)?;
    let table = EffectTable::new(rho.q, design);
    let probs = table.probabilities(&rho.elements);
    Ok(record.counts.iter().flatten().zip(&probs).map(|(&n, &p)| if n > 0 { n as f64 * p.max(PROBABILITY_FLOOR).ln() } else { 0.0 }).sum())
}

struct Problem<'a> {
    d: usize,
    table: &'a EffectTable,
    /// (effect index, count) for nonzero counts only.
    data: Vec<(usize, f64)>,
    total: f64,
}

impl Problem<'_> {
    fn loglik(&self, rho: &[Complex64]) -> f64 {
        self.data.iter().map(|&(e, n)| n * quad_form(rho, self.table.vector(e), self.d).max(PROBABILITY_FLOOR).ln()).sum()
    }

    /// `R = (1/N) sum n / p |v><v|`, row-major.
    fn r_operator(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let d = self.d;
        out.iter_mut().for_each(|z| *z = c(0.0, 0.0));
        for &(e, n) in &self.data {
            let v = self.table.vector(e);
            let w = n / (quad_form(rho, v, d).max(PROBABILITY_FLOOR) * self.total);
            for a in 0..d {
                let va = v[a] * w;
                let row = &mut out[a * d..(a + 1) * d];
                for b in 0..d {
                    row[b] += va * v[b].conj();
                }
            }
        }
    }
}

fn matmul(a: &[Complex64], b: &[Complex64], out: &mut [Complex64], d: usize) {
    for i in 0..d {
        let row = &mut out[i * d..(i + 1) * d];
        row.iter_mut().for_each(|z| *z = c(0.0, 0.0));
        for k in 0..d {
            let aik = a[i * d + k];
            let brow = &b[k * d..(k + 1) * d];
            for j in 0..d {
                row[j] += aik * brow[j];
            }
        }
    }
}

/// Diluted `R rho R` iteration: `rho <- M rho M / Tr` with
/// `M = (1 - eps) 1 + eps R`. `eps` starts at 1, halves whenever the
/// loglikelihood would decrease and grows by 1.5 after each accepted step,
/// so the accepted sequence is non-decreasing.
pub fn mle_reconstruct(record: &ShotRecord, design: &ExperimentDesign, q: SpinQuantum, opts: &MleOptions) -> Result<MleResult> {
    mle_reconstruct_from(record, design, &DensityMatrix::maximally_mixed(q), opts)
}

/// As [`mle_reconstruct`], starting from `init` (should be full rank).
pub fn mle_reconstruct_from(
    record: &ShotRecord,
    design: &ExperimentDesign,
    init: &DensityMatrix,
    opts: &MleOptions,
) -> Result<MleResult> {
    let q = init.q;
    record.validate(q, design)?;
    let table = EffectTable::new(q, design);
    mle_with_table(record, &table, init, opts)
}

fn mle_with_table(record: &ShotRecord, table: &EffectTable, init: &DensityMatrix, opts: &MleOptions) -> Result<MleResult> {
    let d = table.q.dim();
    let data: Vec<(usize, f64)> =
        record.counts.iter().flatten().enumerate().filter(|(_, &n)| n > 0).map(|(e, &n)| (e, n as f64)).collect();
    let total: f64 = data.iter().map(|x| x.1).sum();
    if total == 0.0 {
        return Err(Error::InvalidArgument("record has no shots".into()));
    }
    let prob = Problem { d, table, data, total };
    let mut rho = row_major(&init.elements);
    let mut ll = prob.loglik(&rho);
    let mut history = vec![ll];
    let mut r = vec![c(0.0, 0.0); d * d];
    let mut m = vec![c(0.0, 0.0); d * d];
    let mut tmp = vec![c(0.0, 0.0); d * d];
    let mut cand = vec![c(0.0, 0.0); d * d];
    let mut eps: f64 = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        prob.r_operator(&rho, &mut r);
        let mut accepted = false;
        while eps > 1e-12 {
            for i in 0..d * d {
                m[i] = r[i] * eps;
            }
            for a in 0..d {
                m[a * d + a] += 1.0 - eps;
            }
            matmul(&m, &rho, &mut tmp, d);
            matmul(&tmp, &m, &mut cand, d);
            let tr: f64 = (0..d).map(|a| cand[a * d + a].re).sum();
            cand.iter_mut().for_each(|z| *z /= tr);
            // restore exact Hermiticity
            for a in 0..d {
                cand[a * d + a].im = 0.0;
                for b in a + 1..d {
                    let h = (cand[a * d + b] + cand[b * d + a].conj()) * 0.5;
                    cand[a * d + b] = h;
                    cand[b * d + a] = h.conj();
                }
            }
            let ll_new = prob.loglik(&cand);
            if ll_new >= ll {
                let gain = ll_new - ll;
                std::mem::swap(&mut rho, &mut cand);
                ll = ll_new;
                history.push(ll);
                accepted = true;
                if gain < opts.tol && eps >= 1.0 {
                    converged = true;
                }
                eps = (eps * 1.5).min(opts.max_step);
                break;
            }
            eps *= 0.5;
        }
        if !accepted {
            // no ascent direction left at working precision
            converged = true;
        }
        if converged {
            break;
        }
    }
    let rho_m = from_row_major(&rho, d);
    let rho = DensityMatrix::new(table.q, rho_m).map_err(|e| Error::Numerical(format!("MLE left the state space: {e}")))?;
    Ok(MleResult { rho, loglik: ll, iterations, converged, loglik_history: history })
}

/// `lambda = -2 log(L(rho) / L_saturated)` with the per-axis empirical
/// frequencies as the saturated model.
pub fn loglik_ratio(record: &ShotRecord, design: &ExperimentDesign, rho: &DensityMatrix) -> Result<f64> {
    record.validate(rho.q, design)?;
    let table = EffectTable::new(rho.q, design);
    Ok(lambda_with_table(record, &table, &rho.elements))
}

fn lambda_with_table(record: &ShotRecord, table: &EffectTable, rho: &CMatrix) -> f64 {
    let probs = table.probabilities(rho);
    let d = table.q.dim();
    let mut lam = 0.0;
    for (a, row) in record.counts.iter().enumerate() {
        let n_axis: u64 = row.iter().sum();
        for (j, &n) in row.iter().enumerate() {
            if n > 0 {
                let f = n as f64 / n_axis as f64;
                lam += 2.0 * n as f64 * (f / probs[a * d + j].max(PROBABILITY_FLOOR)).ln();
            }
        }
    }
    lam.max(0.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub lambda_observed: f64,
    pub null_samples: Vec<f64>,
    /// Fraction of `null_samples` at or above `lambda_observed`.
    pub p_value: f64,
    pub dof_nominal: i64,
    /// Samples dropped because the inner reconstruction did not converge.
    pub n_excluded: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapOptions {
    pub n_samples: usize,
    pub seed: u64,
    pub mle: MleOptions,
    /// Inner reconstructions start from `(1 - w) rho_mle + w 1/d`.
    pub warm_start_mix: f64,
}

impl Default for BootstrapOptions {
    fn default() -> Self {
        Self { n_samples: 1000, seed: 0, mle: MleOptions::default(), warm_start_mix: 0.1 }
    }
}

/// Parametric bootstrap of the loglikelihood ratio. `design` is the design
/// assumed by the analysis; data are simulated from `rho_mle` through the
/// same design. Sample `i` uses the ChaCha stream `i + 1` of `seed`.
pub fn parametric_bootstrap(
    record: &ShotRecord,
    rho_mle: &DensityMatrix,
    design: &ExperimentDesign,
    opts: &BootstrapOptions,
) -> Result<ValidationReport> {
    if opts.n_samples < 100 {
        return Err(Error::InvalidArgument("parametric bootstrap needs at least 100 samples".into()));
    }
    let q = rho_mle.q;
    record.validate(q, design)?;
    let table = EffectTable::new(q, design);
    let lambda_observed = lambda_with_table(record, &table, &rho_mle.elements);
    let d = q.dim();
    let w = opts.warm_start_mix.clamp(0.0, 1.0);
    let init_m = rho_mle.elements.scale(1.0 - w) + CMatrix::identity(d, d).scale(w / d as f64);
    let init = DensityMatrix { q, elements: init_m };
    let samples: Vec<Result<Option<f64>>> = (0..opts.n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(i as u64 + 1);
            let counts = draw_counts(&table, &rho_mle.elements, design.shots_per_axis, &mut rng)?;
            let rec = ShotRecord { counts, seed: opts.seed };
            let fit = mle_with_table(&rec, &table, &init, &opts.mle)?;
            Ok(fit.converged.then(|| lambda_with_table(&rec, &table, &fit.rho.elements)))
        })
        .collect();
    let mut null_samples = Vec::with_capacity(samples.len());
    let mut n_excluded = 0;
    for s in samples {
        match s? {
            Some(l) => null_samples.push(l),
            None => n_excluded += 1,
        }
    }
    if null_samples.is_empty() {
        return Err(Error::Numerical("no bootstrap sample converged".into()));
    }
    let p_value = null_samples.iter().filter(|&&l| l >= lambda_observed).count() as f64 / null_samples.len() as f64;
    Ok(ValidationReport { lambda_observed, null_samples, p_value, dof_nominal: design.dof_nominal(q), n_excluded })
}

/// Phase of the `2I`-harmonic parity fringe expected from
/// `(|I> + e^{i xi}|-I>)/sqrt 2`, in the convention of
/// [`crate::dynamics::simulate_parity_oscillation`].
pub fn ideal_fringe_phase(q: SpinQuantum, xi: f64) -> Result<f64> {
    let cat = crate::dynamics::z_cat(q, xi).to_density();
    let osc = crate::dynamics::simulate_parity_oscillation(&cat, 4 * q.dim(), q.two_i())?;
    Ok(osc.phase)
}

/// `F = (p_{+I} + p_{-I}) / 2 + C/2 cos(fringe_phase - ideal_phase)`, an
/// estimate of the overlap with `(|I> + e^{i xi}|-I>)/sqrt 2` from the end
/// populations and the `2I`-harmonic parity fringe.
pub fn reduced_parity_fidelity(populations: &[f64], parity_contrast: f64, fringe_phase: f64, ideal_phase: f64) -> Result<f64> {
    if populations.len() < 2 || populations.iter().any(|p| !(-1e-12..=1.0 + 1e-12).contains(p)) {
        return Err(Error::InvalidArgument("populations must be probabilities".into()));
    }
    if !(0.0..=1.0 + 1e-9).contains(&parity_contrast) {
        return Err(Error::InvalidArgument("parity contrast must lie in [0, 1]".into()));
    }
    let ends = populations[0] + populations[populations.len() - 1];
    Ok(ends / 2.0 + parity_contrast / 2.0 * (fringe_phase - ideal_phase).cos())
}

/// Median over a slice (copies and sorts).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Trace distance between a reconstruction and a reference.
pub fn reconstruction_error(result: &MleResult, truth: &DensityMatrix) -> f64 {
    trace_distance(&result.rho.elements, &truth.elements)
}
