use crate::config::{Axis, CatMethod, ProjectionChoice, RunConfig, StateSpec, TomographyMode, STATE_PRESETS};
use crate::svg::{heatmap, LinePlot, Series};
use crate::CliError;
use serde_json::{json, Value};
use spinqudit::catcode::{bias_preservation_check, codewords, kl_check, logical_gate, ErrorSet, LogicalGate};
use spinqudit::dynamics::*;
use spinqudit::floquet::{contrast_sweep, logspace, power_law_fit, SweepGrid, SweepMethod};
use spinqudit::hamiltonian::{b1_for_covariant_rabi, DriveTone, FrameDefinition};
use spinqudit::linalg::{c, uhlmann_fidelity};
use spinqudit::spincore::{spin_coherent_state, spin_operators, DensityMatrix, PureState, SpinQuantum};
use spinqudit::tomography::*;
use spinqudit::wigner::{wigner_grid, Projection, WignerFunction};
use spinqudit::{CMatrix, CVector};
use std::f64::consts::PI;
use std::path::PathBuf;

/// Fixed Wigner colour scale (the largest value any d = 8 state reaches is
/// about 1.1, at the pole of an extremal eigenstate).
pub const WIGNER_COLOR_LIMIT: f64 = 1.2;

pub struct Outputs {
    dir: PathBuf,
    pub files: Vec<String>,
    pub summary: Vec<String>,
}

impl Outputs {
    pub fn new(dir: PathBuf) -> Self {
        Self { dir, files: Vec::new(), summary: Vec::new() }
    }

    pub fn write(&mut self, name: &str, content: &str) -> Result<(), CliError> {
        std::fs::write(self.dir.join(name), content)?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &impl serde::Serialize) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Numerical(format!("serialise {name}: {e}")))?;
        self.write(name, &text)
    }

    fn note(&mut self, line: String) {
        self.summary.push(line);
    }
}

fn m_label(q: SpinQuantum, j: usize) -> String {
    let two_m = q.two_m(j);
    if q.is_half_odd() {
        format!("{}{}/2", if two_m > 0 { "+" } else { "" }, two_m)
    } else {
        format!("{}{}", if two_m > 0 { "+" } else { "" }, two_m / 2)
    }
}

fn population_header(q: SpinQuantum) -> String {
    (0..q.dim()).map(|j| format!("pop_m{}", m_label(q, j))).collect::<Vec<_>>().join(",")
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(",")
}

fn state_json(psi: &PureState) -> Value {
    json!({
        "two_i": psi.q.two_i(),
        "re": psi.amplitudes.iter().map(|z| z.re).collect::<Vec<_>>(),
        "im": psi.amplitudes.iter().map(|z| z.im).collect::<Vec<_>>(),
        "populations": psi.populations(),
    })
}

fn subspace(cfg: &RunConfig, q: SpinQuantum, requested: Option<u32>, field: &str) -> Result<u32, CliError> {
    let sub = requested.unwrap_or(q.two_i());
    if sub == 0 || sub > q.two_i() || !(q.two_i() - sub).is_multiple_of(2) {
        return Err(CliError::Config(format!(
            "{field}: 2I' = {sub} must be positive, at most {} and of the same parity",
            cfg.spin.two_i
        )));
    }
    Ok(sub)
}

/// Tones of a rotation within the `sub` subspace with RSS amplitude
/// `b1 sqrt(sub)` and their Rabi frequency.
fn subspace_tones(q: SpinQuantum, sub: u32, b1: f64, gamma: f64) -> Result<(Vec<DriveTone>, f64), CliError> {
    if sub == q.two_i() {
        let tones = (1..=q.two_i() as usize).map(|k| DriveTone { transition: k, freq: 0.0, phase: 0.0, b1 }).collect();
        return Ok((tones, b1 * gamma / 2.0));
    }
    let amps = subspace_rotation_amplitudes(q, sub, b1 * (sub as f64).sqrt())?;
    let rate = subspace_rabi_frequency(q, sub, &amps, gamma);
    let tones = amps
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 0.0)
        .map(|(i, a)| DriveTone { transition: i + 1, freq: 0.0, phase: 0.0, b1: *a })
        .collect();
    Ok((tones, rate))
}

/// On-resonance frame of the configured static Hamiltonian.
fn resonant_frame(cfg: &RunConfig, q: SpinQuantum) -> Result<FrameDefinition, CliError> {
    Ok(FrameDefinition::resonant(&cfg.static_params()?, q)?)
}

pub fn rabi(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let q = cfg.quantum()?;
    let frame = &resonant_frame(cfg, q)?;
    let gamma = cfg.static_params.gamma_hz_per_tesla;
    let sub = subspace(cfg, q, cfg.rabi.subspace_two_i, "rabi.subspace_two_i")?;
    let f_nominal = cfg.f_rabi(cfg.rabi.amplitude_mv);
    let (tones, rate) = subspace_tones(q, sub, b1_for_covariant_rabi(f_nominal, gamma), gamma)?;
    let start = PureState::basis(q, -(sub as i32))?;
    let sched = PulseSchedule::new(vec![Segment::Pulse { duration: cfg.rabi.periods / rate, tones }]);
    let res = evolve_grf(&start, &sched, frame, gamma, cfg.rabi.samples)?;
    let mut csv = format!("time_s,iz_expect_hbar,{}\n", population_header(q));
    for ((t, iz), p) in res.times.iter().zip(&res.iz_expect).zip(&res.populations) {
        csv.push_str(&format!("{t:.12e},{iz:.12e},{}\n", join(p)));
    }
    out.write("rabi.csv", &csv)?;
    let iz_plot = LinePlot {
        title: "covariant Rabi oscillation",
        x_label: "time (ms)",
        y_label: "<Iz>",
        log_x: false,
        log_y: false,
        series: vec![Series { label: "<Iz>", points: res.times.iter().zip(&res.iz_expect).map(|(t, v)| (t * 1e3, *v)).collect(), markers: false }],
        vlines: vec![],
    };
    out.write("rabi_iz.svg", &iz_plot.render())?;
    let labels: Vec<String> = (0..q.dim()).map(|j| format!("m = {}", m_label(q, j))).collect();
    let pop_plot = LinePlot {
        title: "level populations",
        x_label: "time (ms)",
        y_label: "population",
        log_x: false,
        log_y: false,
        series: (0..q.dim())
            .map(|j| Series {
                label: &labels[j],
                points: res.times.iter().zip(&res.populations).map(|(t, p)| (t * 1e3, p[j])).collect(),
                markers: false,
            })
            .collect(),
        vlines: vec![],
    };
    out.write("rabi_populations.svg", &pop_plot.render())?;

    let mut summary = json!({
        "subspace_two_i": sub,
        "f_rabi_hz": rate,
        "period_s": 1.0 / rate,
        "duration_s": cfg.rabi.periods / rate,
    });
    out.note(format!("rabi: f_Rabi = {rate:.6} Hz, period = {:.6} ms", 1e3 / rate));

    if !cfg.rabi.sweep_mv.is_empty() {
        let half = sub as f64 / 2.0;
        let mut rows = String::from("amplitude_mv,f_rabi_fit_hz\n");
        let (mut sxy, mut sxx) = (0.0, 0.0);
        for &a in &cfg.rabi.sweep_mv {
            let f_cfg = cfg.f_rabi(a);
            let (tones, rate_a) = subspace_tones(q, sub, b1_for_covariant_rabi(f_cfg, gamma), gamma)?;
            // read the rotation angle off <Iz> inside the first half period
            let t = 0.3 / rate_a;
            let s = PulseSchedule::new(vec![Segment::Pulse { duration: t, tones }]);
            let r = evolve_grf(&start, &s, frame, gamma, 0)?;
            let iz = *r.iz_expect.last().expect("final sample");
            let f_fit = (-iz / half).clamp(-1.0, 1.0).acos() / (2.0 * PI * t) * (f_nominal / rate);
            rows.push_str(&format!("{a:.12e},{f_fit:.12e}\n"));
            sxy += a * f_fit;
            sxx += a * a;
        }
        let kappa_fit = sxy / sxx;
        out.write("rabi_sweep.csv", &rows)?;
        summary["kappa_fit_hz_per_mv"] = json!(kappa_fit);
        out.note(format!("rabi: fitted kappa = {kappa_fit:.9} Hz/mV (configured {})", cfg.calibration.kappa_hz_per_mv));
    }
    out.json("rabi_summary.json", &summary)
}

fn grid_json_free_points(rho: &DensityMatrix, n_theta: usize, n_phi: usize) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let g = wigner_grid(rho, n_theta, n_phi, Projection::Hammer)?;
    Ok(g.points().iter().map(|p| (p[2], p[3], p[4])).collect())
}

pub fn cat(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let q = cfg.quantum()?;
    let frame = &resonant_frame(cfg, q)?;
    let gamma = cfg.static_params.gamma_hz_per_tesla;
    let f = cfg.f_rabi(cfg.cat.amplitude_mv);
    let sub = subspace(cfg, q, cfg.cat.subspace_two_i, "cat.subspace_two_i")?;
    let (sched, start) = match cfg.cat.method {
        CatMethod::Givens => {
            if cfg.cat.orientation != Axis::Z {
                return Err(CliError::Config("cat.orientation: the Givens chain prepares z cats only".into()));
            }
            (givens_cat_sequence(q, sub, f, gamma)?, PureState::basis(q, -(sub as i32))?)
        }
        CatMethod::Snap => {
            if sub != q.two_i() {
                return Err(CliError::Config("cat.subspace_two_i: the SNAP recipe acts on the full spin".into()));
            }
            let orient = match cfg.cat.orientation {
                Axis::X => CatOrientation::X,
                Axis::Z => CatOrientation::Z,
            };
            (snap_cat_sequence(q, f, orient, gamma), PureState::basis(q, -(q.two_i() as i32))?)
        }
    };
    out.json("schedule.json", &sched)?;
    let res = evolve_grf(&start, &sched, frame, gamma, 0)?;
    let psi = res.final_state().clone();

    let mut steps = format!("step,time_s,{}\n", population_header(q));
    for (i, (t, p)) in res.times.iter().zip(&res.populations).enumerate() {
        steps.push_str(&format!("{i},{t:.12e},{}\n", join(p)));
    }
    out.write("steps.csv", &steps)?;

    let (hi, lo) = (q.index_of(sub as i32)?, q.index_of(-(sub as i32))?);
    let (target, xi) = match (cfg.cat.method, cfg.cat.orientation) {
        (CatMethod::Snap, Axis::Z) => (z_cat(q, PI / 2.0), PI / 2.0),
        (CatMethod::Snap, Axis::X) => {
            let (_, v) = virtual_snap(frame, q, &alternating_snap_phases(q))?;
            (spin_coherent_state(q, PI / 2.0, PI).apply(&v), f64::NAN)
        }
        (CatMethod::Givens, _) => {
            let xi = (psi.amplitudes[lo] / psi.amplitudes[hi]).arg();
            let mut v = CVector::zeros(q.dim());
            v[hi] = c(1.0 / 2f64.sqrt(), 0.0);
            v[lo] = spinqudit::linalg::cis(xi) / 2f64.sqrt();
            (PureState::new(q, v)?, xi)
        }
    };
    let fid = psi.overlap(&target).norm_sqr();
    let rho = psi.to_density();
    let par = simulate_parity_oscillation(&rho, cfg.cat.n_phi.max(4 * q.dim()), sub)?;
    let harmonic = dominant_harmonic(&par.samples);
    let mut pcsv = String::from("phi_rad,parity\n");
    for (p, s) in par.phis.iter().zip(&par.samples) {
        pcsv.push_str(&format!("{p:.12e},{s:.12e}\n"));
    }
    out.write("parity.csv", &pcsv)?;
    let parity_plot = LinePlot {
        title: "parity oscillation",
        x_label: "analysis phase (rad)",
        y_label: "<parity>",
        log_x: false,
        log_y: false,
        series: vec![Series { label: "<parity>", points: par.phis.iter().copied().zip(par.samples.iter().copied()).collect(), markers: true }],
        vlines: vec![],
    };
    out.write("parity.svg", &parity_plot.render())?;
    let pts = grid_json_free_points(&rho, 91, 181)?;
    out.write("wigner_hammer.svg", &heatmap("Wigner function of the final state", &pts, (2f64.sqrt() * 2.0, 2f64.sqrt()), WIGNER_COLOR_LIMIT))?;

    let mut decay = Vec::new();
    if !cfg.cat.dephasing_taus_s.is_empty() {
        let noise = cfg.noise_model()?.ok_or_else(|| CliError::Config("cat.dephasing_taus_s: needs a noise model".into()))?;
        let mut dcsv = String::from("tau_s,parity_contrast\n");
        for &tau in &cfg.cat.dephasing_taus_s {
            let r = apply_dephasing(&rho, tau, &noise)?;
            let p = simulate_parity_oscillation(&r, cfg.cat.n_phi.max(4 * q.dim()), sub)?;
            dcsv.push_str(&format!("{tau:.12e},{:.12e}\n", p.contrast));
            decay.push((tau, p.contrast));
        }
        out.write("cat_decay.csv", &dcsv)?;
        let decay_plot = LinePlot {
            title: "parity contrast decay",
            x_label: "delay (ms)",
            y_label: "contrast",
            log_x: false,
            log_y: false,
            series: vec![Series { label: "contrast", points: decay.iter().map(|(t, v)| (t * 1e3, *v)).collect(), markers: true }],
            vlines: vec![],
        };
        out.write("cat_decay.svg", &decay_plot.render())?;
    }
    let report = json!({
        "state": state_json(&psi),
        "target_fidelity": fid,
        "cat_phase_rad": if xi.is_nan() { Value::Null } else { json!(xi) },
        "parity_contrast": par.contrast,
        "parity_phase_rad": par.phase,
        "parity_harmonic": harmonic,
        "parity_fit_flagged": par.flagged,
        "decay": decay.iter().map(|(t, v)| json!({"tau_s": t, "contrast": v})).collect::<Vec<_>>(),
    });
    out.json("cat.json", &report)?;
    out.note(format!("cat: fidelity {fid:.12}, parity contrast {:.9}, harmonic {harmonic}", par.contrast));
    Ok(())
}

fn read_state_file(q: SpinQuantum, path: &str) -> Result<DensityMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("state file {path}: {e}")))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("state file {path}: {e}")))?;
    let v = v.get("state").cloned().unwrap_or(v);
    let two_i = v["two_i"].as_u64().ok_or_else(|| CliError::Config(format!("state file {path}: missing two_i")))?;
    if two_i as u32 != q.two_i() {
        return Err(CliError::Config(format!("state file {path}: two_i {two_i} differs from spin.two_i {}", q.two_i())));
    }
    let bad = || CliError::Config(format!("state file {path}: expected re/im amplitude vectors or matrices"));
    let re = v["re"].as_array().ok_or_else(bad)?;
    let im = v["im"].as_array().ok_or_else(bad)?;
    let d = q.dim();
    let num = |x: &Value| x.as_f64().ok_or_else(bad);
    if re.first().is_some_and(Value::is_array) {
        let mut m = CMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                m[(a, b)] = c(num(&re[a][b])?, num(&im[a][b])?);
            }
        }
        Ok(DensityMatrix::new(q, m)?)
    } else {
        if re.len() != d || im.len() != d {
            return Err(bad());
        }
        let mut amps = CVector::zeros(d);
        for j in 0..d {
            amps[j] = c(num(&re[j])?, num(&im[j])?);
        }
        Ok(PureState::normalized(q, amps)?.to_density())
    }
}

pub fn resolve_state(q: SpinQuantum, spec: &StateSpec) -> Result<DensityMatrix, CliError> {
    Ok(match spec {
        StateSpec::Eigenstate { two_m } => PureState::basis(q, *two_m)
            .map_err(|e| CliError::Config(format!("eigenstate: {e} (presets: {STATE_PRESETS:?})")))?
            .to_density(),
        StateSpec::Scs { theta_rad, phi_rad } => spin_coherent_state(q, *theta_rad, *phi_rad).to_density(),
        StateSpec::Cat { axis: Axis::Z, xi_rad } => z_cat(q, *xi_rad).to_density(),
        StateSpec::Cat { axis: Axis::X, xi_rad } => {
            let plus = spin_coherent_state(q, PI / 2.0, 0.0).amplitudes;
            let minus = spin_coherent_state(q, PI / 2.0, PI).amplitudes;
            PureState::normalized(q, plus + minus * spinqudit::linalg::cis(*xi_rad))?.to_density()
        }
        StateSpec::Mixed => DensityMatrix::maximally_mixed(q),
        StateSpec::File { path } => read_state_file(q, path)?,
    })
}

fn read_record(cfg: &RunConfig) -> Result<ShotRecord, CliError> {
    let path = cfg
        .tomography
        .record_file
        .as_ref()
        .ok_or_else(|| CliError::Config("tomography.record_file: required for reconstruct and validate".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("record file {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("record file {path}: {e}")))
}

pub fn tomography(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let q = cfg.quantum()?;
    let t = &cfg.tomography;
    let design = grid_design(q).with_shots(t.shots_per_axis);
    let target = resolve_state(q, &t.target)?;
    let opts = MleOptions { tol: t.tol, max_iter: t.max_iter, ..Default::default() };
    out.json("design.json", &design)?;
    match t.mode {
        TomographyMode::Simulate => {
            let eff = tomographic_efficiency(&frame_superoperator(q, &design));
            let record = simulate_shots(&target, &design, cfg.seed)?;
            out.json("shots.json", &record)?;
            out.write("counts.csv", &record.to_csv())?;
            out.json(
                "efficiency.json",
                &json!({
                    "f_te": if eff.f_te.is_finite() { json!(eff.f_te) } else { json!("inf") },
                    "frame_rank": eff.rank,
                    "two_design_bound": two_design_bound(q),
                    "n_axes": design.n_axes(),
                    "total_shots": record.total(),
                    "dof_nominal": design.dof_nominal(q),
                }),
            )?;
            out.note(format!("tomography: f_te = {:.4}, {} shots", eff.f_te, record.total()));
        }
        TomographyMode::Reconstruct => {
            let record = read_record(cfg)?;
            record.validate(q, &design)?;
            let m = mle_reconstruct(&record, &design, q, &opts)?;
            let fid = uhlmann_fidelity(&m.rho.elements, &target.elements);
            out.json("mle.json", &m)?;
            out.json(
                "reconstruction.json",
                &json!({"fidelity_to_target": fid, "loglik": m.loglik, "iterations": m.iterations, "converged": m.converged}),
            )?;
            out.note(format!("tomography: fidelity {fid:.6} after {} iterations", m.iterations));
        }
        TomographyMode::Validate => {
            let record = read_record(cfg)?;
            record.validate(q, &design)?;
            let m = mle_reconstruct(&record, &design, q, &opts)?;
            let bopts = BootstrapOptions { n_samples: t.bootstrap_samples, seed: cfg.seed, mle: opts, ..Default::default() };
            let rep = parametric_bootstrap(&record, &m.rho, &design, &bopts)?;
            out.json("validation.json", &rep)?;
            let mut csv = String::from("sample,lambda\n");
            for (i, l) in rep.null_samples.iter().enumerate() {
                csv.push_str(&format!("{i},{l:.12e}\n"));
            }
            out.write("lambda_null.csv", &csv)?;
            let (lo, hi) = rep.null_samples.iter().fold((f64::MAX, f64::MIN), |(a, b), &l| (a.min(l), b.max(l)));
            let (lo, hi) = (lo.min(rep.lambda_observed), hi.max(rep.lambda_observed));
            let bins = 30;
            let width = ((hi - lo) / bins as f64).max(1e-12);
            let mut counts = vec![0usize; bins];
            for &l in &rep.null_samples {
                counts[(((l - lo) / width) as usize).min(bins - 1)] += 1;
            }
            let hist = LinePlot {
                title: "bootstrap distribution of the loglikelihood ratio",
                x_label: "lambda",
                y_label: "samples per bin",
                log_x: false,
                log_y: false,
                series: vec![Series {
                    label: "null",
                    points: counts.iter().enumerate().map(|(i, n)| (lo + (i as f64 + 0.5) * width, *n as f64)).collect(),
                    markers: true,
                }],
                vlines: vec![rep.lambda_observed],
            };
            out.write("lambda_hist.svg", &hist.render())?;
            out.note(format!("tomography: lambda = {:.3}, p = {:.4}, dof = {}", rep.lambda_observed, rep.p_value, rep.dof_nominal));
        }
        TomographyMode::Roundtrip => {
            let mut csv = String::from("seed,fidelity\n");
            let mut fids = Vec::with_capacity(t.roundtrip_seeds);
            for s in 0..t.roundtrip_seeds as u64 {
                let seed = cfg.seed + s;
                let r = simulate_shots(&target, &design, seed)?;
                let m = mle_reconstruct(&r, &design, q, &opts)?;
                let f = uhlmann_fidelity(&m.rho.elements, &target.elements);
                csv.push_str(&format!("{seed},{f:.12e}\n"));
                fids.push(f);
            }
            out.write("roundtrip.csv", &csv)?;
            let med = median(&fids);
            out.json("roundtrip.json", &json!({"median_fidelity": med, "seeds": fids.len()}))?;
            out.note(format!("tomography: median fidelity {med:.4} over {} seeds", fids.len()));
        }
    }
    Ok(())
}

pub fn wigner(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let q = cfg.quantum()?;
    let w = &cfg.wigner;
    let rho = resolve_state(q, &w.state)?;
    let projections: Vec<(Projection, &str, (f64, f64))> = match w.projection {
        ProjectionChoice::Hammer => vec![(Projection::Hammer, "hammer", (2.0 * 2f64.sqrt(), 2f64.sqrt()))],
        ProjectionChoice::Polar => vec![(Projection::Polar, "polar", (1.0, 1.0))],
        ProjectionChoice::Both => {
            vec![(Projection::Hammer, "hammer", (2.0 * 2f64.sqrt(), 2f64.sqrt())), (Projection::Polar, "polar", (1.0, 1.0))]
        }
    };
    let mut stats = json!({});
    for (proj, name, extent) in projections {
        let g = wigner_grid(&rho, w.n_theta, w.n_phi, proj)?;
        out.write(&format!("wigner_{name}.csv"), &g.to_csv())?;
        let pts: Vec<(f64, f64, f64)> = g.points().iter().map(|p| (p[2], p[3], p[4])).collect();
        out.write(&format!("wigner_{name}.svg"), &heatmap("spin Wigner function", &pts, extent, WIGNER_COLOR_LIMIT))?;
        stats["min"] = json!(g.min());
        stats["max"] = json!(g.max());
    }
    let wf = WignerFunction::new(&rho);
    let n = 128;
    let cut: Vec<f64> = (0..n).map(|j| wf.value(PI / 2.0, 2.0 * PI * j as f64 / n as f64)).collect::<Result<_, _>>()?;
    let spread = cut.iter().fold(f64::MIN, |a, &b| a.max(b)) - cut.iter().fold(f64::MAX, |a, &b| a.min(b));
    // azimuthally flat cut: no harmonic to report
    stats["equatorial_harmonic"] = json!(if spread < 1e-9 { 0 } else { dominant_harmonic(&cut) });
    stats["equatorial_spread"] = json!(spread);
    stats["color_limit"] = json!(WIGNER_COLOR_LIMIT);
    out.json("wigner_summary.json", &stats)?;
    out.note(format!(
        "wigner: min {:.6}, max {:.6}, equatorial harmonic {}",
        stats["min"].as_f64().unwrap_or(f64::NAN),
        stats["max"].as_f64().unwrap_or(f64::NAN),
        stats["equatorial_harmonic"]
    ));
    Ok(())
}

pub fn catcode(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let mut entries = Vec::new();
    for &two_i in &cfg.catcode.spins_two_i {
        let q = SpinQuantum::new(two_i)?;
        let code = match codewords(q) {
            Ok(c) => c,
            Err(e) => {
                out.note(format!("catcode: 2I = {two_i}: unsupported ({e})"));
                entries.push(json!({"two_i": two_i, "supported": false, "reason": e.to_string()}));
                continue;
            }
        };
        let kl = kl_check(&code, &ErrorSet::iz_powers(q, cfg.catcode.max_iz_power), cfg.catcode.tol);
        let x = logical_gate(q, LogicalGate::X)?;
        let z = logical_gate(q, LogicalGate::Z)?;
        let swap = code.one_l.overlap(&code.zero_l.apply(&x)).norm().min(code.zero_l.overlap(&code.one_l.apply(&x)).norm());
        let a0 = code.zero_l.overlap(&code.zero_l.apply(&z));
        let a1 = code.one_l.overlap(&code.one_l.apply(&z));
        let bias = bias_preservation_check(&x, &spin_operators(q).iz);
        out.note(format!(
            "catcode: 2I = {two_i}: KL {} (offdiag {:.2e}, diag {:.2e}), X swap {:.15}",
            if kl.pass { "pass" } else { "FAIL" },
            kl.max_offdiag_violation,
            kl.max_diag_mismatch,
            swap
        ));
        entries.push(json!({
            "two_i": two_i,
            "supported": true,
            "codewords": {"zero": state_json(&code.zero_l), "one": state_json(&code.one_l)},
            "knill_laflamme": kl,
            "x_swap_overlap": swap,
            "z_relative_phase_rad": (a1 / a0).arg(),
            "x_bias_on_iz": bias,
        }));
    }
    out.json("catcode.json", &entries)
}

pub fn floquet(cfg: &RunConfig, out: &mut Outputs) -> Result<(), CliError> {
    let q = cfg.quantum()?;
    let f = &cfg.floquet;
    let ratios = if f.ratios.is_empty() { logspace(1e-3, 1e-1, 9) } else { f.ratios.clone() };
    let grid = SweepGrid::default();
    let f_q = cfg.static_params.f_q_hz;
    let exact = contrast_sweep(&ratios, f_q, q, SweepMethod::Exact, &grid)?;
    let magnus = if f.magnus1 { Some(contrast_sweep(&ratios, f_q, q, SweepMethod::Magnus1, &grid)?) } else { None };
    let mut csv = String::from(if magnus.is_some() { "ratio,contrast_exact,contrast_magnus1\n" } else { "ratio,contrast_exact\n" });
    for (i, r) in ratios.iter().enumerate() {
        csv.push_str(&format!("{r:.12e},{:.12e}", exact.contrast[i]));
        if let Some(m) = &magnus {
            csv.push_str(&format!(",{:.12e}", m.contrast[i]));
        }
        csv.push('\n');
    }
    out.write("floquet.csv", &csv)?;
    let (slope, prefactor) = power_law_fit(&exact, f.fit_range.0, f.fit_range.1)?;
    let mut series = vec![Series {
        label: "exact",
        points: ratios.iter().zip(&exact.contrast).map(|(r, c)| (*r, 1.0 - c)).collect(),
        markers: true,
    }];
    if let Some(m) = &magnus {
        series.push(Series { label: "first-order Magnus", points: ratios.iter().zip(&m.contrast).map(|(r, c)| (*r, 1.0 - c)).collect(), markers: true });
    }
    let plot = LinePlot {
        title: "cross-coupling error",
        x_label: "f_Rabi / f_q",
        y_label: "1 - contrast",
        log_x: true,
        log_y: true,
        series,
        vlines: vec![f.operating_ratio],
    };
    out.write("floquet.svg", &plot.render())?;
    let op = contrast_sweep(&[f.operating_ratio], f_q, q, SweepMethod::Exact, &grid)?;
    out.json(
        "floquet_summary.json",
        &json!({
            "exponent": slope,
            "prefactor": prefactor,
            "fit_range": [f.fit_range.0, f.fit_range.1],
            "operating_ratio": f.operating_ratio,
            "operating_one_minus_contrast": 1.0 - op.contrast[0],
            "magnus1": magnus.is_some(),
            "flagged_ratios": ratios.iter().zip(&exact.flagged).filter(|(_, f)| **f).map(|(r, _)| *r).collect::<Vec<_>>(),
        }),
    )?;
    out.note(format!("floquet: exponent {slope:.3}, 1 - contrast at {} = {:.3e}", f.operating_ratio, 1.0 - op.contrast[0]));
    Ok(())
}
