use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spinqudit::dynamics::*;
use spinqudit::hamiltonian::FrameDefinition;
use spinqudit::linalg::{c, eigh, max_abs, trace_distance, uhlmann_fidelity};
use spinqudit::spincore::*;
use spinqudit::tomography::*;
use spinqudit::{CMatrix, CVector};
use std::f64::consts::PI;

fn q72() -> SpinQuantum {
    SpinQuantum::seven_halves()
}

fn top(q: SpinQuantum) -> PureState {
    PureState::basis(q, q.two_i() as i32).unwrap()
}

#[test]
fn effects_along_z_are_computational() {
    let q = q72();
    let e = axis_effects(q, 0.0, 0.0);
    for (j, p) in e.iter().enumerate() {
        let mut want = CMatrix::zeros(8, 8);
        want[(j, j)] = c(1.0, 0.0);
        assert!(max_abs(&(p - want)) < 1e-14);
    }
}

#[test]
fn effects_complete_and_ordered() {
    let q = q72();
    let ops = spin_operators(q);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let (t, p) = (rng.random_range(0.0..PI), rng.random_range(-PI..PI));
        let e = axis_effects(q, t, p);
        let sum = e.iter().fold(CMatrix::zeros(8, 8), |a, b| a + b);
        assert!(max_abs(&(sum - CMatrix::identity(8, 8))) < 1e-12);
        let n_op = ops.along(t, p);
        for (j, pj) in e.iter().enumerate() {
            assert!(max_abs(&(pj * pj - pj)) < 1e-12);
            let eig = (&n_op * pj).trace().re;
            assert!((eig - q.m(j)).abs() < 1e-12);
        }
    }
    let scs = spin_coherent_state(q, PI / 2.0, 0.0);
    let e = axis_effects(q, PI / 2.0, 0.0);
    assert!(max_abs(&(&e[0] - &scs.amplitudes * scs.amplitudes.adjoint())) < 1e-12);
}

#[test]
fn design_efficiencies() {
    let q = q72();
    let d = grid_design(q);
    assert_eq!(d.n_axes(), 45);
    assert_eq!(d.shots_per_axis, 15);
    assert!(d.axes.contains(&(9.0 * PI / 20.0, 2.0 * PI * 14.0 / 15.0)));
    let eff = tomographic_efficiency(&frame_superoperator(q, &d));
    assert_eq!(eff.rank, 64);
    assert!((eff.f_te - 76.3).abs() < 0.5, "{}", eff.f_te);
    assert_eq!(d.dof_nominal(q), 252);

    let seven = ExperimentDesign::new(d.axes[..7].to_vec(), 15).unwrap();
    let eff7 = tomographic_efficiency(&frame_superoperator(q, &seven));
    assert!(eff7.f_te.is_infinite() && eff7.rank < 64);

    assert!((two_design_bound(q) - 4544f64.sqrt()).abs() < 1e-12);
}

#[test]
fn uniform_axes_approach_spherical_limit() {
    let q = q72();
    let u = uniform_design(20_000, 1, 11).unwrap();
    let eff = tomographic_efficiency(&frame_superoperator(q, &u));
    let want = 5440f64.sqrt();
    assert!((eff.f_te - want).abs() / want < 5e-3, "{}", eff.f_te);
}

/// Independent frame operator on `|a><b|` coordinates from Haar-random bases,
/// which form a 2-design on average.
#[test]
fn two_design_formula_matches_haar_bases() {
    let d = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n_bases = 3000;
    let mut f = CMatrix::zeros(d * d, d * d);
    for _ in 0..n_bases {
        let g = CMatrix::from_fn(d, d, |_, _| {
            let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
            let r = (-2.0 * u1.ln()).sqrt();
            c(r * (2.0 * PI * u2).cos(), r * (2.0 * PI * u2).sin())
        });
        let qr = g.qr().q();
        for j in 0..d {
            let v = qr.column(j);
            let e = CVector::from_fn(d * d, |i, _| v[i / d] * v[i % d].conj());
            f += &e * e.adjoint();
        }
    }
    f /= c((n_bases * d) as f64, 0.0);
    let (vals, _) = eigh(&f);
    let got = vals.iter().map(|l| 1.0 / l).sum::<f64>().sqrt();
    let want = two_design_bound(q72());
    assert!((got - want).abs() / want < 0.03, "{got} vs {want}");
}

#[test]
fn design_validation() {
    assert!(ExperimentDesign::new(vec![], 15).is_err());
    assert!(ExperimentDesign::new(vec![(0.0, 0.0)], 0).is_err());
    assert!(ExperimentDesign::new(vec![(f64::NAN, 0.0)], 1).is_err());
}

#[test]
fn shots_examples() {
    let q = q72();
    let one = ExperimentDesign::new(vec![(0.0, 0.0)], 100).unwrap();
    let r = simulate_shots(&top(q).to_density(), &one, 9).unwrap();
    assert_eq!(r.counts[0][0], 100);
    let d = grid_design(q);
    let cat = z_cat(q, 0.0).to_density();
    let r = simulate_shots(&cat, &d, 1).unwrap();
    assert_eq!(r.total(), 675);
    r.validate(q, &d).unwrap();
    assert_eq!(r, simulate_shots(&cat, &d, 1).unwrap());
    assert_ne!(r, simulate_shots(&cat, &d, 2).unwrap());
    let bad = DensityMatrix { q, elements: CMatrix::identity(8, 8).scale(0.2) };
    assert!(matches!(simulate_shots(&bad, &d, 1), Err(spinqudit::Error::ProbabilityDefect(_))));
}

#[test]
fn frequencies_converge_to_born_probabilities() {
    let q = q72();
    let d = grid_design(q).with_shots(100_000);
    let psi = spin_coherent_state(q, 1.0, 0.4);
    let rho = psi.to_density();
    let r = simulate_shots(&rho, &d, 21).unwrap();
    let table = EffectTable::new(q, &d);
    let p = table.probabilities(&rho.elements);
    for (a, row) in r.counts.iter().enumerate() {
        // largest CDF deviation per axis
        let (mut fe, mut fp, mut worst) = (0.0, 0.0, 0.0f64);
        for j in 0..8 {
            fe += row[j] as f64 / 1e5;
            fp += p[a * 8 + j];
            worst = worst.max((fe - fp).abs());
        }
        assert!(worst < 0.01);
    }
}

#[test]
fn csv_and_json() {
    let q = q72();
    let d = grid_design(q);
    let r = simulate_shots(&DensityMatrix::maximally_mixed(q), &d, 4).unwrap();
    let csv = r.to_csv();
    assert!(csv.starts_with("axis_index,outcome,count\n"));
    assert_eq!(csv.lines().count(), 1 + 45 * 8);
    let back: ShotRecord = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
    let dback: ExperimentDesign = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(dback, d);
    let m = mle_reconstruct(&r, &d, q, &MleOptions::default()).unwrap();
    let mback: MleResult = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
    assert_eq!(mback.rho, m.rho);
    assert_eq!(mback.iterations, m.iterations);
}

fn monotone(h: &[f64]) -> bool {
    h.windows(2).all(|w| w[1] >= w[0])
}

#[test]
fn mle_infinite_data_limit() {
    let q = q72();
    let noise = NoiseModel::uniform(q, 15e-3, 1.0).unwrap();
    let truth = apply_dephasing(&spin_coherent_state(q, 1.1, 0.3).to_density(), 4e-3, &noise).unwrap();
    let d = grid_design(q).with_shots(1_000_000);
    let r = ShotRecord::expected(&truth, &d).unwrap();
    r.validate(q, &d).unwrap();
    let m = mle_reconstruct(&r, &d, q, &MleOptions::default()).unwrap();
    assert!(monotone(&m.loglik_history));
    let f = uhlmann_fidelity(&m.rho.elements, &truth.elements);
    assert!(f >= 0.999, "{f}");
}

#[test]
fn mle_recovers_ideal_z_cat() {
    let q = q72();
    let d = grid_design(q);
    let cat = z_cat(q, 0.0);
    let rho = cat.to_density();
    let fids: Vec<f64> = (0..100)
        .map(|s| {
            let r = simulate_shots(&rho, &d, 1000 + s).unwrap();
            let m = mle_reconstruct(&r, &d, q, &MleOptions::default()).unwrap();
            assert!(monotone(&m.loglik_history));
            fidelity(&m.rho, &cat).unwrap()
        })
        .collect();
    assert!(median(&fids) >= 0.90, "{}", median(&fids));
}

#[test]
fn mle_of_maximally_mixed_data() {
    // statistical error of 64 parameters from 675 shots is about 0.4 in trace
    // distance and falls as 1/sqrt(shots); 0.15 needs ~10x the shots
    let q = q72();
    let mix = DensityMatrix::maximally_mixed(q);
    let median_error = |shots: u64| {
        let d = grid_design(q).with_shots(shots);
        let dists: Vec<f64> = (0..15)
            .map(|s| {
                let r = simulate_shots(&mix, &d, 50 + s).unwrap();
                let m = mle_reconstruct(&r, &d, q, &MleOptions::default()).unwrap();
                reconstruction_error(&m, &mix)
            })
            .collect();
        median(&dists)
    };
    let at_design = median_error(15);
    assert!(at_design > 0.3 && at_design < 0.5, "{at_design}");
    let at_ten_x = median_error(150);
    assert!(at_ten_x <= 0.15, "{at_ten_x}");
}

#[test]
fn mle_of_pure_state_approaches_rank_one() {
    let q = q72();
    let d = grid_design(q).with_shots(2223);
    let psi = spin_coherent_state(q, 0.7, 1.9);
    let r = simulate_shots(&psi.to_density(), &d, 8).unwrap();
    let m = mle_reconstruct(&r, &d, q, &MleOptions::default()).unwrap();
    let (vals, _) = eigh(&m.rho.elements);
    assert!(vals[6] < 0.05, "{vals:?}");
}

#[test]
fn mle_reports_non_convergence() {
    let q = q72();
    let d = grid_design(q);
    let r = simulate_shots(&z_cat(q, 0.0).to_density(), &d, 3).unwrap();
    let m = mle_reconstruct(&r, &d, q, &MleOptions { max_iter: 2, ..Default::default() }).unwrap();
    assert!(!m.converged && m.iterations == 2);
    let wrong = ExperimentDesign::new(d.axes[..3].to_vec(), 15).unwrap();
    assert!(mle_reconstruct(&r, &wrong, q, &MleOptions::default()).is_err());
}

#[test]
fn lambda_vanishes_for_matching_model() {
    let q = q72();
    let one = ExperimentDesign::new(vec![(0.0, 0.0)], 8).unwrap();
    let r = ShotRecord { counts: vec![vec![1; 8]], seed: 0 };
    let lam = loglik_ratio(&r, &one, &DensityMatrix::maximally_mixed(q)).unwrap();
    assert!(lam.abs() < 1e-12);
    let lam = loglik_ratio(&r, &one, &top(q).to_density()).unwrap();
    assert!(lam > 0.0);
}

#[test]
fn bootstrap_report() {
    let q = q72();
    let d = grid_design(q);
    let truth = z_cat(q, 0.0).to_density();
    let r = simulate_shots(&truth, &d, 77).unwrap();
    let m = mle_reconstruct(&r, &d, q, &MleOptions::default()).unwrap();
    assert!(parametric_bootstrap(&r, &m.rho, &d, &BootstrapOptions { n_samples: 50, ..Default::default() }).is_err());
    let opts = BootstrapOptions { n_samples: 100, seed: 4, ..Default::default() };
    let rep = parametric_bootstrap(&r, &m.rho, &d, &opts).unwrap();
    assert_eq!(rep.dof_nominal, 252);
    assert_eq!(rep.null_samples.len() + rep.n_excluded, 100);
    assert!((rep.lambda_observed - loglik_ratio(&r, &d, &m.rho).unwrap()).abs() < 1e-9);
    let above = rep.null_samples.iter().filter(|&&l| l >= rep.lambda_observed).count();
    assert_eq!(rep.p_value, above as f64 / rep.null_samples.len() as f64);
    assert!(rep.null_samples.iter().all(|&l| l >= 0.0));
    // sparse counts (under two expected shots per effect) push the null mean
    // above the nominal dof; it stays on the chi-square scale
    let mean = rep.null_samples.iter().sum::<f64>() / rep.null_samples.len() as f64;
    assert!(mean > 150.0 && mean < 252.0 + 5.0 * (2.0f64 * 252.0).sqrt(), "{mean}");
    let again = parametric_bootstrap(&r, &m.rho, &d, &opts).unwrap();
    assert_eq!(again.null_samples, rep.null_samples);
}

#[test]
fn bootstrap_detects_misaligned_axis_with_enough_shots() {
    let q = q72();
    let d = grid_design(q).with_shots(1500);
    let truth = z_cat(q, 0.0).to_density();
    let mut bad = d.clone();
    bad.axes[30].1 += 10f64.to_radians();
    let r = simulate_shots(&truth, &d, 5).unwrap();
    let m = mle_reconstruct(&r, &bad, q, &MleOptions::default()).unwrap();
    let rep = parametric_bootstrap(&r, &m.rho, &bad, &BootstrapOptions { n_samples: 100, seed: 1, ..Default::default() }).unwrap();
    assert!(rep.p_value < 0.01, "{}", rep.p_value);
}

#[test]
fn reduced_fidelity_examples() {
    let f = reduced_parity_fidelity(&[0.5, 0.0, 0.5], 1.0, 0.3, 0.3).unwrap();
    assert!((f - 1.0).abs() < 1e-15);
    let f = reduced_parity_fidelity(&[0.4, 0.1, 0.3], 0.0, 0.0, 1.0).unwrap();
    assert!((f - 0.35).abs() < 1e-15);
    assert!(reduced_parity_fidelity(&[0.5, 0.5], 1.5, 0.0, 0.0).is_err());
    assert!(reduced_parity_fidelity(&[1.5, 0.5], 1.0, 0.0, 0.0).is_err());
}

#[test]
fn reduced_fidelity_matches_full_overlap() {
    let q = q72();
    let gamma = 5.55e6;
    let sched = snap_cat_sequence(q, 163.4, CatOrientation::Z, gamma);
    let res = evolve_grf(&PureState::basis(q, -7).unwrap(), &sched, &FrameDefinition::ideal(q), gamma, 0).unwrap();
    let xi = PI / 2.0;
    let target = z_cat(q, xi);
    let noise = NoiseModel::uniform(q, 15e-3, 1.0).unwrap();
    let ideal = ideal_fringe_phase(q, xi).unwrap();
    for tau in [0.0, 3e-3, 10e-3] {
        let rho = apply_dephasing(&res.final_state().to_density(), tau, &noise).unwrap();
        let osc = simulate_parity_oscillation(&rho, 64, 7).unwrap();
        let reduced = reduced_parity_fidelity(&rho.populations(), osc.contrast, osc.phase, ideal).unwrap();
        let full = fidelity(&rho, &target).unwrap();
        assert!((reduced - full).abs() < 0.01, "tau {tau}: {reduced} vs {full}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn efficiency_is_rotation_invariant(ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in -1.0f64..1.0) {
        let q = q72();
        let d = grid_design(q);
        let rot = nalgebra::Rotation3::new(nalgebra::Vector3::new(ax, ay, az));
        let a = tomographic_efficiency(&frame_superoperator(q, &d)).f_te;
        let b = tomographic_efficiency(&frame_superoperator(q, &d.rotated(&rot))).f_te;
        prop_assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn loglik_is_monotone_and_lambda_nonnegative(seed in 0u64..10_000, theta in 0.0f64..PI, phi in -PI..PI) {
        let q = q72();
        let d = grid_design(q);
        let psi = spin_coherent_state(q, theta, phi);
        let noise = NoiseModel::uniform(q, 10e-3, 1.0).unwrap();
        let rho = apply_dephasing(&psi.to_density(), 5e-3, &noise).unwrap();
        let r = simulate_shots(&rho, &d, seed).unwrap();
        let m = mle_reconstruct(&r, &d, q, &MleOptions::default()).unwrap();
        prop_assert!(monotone(&m.loglik_history));
        prop_assert!((m.loglik - loglik(&r, &d, &m.rho).unwrap()).abs() < 1e-9);
        prop_assert!(loglik_ratio(&r, &d, &m.rho).unwrap() >= 0.0);
        prop_assert!(loglik_ratio(&r, &d, &rho).unwrap() >= 0.0);
        prop_assert!(trace_distance(&m.rho.elements, &m.rho.elements.adjoint()) < 1e-12);
    }
}
