use proptest::prelude::*;
use spinqudit::linalg::{c, eigh, expect, max_abs};
use spinqudit::spincore::*;
use spinqudit::{CMatrix, CVector, Complex64};
use std::f64::consts::PI;

fn q72() -> SpinQuantum {
    SpinQuantum::seven_halves()
}

fn spins() -> Vec<SpinQuantum> {
    (1..=7).map(|t| SpinQuantum::new(t).unwrap()).collect()
}

/// Printed ascending-order amplitudes, reversed to descending `m`.
fn printed_scs_minus_x() -> Vec<f64> {
    let asc = [-0.088, 0.234, -0.405, 0.523, -0.523, 0.405, -0.234, 0.088];
    asc.iter().rev().copied().collect()
}

#[test]
fn ix_first_entry_is_sqrt7_over_2() {
    let ops = spin_operators(q72());
    assert!((ops.ix[(0, 1)].re - 7f64.sqrt() / 2.0).abs() < 1e-15);
    assert!((ops.ix[(0, 1)].re - 1.3229).abs() < 1e-4);
}

#[test]
fn spin_half_ix_is_half_pauli_x() {
    let ops = spin_operators(SpinQuantum::new(1).unwrap());
    let want = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]);
    assert!(max_abs(&(ops.ix - want)) < 1e-15);
}

#[test]
fn commutator_identity_and_casimir() {
    for q in spins() {
        let ops = spin_operators(q);
        assert!(commutation_defect(&ops) < 1e-12);
        let cas = &ops.ix * &ops.ix + &ops.iy * &ops.iy + &ops.iz * &ops.iz;
        let i = q.spin();
        let want = CMatrix::identity(q.dim(), q.dim()).scale(i * (i + 1.0));
        assert!(max_abs(&(cas - want)) < 1e-10);
    }
}

#[test]
fn iz_is_descending_diagonal() {
    let ops = spin_operators(q72());
    for j in 0..8 {
        assert_eq!(ops.iz[(j, j)].re, 3.5 - j as f64);
    }
}

#[test]
fn parity_entries_and_trace() {
    let q = q72();
    let p = parity_operator(q);
    assert_eq!(p[(7, 7)].re, 1.0);
    assert_eq!(p[(0, 0)].re, -1.0);
    assert!(p.trace().norm() < 1e-15);
}

#[test]
fn parity_anticommutes_with_ix_for_half_odd_spins() {
    for t in [1, 3, 5, 7] {
        let q = SpinQuantum::new(t).unwrap();
        let p = parity_operator(q);
        let ix = spin_operators(q).ix;
        assert!(max_abs(&(&p * &ix + &ix * &p)) < 1e-12);
    }
}

#[test]
fn x_cat_with_zero_phase_has_even_parity() {
    let q = q72();
    let plus = spin_coherent_state(q, PI / 2.0, 0.0);
    let minus = spin_coherent_state(q, PI / 2.0, PI);
    // align the relative phase so that the odd-parity amplitudes cancel
    let p = parity_operator(q);
    for sign in [1.0, -1.0] {
        let cat = (&plus.amplitudes + &minus.amplitudes * c(sign, 0.0)).normalize();
        let v = expect(&p, &cat);
        if (v - 1.0).abs() < 1e-12 {
            return;
        }
    }
    panic!("no relative sign gives an even-parity x cat");
}

#[test]
fn scs_along_pole_is_top_state() {
    let s = spin_coherent_state(q72(), 0.0, 1.234);
    assert!((s.amplitudes[0].norm() - 1.0).abs() < 1e-15);
}

#[test]
fn scs_minus_x_matches_printed_amplitudes_up_to_global_phase() {
    let s = spin_coherent_state(q72(), PI / 2.0, PI);
    let printed = printed_scs_minus_x();
    // fix the global phase on the largest component
    let phase = s.amplitudes[3] / Complex64::new(printed[3], 0.0);
    let phase = phase / phase.norm();
    for (a, p) in s.amplitudes.iter().zip(&printed) {
        let z = a / phase;
        assert!(z.im.abs() < 1e-12);
        assert!((z.re - p).abs() < 6e-4, "{} vs {}", z.re, p);
    }
}

#[test]
fn wigner_d_examples() {
    let q = q72();
    assert!((wigner_d(q, 7, 7, 0.0) - 1.0).abs() < 1e-15);
    let v = wigner_d(q, -7, -7, PI / 2.0);
    assert!((v - 0.5f64.powf(3.5)).abs() < 1e-15);
    assert!((v - 0.08839).abs() < 1e-5);
}

#[test]
fn wigner_d_spin_half_closed_form() {
    let q = SpinQuantum::new(1).unwrap();
    let b = 0.73;
    assert!((wigner_d(q, 1, 1, b) - (b / 2.0).cos()).abs() < 1e-15);
    assert!((wigner_d(q, 1, -1, b) + (b / 2.0).sin()).abs() < 1e-15);
    assert!((wigner_d(q, -1, 1, b) - (b / 2.0).sin()).abs() < 1e-15);
}

#[test]
fn wigner_d_agrees_with_matrix_exponential() {
    // oracle: exp(-i beta Iy) by eigendecomposition
    let q = SpinQuantum::new(5).unwrap();
    let ops = spin_operators(q);
    let beta = 1.1;
    let (vals, vecs) = eigh(&ops.iy);
    let ph: Vec<Complex64> = vals.iter().map(|l| Complex64::from_polar(1.0, -beta * l)).collect();
    let u = &vecs * CMatrix::from_diagonal(&CVector::from_vec(ph)) * vecs.adjoint();
    let d = wigner_d_matrix(q, beta);
    for a in 0..6 {
        for b in 0..6 {
            assert!((u[(a, b)] - c(d[(a, b)], 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn fidelity_examples() {
    let q = q72();
    let psi = spin_coherent_state(q, 0.4, 2.0);
    assert!((fidelity(&psi.to_density(), &psi).unwrap() - 1.0).abs() < 1e-12);
    let mixed = DensityMatrix::maximally_mixed(q);
    assert!((fidelity(&mixed, &psi).unwrap() - 0.125).abs() < 1e-15);
    let other = PureState::basis(SpinQuantum::new(3).unwrap(), 3).unwrap();
    assert!(fidelity(&mixed, &other).is_err());
}

#[test]
fn dicke_examples() {
    let q = q72();
    let top = dicke_embed(q, 7, DICKE_CAP).unwrap();
    assert_eq!(top.len(), 128);
    assert!((top[0].re - 1.0).abs() < 1e-15);
    let one = dicke_embed(q, 5, DICKE_CAP).unwrap();
    let support: Vec<usize> = (0..128).filter(|&b| one[b].norm() > 0.0).collect();
    assert_eq!(support.len(), 7);
    for b in support {
        assert_eq!((b as u32).count_ones(), 1);
        assert!((one[b].re - 1.0 / 7f64.sqrt()).abs() < 1e-15);
    }
    for j in 0..8 {
        let v = dicke_embed(q, q.two_m(j), DICKE_CAP).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }
    assert!(dicke_embed(SpinQuantum::new(11).unwrap(), 11, DICKE_CAP).is_err());
}

#[test]
fn density_matrix_validation() {
    let q = SpinQuantum::new(1).unwrap();
    let bad = CMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
    assert!(DensityMatrix::new(q, bad).is_err());
    assert!(PureState::new(q, CVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).is_err());
}

fn random_state(q: SpinQuantum, re: &[f64], im: &[f64]) -> PureState {
    let v = CVector::from_fn(q.dim(), |j, _| c(re[j], im[j]));
    PureState::normalized(q, v).unwrap()
}

proptest! {
    #[test]
    fn scs_is_top_eigenvector_of_n_dot_i(theta in 0.0..PI, phi in 0.0..(2.0 * PI), two_i in 1u32..8) {
        let q = SpinQuantum::new(two_i).unwrap();
        let ops = spin_operators(q);
        let n_dot_i = ops.along(theta, phi);
        let s = spin_coherent_state(q, theta, phi);
        prop_assert!((s.amplitudes.norm() - 1.0).abs() < 1e-12);
        prop_assert!((expect(&n_dot_i, &s.amplitudes) - q.spin()).abs() < 1e-10);
        let (vals, vecs) = eigh(&n_dot_i);
        prop_assert!((vals[q.dim() - 1] - q.spin()).abs() < 1e-10);
        let top = vecs.column(q.dim() - 1).into_owned();
        prop_assert!(top.dotc(&s.amplitudes).norm() > 1.0 - 1e-10);
    }

    #[test]
    fn wigner_d_is_orthogonal(beta in -PI..PI, two_i in 1u32..8) {
        let q = SpinQuantum::new(two_i).unwrap();
        let d = wigner_d_matrix(q, beta);
        let err = (d.transpose() * &d - nalgebra::DMatrix::<f64>::identity(q.dim(), q.dim())).amax();
        prop_assert!(err < 1e-10);
        for col in 0..q.dim() {
            let s: f64 = d.column(col).iter().map(|x| x * x).sum();
            prop_assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dicke_embedding_is_isometric(
        re in prop::collection::vec(-1.0f64..1.0, 16),
        im in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let q = q72();
        let a = random_state(q, &re[..8], &im[..8]);
        let b = random_state(q, &re[8..], &im[8..]);
        let ea = dicke_embed_state(&a, DICKE_CAP).unwrap();
        let eb = dicke_embed_state(&b, DICKE_CAP).unwrap();
        prop_assert!((ea.dotc(&eb) - a.overlap(&b)).norm() < 1e-10);
    }

    #[test]
    fn fidelity_is_in_unit_interval(re in prop::collection::vec(-1.0f64..1.0, 8), im in prop::collection::vec(-1.0f64..1.0, 8)) {
        let q = q72();
        let psi = random_state(q, &re, &im);
        let rho = spin_coherent_state(q, 1.0, 2.0).to_density();
        let f = fidelity(&rho, &psi).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
    }
}
