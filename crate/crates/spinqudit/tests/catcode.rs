use spinqudit::catcode::*;
use spinqudit::dynamics::covariant_rotation;
use spinqudit::linalg::{c, expi_hermitian, max_abs};
use spinqudit::spincore::*;
use spinqudit::CMatrix;
use std::f64::consts::PI;

fn q(two_i: u32) -> SpinQuantum {
    SpinQuantum::new(two_i).unwrap()
}

#[test]
fn codeword_amplitudes() {
    let code = codewords(q(7)).unwrap();
    // printed ascending magnitudes, reversed to descending m
    let printed = [0.088, 0.234, 0.405, 0.523, 0.523, 0.405, 0.234, 0.088];
    for (a, p) in code.zero_l.amplitudes.iter().zip(printed.iter().rev()) {
        assert!(a.im == 0.0);
        assert!((a.re.abs() - p).abs() < 6e-4);
    }
    assert!((code.zero_l.amplitudes[7].re.abs() - 0.0884).abs() < 1e-4);
    assert!(code.zero_l.overlap(&code.one_l).norm() < 1e-14);
    let scs = spin_coherent_state(q(7), PI / 2.0, PI);
    assert!(scs.overlap(&code.zero_l).norm() > 1.0 - 1e-12);
    assert!(codewords(q(6)).is_err());
}

#[test]
fn cat_combinations_have_definite_parity() {
    for two_i in [1, 3, 5, 7] {
        let code = codewords(q(two_i)).unwrap();
        let p = parity_operator(q(two_i));
        let plus = (&code.zero_l.amplitudes + &code.one_l.amplitudes).unscale(2f64.sqrt());
        let minus = (&code.zero_l.amplitudes - &code.one_l.amplitudes).unscale(2f64.sqrt());
        let ep = spinqudit::linalg::expect(&p, &plus);
        let em = spinqudit::linalg::expect(&p, &minus);
        assert!((ep.abs() - 1.0).abs() < 1e-12 && (em.abs() - 1.0).abs() < 1e-12);
        assert!((ep + em).abs() < 1e-12);
    }
}

#[test]
fn knill_laflamme_examples() {
    let tol = 1e-10;
    let r = kl_check(&codewords(q(7)).unwrap(), &ErrorSet::iz_powers(q(7), 3), tol);
    assert!(r.pass, "{r:?}");
    assert_eq!(r.c_matrix.len(), 4);
    let r = kl_check(&codewords(q(5)).unwrap(), &ErrorSet::iz_powers(q(5), 2), tol);
    assert!(r.pass);
    let r = kl_check(&codewords(q(5)).unwrap(), &ErrorSet::iz_powers(q(5), 3), tol);
    assert!(!r.pass);
    assert!(r.max_offdiag_violation > 1e-3);
    let r = kl_check(&codewords(q(1)).unwrap(), &ErrorSet::iz_powers(q(1), 1), tol);
    assert!(!r.pass);
    // the cat code does not protect against Ix errors
    let r = kl_check(&codewords(q(7)).unwrap(), &ErrorSet::first_order_rotations(q(7)), tol);
    assert!(!r.pass);
    let json = serde_json::to_string(&r).unwrap();
    assert!(json.contains("c_matrix"));
}

#[test]
fn error_set_requires_identity() {
    let iz = spin_operators(q(3)).iz;
    assert!(ErrorSet::new(vec!["Iz".into()], vec![iz.clone()]).is_err());
    assert!(ErrorSet::new(vec!["1".into(), "Iz".into()], vec![CMatrix::identity(4, 4), iz]).is_ok());
}

#[test]
fn logical_gates() {
    let qq = q(7);
    let code = codewords(qq).unwrap();
    let x = logical_gate(qq, LogicalGate::X).unwrap();
    let z = logical_gate(qq, LogicalGate::Z).unwrap();
    assert!((code.one_l.overlap(&code.zero_l.apply(&x)).norm() - 1.0).abs() < 1e-12);
    assert!((code.zero_l.overlap(&code.one_l.apply(&x)).norm() - 1.0).abs() < 1e-12);
    let a0 = code.zero_l.overlap(&code.zero_l.apply(&z));
    let a1 = code.one_l.overlap(&code.one_l.apply(&z));
    assert!((a0.norm() - 1.0).abs() < 1e-12 && (a1.norm() - 1.0).abs() < 1e-12);
    assert!(((a1 / a0) + c(1.0, 0.0)).norm() < 1e-12);
    let x2 = &x * &x;
    let ph = x2[(0, 0)];
    assert!(max_abs(&(x2 - CMatrix::identity(8, 8) * ph)) < 1e-12);
    assert!(logical_gate(q(4), LogicalGate::X).is_err());
}

#[test]
fn bias_preservation_examples() {
    let qq = q(7);
    let ops = spin_operators(qq);
    let x = logical_gate(qq, LogicalGate::X).unwrap();
    let r = bias_preservation_check(&x, &ops.iz);
    assert!(r.residual < 1e-12 && (r.c - c(1.0, 0.0)).norm() < 1e-12);
    // a pi rotation about z flips Ix exactly
    let r = bias_preservation_check(&x, &ops.ix);
    assert!(r.residual < 1e-12 && (r.c + c(1.0, 0.0)).norm() < 1e-12);
    let r = bias_preservation_check(&CMatrix::identity(8, 8), &ops.iy);
    assert!(r.residual == 0.0 && (r.c - c(1.0, 0.0)).norm() < 1e-15);
    // a pi/2 rotation mixes Iz into Ix: not bias preserving
    let r = bias_preservation_check(&covariant_rotation(qq, PI / 2.0, 0.0), &ops.iz);
    assert!(r.residual > 0.5);
}

#[test]
fn codeword_is_rotated_bottom_state() {
    for two_i in [1, 3, 5, 7] {
        let qq = q(two_i);
        let code = codewords(qq).unwrap();
        let bottom = PureState::basis(qq, -(two_i as i32)).unwrap();
        let rotated = bottom.apply(&covariant_rotation(qq, PI / 2.0, -PI / 2.0));
        assert!(rotated.overlap(&code.zero_l).norm() >= 1.0 - 1e-12);
    }
}

#[test]
fn pi_rotations_preserve_codespace() {
    for two_i in [1, 3, 5, 7] {
        let qq = q(two_i);
        let p = codewords(qq).unwrap().projector();
        let ops = spin_operators(qq);
        for gen in [&ops.ix, &ops.iy, &ops.iz] {
            let u = expi_hermitian(gen, -PI);
            assert!(max_abs(&(&u * &p * u.adjoint() - &p)) < 1e-10);
        }
    }
}

#[test]
fn iz_error_lands_on_single_x_level() {
    let qq = q(7);
    let code = codewords(qq).unwrap();
    let iz = spin_operators(qq).iz;
    let err = PureState::normalized(qq, &iz * &code.zero_l.amplitudes).unwrap();
    let wd = spinqudit::spincore::wigner_d_matrix(qq, PI / 2.0);
    let level = wd.column(qq.index_of(-5).unwrap()).map(|x| c(x, 0.0));
    let target = PureState::normalized(qq, level).unwrap();
    assert!((err.overlap(&target).norm() - 1.0).abs() < 1e-12);
}
