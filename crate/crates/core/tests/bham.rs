use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use latticeprobe::bham::*;
use latticeprobe::qstate::C64;
use nalgebra::Matrix2;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn antisymmetric_pair_stays_split() {
    let out = ideal_bs_map(&antisymmetric_pair(), 1.0, PI / 4.0).unwrap();
    assert_abs_diff_eq!(out.singles_probability(), 1.0, epsilon = 1e-12);
}

#[test]
fn symmetric_pairs_bunch() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // (c_I† d_II† + d_I† c_II†)|vac>/√2 with modes (a_I, b_I, a_II, b_II)
    let sym = FockState::from_occupations(&[([1, 0, 0, 1], c(h)), ([0, 1, 1, 0], c(h))]).unwrap();
    let out = ideal_bs_map(&sym, 2.5, PI / 10.0).unwrap();
    assert_abs_diff_eq!(out.doubles_probability(), 1.0, epsilon = 1e-12);
    for pair in SymmetricPair::ALL {
        let out = ideal_bs_map(&pair.state(), 1.0, PI / 4.0).unwrap();
        assert_abs_diff_eq!(out.doubles_probability(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn zero_time_is_identity_and_norm_is_kept() {
    let st = SymmetricPair::Ab.state();
    let same = ideal_bs_map(&st, 1.0, 0.0).unwrap();
    assert_abs_diff_eq!(same.overlap(&st).norm(), 1.0, epsilon = 1e-12);
    for t in [0.1, 0.5, 1.7] {
        let out = ideal_bs_map(&st, 1.3, t).unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.atom_number(), 2.0, epsilon = 1e-12);
    }
    assert!(FockState::from_occupations(&[([1, 1, 1, 0], c(1.0))]).is_err());
}

#[test]
fn two_qubit_outcomes() {
    assert_eq!(two_qubit_bs_outcome(1.0, 0.0).unwrap(), (1.0, 0.0));
    let (pp, pm) = two_qubit_bs_outcome(0.5, 0.5).unwrap();
    assert_abs_diff_eq!(pp, 0.75, epsilon = 1e-15);
    assert_abs_diff_eq!(pm, 0.25, epsilon = 1e-15);
    let (pp, pm) = two_qubit_bs_outcome(0.9, 0.1).unwrap();
    assert_abs_diff_eq!(pp, 0.91, epsilon = 1e-15);
    assert_abs_diff_eq!(pm, 0.09, epsilon = 1e-15);
    let purity = 0.81 + 0.01;
    assert_abs_diff_eq!(pp, (1.0 + purity) / 2.0, epsilon = 1e-15);
    assert!(two_qubit_bs_outcome(0.7, 0.7).is_err());
}

#[test]
fn spectral_branches_reproduce_outcome() {
    let rhos = [
        Matrix2::new(c(0.7), C64::new(0.2, 0.1), C64::new(0.2, -0.1), c(0.3)),
        Matrix2::new(c(0.5), c(0.0), c(0.0), c(0.5)),
        Matrix2::new(c(1.0), c(0.0), c(0.0), c(0.0)),
    ];
    for rho in rhos {
        let (l1, l2) = qubit_spectrum(&rho).unwrap();
        let want = two_qubit_bs_outcome(l1, l2).unwrap();
        let got = simulate_bs_outcome(&rho, 0.8).unwrap();
        assert_abs_diff_eq!(got.0, want.0, epsilon = 1e-12);
        assert_abs_diff_eq!(got.1, want.1, epsilon = 1e-12);
    }
}

#[test]
fn qbs_exact_examples() {
    assert_eq!(qbs_exact(1.0, 0.0, PI / 4.0).unwrap(), qbs_exact(1.0, 0.0, PI / 4.0).unwrap());
    assert!(qbs_exact(1.0, 0.0, PI / 4.0).unwrap() < 1e-30);
    for u in [0.3f64, 1.0, 4.0] {
        let t = optimal_bs_time(1.0, u).unwrap();
        assert_abs_diff_eq!(t, PI / (16.0 + u * u).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(qbs_exact(1.0, u, t).unwrap(), u * u / (16.0 + u * u), epsilon = 1e-15);
    }
    assert_abs_diff_eq!(qbs_exact(1.0, 4.0, optimal_bs_time(1.0, 4.0).unwrap()).unwrap(), 0.5, epsilon = 1e-15);
}

#[test]
fn optimal_time_is_global_minimum() {
    for u in [0.2f64, 1.0, 3.0] {
        let w = (16.0 + u * u).sqrt();
        let best = qbs_exact(1.0, u, optimal_bs_time(1.0, u).unwrap()).unwrap();
        for i in 1..=2000 {
            let t = 2.0 * PI / w * i as f64 / 2000.0;
            assert!(qbs_exact(1.0, u, t).unwrap() >= best - 1e-15);
        }
    }
}

#[test]
fn closed_form_matches_numeric_dynamics_for_all_symmetric_pairs() {
    for u in [0.0, 0.3, 1.0, 4.0] {
        for t in [0.2, optimal_bs_time(1.0, u).unwrap(), 1.1] {
            let want = qbs_exact(1.0, u, t).unwrap();
            for pair in SymmetricPair::ALL {
                assert_abs_diff_eq!(bunching_failure_numeric(pair, 1.0, u, t).unwrap(), want, epsilon = 1e-10);
            }
        }
    }
}

#[test]
fn qbs_approx_examples() {
    assert_eq!(qbs_approx(1.0, 0.0, 0.0).unwrap(), 0.0);
    assert_abs_diff_eq!(qbs_approx(1.0, 0.1, 0.2).unwrap(), 0.014837, epsilon = 1e-6);
    for u in [0.05, 0.1, 0.2] {
        let exact = qbs_exact(1.0, u, optimal_bs_time(1.0, u).unwrap()).unwrap();
        let approx = qbs_approx(1.0, 0.0, u).unwrap();
        assert!((approx - exact).abs() / exact < 0.05);
    }
}

#[test]
fn loss_stage_examples() {
    let s = loss_stage(1.3, 500.0).unwrap();
    assert!((18.5..=19.5).contains(&s.t_l));
    assert!((0.007..=0.009).contains(&s.q_l));
    assert!((0.035..=0.039).contains(&s.p_l));

    let s = loss_stage(1.0, 100.0).unwrap();
    let want = (100f64 / 3.0).ln() / (1.0 / 3.0 - 1.0 / 100.0);
    assert_abs_diff_eq!(s.t_l, want, epsilon = 1e-12);
    let cost = |t: f64| pair_survival(t, 1.0) + single_loss(t, 100.0);
    let best = cost(s.t_l);
    let mut t = 1e-3;
    while t < 60.0 {
        assert!(cost(t) >= best - 1e-12);
        t += 1e-3;
    }
    assert!(cost(s.t_l * 1.01) >= best && cost(s.t_l * 0.99) >= best);

    let far = loss_stage(1.0, 1e9).unwrap();
    assert!(far.p_l < 1e-6 && far.t_l > 40.0);
    assert!(loss_stage(1.0, 2.0).is_err());
}

#[test]
fn physics_summary_defaults() {
    let s = PhysicalParams::default().summary().unwrap();
    assert_abs_diff_eq!(s.t_bs, PI / 4.0, epsilon = 1e-15);
    assert!(s.q_bs_exact < 1e-20);
    assert!((18.5..=19.5).contains(&s.t_l));
    assert!(PhysicalParams::new(1.0, 0.0, 0.0, 2.0, 5.0).is_err());
}
