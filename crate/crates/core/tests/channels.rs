mod common;

use approx::assert_abs_diff_eq;
use latticeprobe::bham::{optimal_bs_time, qbs_approx, qbs_exact};
use latticeprobe::errmodel::*;
use latticeprobe::estimator::*;
use latticeprobe::network::*;
use latticeprobe::purity::*;
use latticeprobe::qstate::*;
use nalgebra::{DMatrix, DVector};

fn singles_of(state: &QubitRegisterState) -> OutcomeDistribution {
    singles_distribution(&purity_profile(state).unwrap()).unwrap()
}

fn patterns_of(state: &QubitRegisterState) -> OutcomeDistribution {
    sign_pattern_distribution(&subset_purities(state).unwrap()).unwrap()
}

fn assert_stochastic(d: &OutcomeDistribution) {
    assert!(d.probs().iter().all(|&x| x >= -1e-12), "negative entry in {:?}", d.kind());
    assert_abs_diff_eq!(d.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-10);
}

fn family(n: usize) -> Vec<QubitRegisterState> {
    let mut v = vec![
        make_ghz(n).unwrap(),
        make_phi_state(n, std::f64::consts::PI).unwrap(),
        make_phi_state(n, 0.9).unwrap(),
    ];
    if n <= 10 {
        v.push(make_classical_correlated(n).unwrap());
        v.push(make_werner(n, 0.4).unwrap());
        v.push(apply_dephasing(&make_phi_state(n, std::f64::consts::PI).unwrap(), 0.3).unwrap());
    }
    v
}

#[test]
fn bs_error_examples() {
    let st = singles_of(&make_phi_state(7, 1.0).unwrap());
    assert!(common::max_abs_diff(apply_bs_error(&st, 0.0).unwrap().probs(), st.probs()) < 1e-15);
    for q in [0.0, 0.05, 0.3] {
        let one = OutcomeDistribution::new(1, OutcomeKind::SinglesCount, vec![1.0, 0.0]).unwrap();
        let out = apply_bs_error(&one, q).unwrap();
        assert_eq!(out.kind(), OutcomeKind::PairCount);
        assert_abs_diff_eq!(out.get(0), 1.0 - q, epsilon = 1e-15);
        assert_abs_diff_eq!(out.get(1), q, epsilon = 1e-15);
        assert_stochastic(&apply_bs_error(&st, q).unwrap());
    }
}

#[test]
fn detector_error_examples() {
    let st = singles_of(&make_ghz(6).unwrap());
    let out = apply_detector_error(&st, 0.0).unwrap();
    for i in 0..=12 {
        let want = if i % 2 == 0 { st.get(i / 2) } else { 0.0 };
        assert_abs_diff_eq!(out.get(i), want, epsilon = 1e-15);
    }
    let p = 0.13;
    let one = OutcomeDistribution::new(1, OutcomeKind::SinglesCount, vec![0.0, 1.0]).unwrap();
    let out = apply_detector_error(&one, p).unwrap();
    for (got, want) in out.probs().iter().zip([p * p, 2.0 * p * (1.0 - p), (1.0 - p) * (1.0 - p)]) {
        assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
    }
    assert_stochastic(&apply_detector_error(&st, 0.2).unwrap());
    assert_stochastic(&apply_combined_error(&st, 0.2, 0.1).unwrap());
}

#[test]
fn combined_channel_is_composition() {
    let st = singles_of(&make_phi_state(9, 2.2).unwrap());
    let composed = apply_detector_error(&apply_bs_error(&st, 0.07).unwrap(), 0.04).unwrap();
    let m = combined_channel_matrix(9, 0.04, 0.07).unwrap();
    let direct = &m * DVector::from_column_slice(st.probs());
    assert!(common::max_abs_diff(composed.probs(), direct.as_slice()) < 1e-14);
    assert_stochastic(&composed);
}

#[test]
fn random_hopping_channel() {
    let st = singles_of(&make_phi_state(8, std::f64::consts::PI).unwrap());
    let u = 0.3;
    let jbar = 1.0;
    let t = optimal_bs_time(jbar, u).unwrap();

    let point = JDistribution::point(jbar).unwrap();
    let fixed = apply_bs_error(&st, qbs_exact(jbar, u, t).unwrap()).unwrap();
    let avg = apply_bs_error_random_j(&st, &point, u).unwrap();
    assert!(common::max_abs_diff(fixed.probs(), avg.probs()) < 1e-14);

    // two-point hopping distribution centred on jbar
    let (j1, j2, w) = (0.9, 1.3, 0.75);
    let two = JDistribution::discrete(vec![j1, j2], vec![w, 1.0 - w]).unwrap();
    let mixed = apply_bs_error_random_j(&st, &two, u).unwrap();
    let tbar = optimal_bs_time(two.mean(), u).unwrap();
    let a = apply_bs_error(&st, qbs_exact(j1, u, tbar).unwrap()).unwrap();
    let b = apply_bs_error(&st, qbs_exact(j2, u, tbar).unwrap()).unwrap();
    for i in 0..=8 {
        assert_abs_diff_eq!(mixed.get(i), w * a.get(i) + (1.0 - w) * b.get(i), epsilon = 1e-14);
    }
    assert_stochastic(&mixed);

    // run-to-run spread δJ enters as a Gaussian of standard deviation δJ/√2
    let dj = 0.05;
    let gauss = JDistribution::gaussian(jbar, dj / std::f64::consts::SQRT_2).unwrap();
    let q_eff = gauss.effective_q(0.0).unwrap();
    let q_formula = qbs_approx(jbar, dj, 0.0).unwrap();
    assert!((q_eff - q_formula).abs() / q_formula < 0.10, "{q_eff} vs {q_formula}");

    assert!(JDistribution::discrete(vec![1.0, 2.0], vec![0.6, 0.6]).is_err());
    assert!(JDistribution::discrete(vec![1.0, 2.0], vec![1.1, -0.1]).is_err());
}

#[test]
fn position_kernel_examples() {
    assert_eq!(gaussian_position_kernel(0.0, 1.0, 5).unwrap(), DMatrix::identity(5, 5));
    let tiny = gaussian_position_kernel(1e-4, 1.0, 5).unwrap();
    assert!((tiny - DMatrix::<f64>::identity(5, 5)).abs().max() < 1e-12);
    for sigma in [0.05, 0.25, 0.5, 1.5] {
        let f = gaussian_position_kernel(sigma, 1.0, 6).unwrap();
        assert!(f.iter().all(|&x| x >= 0.0));
        for col in f.column_iter() {
            assert_abs_diff_eq!(col.sum(), 1.0, epsilon = 1e-12);
        }
    }
    // adjacent interior bin at σ = λ/4: mass between 1/4 and 3/4 of λ from the centre
    let sigma = 0.25;
    let f = gaussian_position_kernel(sigma, 1.0, 5).unwrap();
    let phi = |z: f64| 0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2);
    let want = phi(0.75 / sigma) - phi(0.25 / sigma);
    assert_abs_diff_eq!(f[(2, 1)], want, epsilon = 1e-14);
    assert_abs_diff_eq!(f[(1, 2)], want, epsilon = 1e-14);
    // the same number by midpoint quadrature of the density
    let steps = 200_000;
    let h = 0.5 / steps as f64;
    let quad: f64 = (0..steps)
        .map(|i| {
            let x = 0.25 + (i as f64 + 0.5) * h;
            (-(x * x) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt()) * h
        })
        .sum();
    assert_abs_diff_eq!(f[(2, 1)], quad, epsilon = 1e-10);
}

#[test]
fn spatial_blur_examples() {
    let st = make_phi_state(4, 1.7).unwrap();
    let patterns = patterns_of(&st);
    let space = MultisetSpace::new(4).unwrap();
    let out = apply_spatial_blur(&patterns, &DMatrix::identity(4, 4)).unwrap();
    for mask in 0..16usize {
        let counts: Vec<u8> = (0..4).map(|site| if mask >> (3 - site) & 1 == 1 { 2 } else { 0 }).collect();
        assert_abs_diff_eq!(out.get(space.index_of(&counts).unwrap()), patterns.get(mask), epsilon = 1e-15);
    }
    assert_abs_diff_eq!(out.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-12);

    // n = 1: the kernel is the 1×1 identity after edge folding
    let one = OutcomeDistribution::new(1, OutcomeKind::SignPattern, vec![0.3, 0.7]).unwrap();
    let out = apply_spatial_blur(&one, &gaussian_position_kernel(0.7, 1.0, 1).unwrap()).unwrap();
    assert_eq!(out.probs(), &[0.3, 0.7]);

    // n = 2 by hand: both atoms of site 1 blurred independently
    let f = DMatrix::from_row_slice(2, 2, &[0.8, 0.3, 0.2, 0.7]);
    let only_first = OutcomeDistribution::new(2, OutcomeKind::SignPattern, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    let out = apply_spatial_blur(&only_first, &f).unwrap();
    let space = MultisetSpace::new(2).unwrap();
    let at = |c: [u8; 2]| out.get(space.index_of(&c).unwrap());
    assert_abs_diff_eq!(at([2, 0]), 0.64, epsilon = 1e-15);
    assert_abs_diff_eq!(at([1, 1]), 0.32, epsilon = 1e-15);
    assert_abs_diff_eq!(at([0, 2]), 0.04, epsilon = 1e-15);
    // both sites antisymmetric: four atoms, two from each column of f
    let both = OutcomeDistribution::new(2, OutcomeKind::SignPattern, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
    let out = apply_spatial_blur(&both, &f).unwrap();
    let at = |c: [u8; 2]| out.get(space.index_of(&c).unwrap());
    let (a, b) = (0.8f64, 0.3f64);
    assert_abs_diff_eq!(at([4, 0]), a * a * b * b, epsilon = 1e-15);
    assert_abs_diff_eq!(at([0, 4]), (1.0 - a).powi(2) * (1.0 - b).powi(2), epsilon = 1e-15);
    let two_two = a * a * (1.0 - b).powi(2) + (1.0 - a).powi(2) * b * b + 4.0 * a * (1.0 - a) * b * (1.0 - b);
    assert_abs_diff_eq!(at([2, 2]), two_two, epsilon = 1e-15);

    for sigma in [0.1, 0.5, 1.0] {
        let blurred = apply_spatial_blur(&patterns_of(&make_ghz(5).unwrap()), &gaussian_position_kernel(sigma, 1.0, 5).unwrap()).unwrap();
        assert_stochastic(&blurred);
    }
    let big = OutcomeDistribution::new(7, OutcomeKind::SignPattern, {
        let mut v = vec![0.0; 128];
        v[0] = 1.0;
        v
    })
    .unwrap();
    assert!(apply_spatial_blur(&big, &DMatrix::identity(7, 7)).is_err());
}

#[test]
fn bs_inverse_examples() {
    for n in [1usize, 5, 10, 15] {
        let st = singles_of(&make_phi_state(n, 2.0).unwrap());
        assert!(common::max_abs_diff(invert_bs_error(&apply_bs_error(&st, 0.0).unwrap(), 0.0).unwrap().probs(), st.probs()) < 1e-15);
        for q in [0.01, 0.1, 0.3] {
            let back = invert_bs_error(&apply_bs_error(&st, q).unwrap(), q).unwrap();
            assert!(common::max_abs_diff(back.probs(), st.probs()) < 1e-10, "n = {n}, q = {q}");
        }
    }
    let q = 0.2;
    let obs = OutcomeDistribution::new(1, OutcomeKind::PairCount, vec![1.0 - q, q]).unwrap();
    let p = invert_bs_error(&obs, q).unwrap();
    assert_abs_diff_eq!(p.get(0), 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(p.get(1), 0.0, epsilon = 1e-15);
    assert!(matches!(invert_bs_error(&obs, 1.0), Err(latticeprobe::Error::Singular(_)) | Err(latticeprobe::Error::InvalidParameter(_))));
}

/// Distribution of the number of antisymmetric sites inside `subset`.
fn restricted_singles(patterns: &OutcomeDistribution, subset: &[usize]) -> OutcomeDistribution {
    let n = patterns.n();
    let mut out = vec![0.0; subset.len() + 1];
    for (mask, &w) in patterns.probs().iter().enumerate() {
        let j = subset.iter().filter(|&&c| mask >> (n - c) & 1 == 1).count();
        out[j] += w;
    }
    OutcomeDistribution::new(subset.len(), OutcomeKind::SinglesCount, out).unwrap()
}

#[test]
fn subset_purity_corrector() {
    let ghz = patterns_of(&make_ghz(4).unwrap());
    let ideal = restricted_singles(&ghz, &[1]);
    assert_abs_diff_eq!(subset_purity_corrected(ideal.probs(), 0.0).unwrap(), 0.5, epsilon = 1e-12);

    // with q = 0 the corrector is the parity sum
    let obs = [0.4, 0.35, 0.25];
    assert_abs_diff_eq!(subset_purity_corrected(&obs, 0.0).unwrap(), 0.4 - 0.35 + 0.25, epsilon = 1e-15);

    let cluster = patterns_of(&make_phi_state(5, std::f64::consts::PI).unwrap());
    let q = 0.1;
    let observed = apply_bs_error(&restricted_singles(&cluster, &[2, 3]), q).unwrap();
    assert_abs_diff_eq!(subset_purity_corrected(observed.probs(), q).unwrap(), 0.25, epsilon = 1e-10);
}

#[test]
fn avpur_bs_corrector() {
    let prof = purity_profile(&make_phi_state(6, 1.1).unwrap()).unwrap();
    let pairs = OutcomeDistribution::new(6, OutcomeKind::PairCount, singles_distribution(&prof).unwrap().into_probs()).unwrap();
    for k in 0..=6 {
        assert_abs_diff_eq!(avpur_corrected_bs(&pairs, 0.0, k).unwrap(), prof.get(k), epsilon = 1e-12);
    }

    let obs = apply_bs_error(&singles_of(&make_ghz(10).unwrap()), 0.05).unwrap();
    assert_abs_diff_eq!(avpur_corrected_bs(&obs, 0.05, 5).unwrap(), 0.5, epsilon = 1e-9);

    for q in [0.0, 0.05, 0.2, 0.45] {
        let a = bs_correction_matrix(12, q).unwrap();
        for k in 0..=12 {
            let limit = bs_gain(q).powi(k as i32) * (1.0 + 1e-12);
            assert!(a.row(k).iter().all(|x| x.abs() <= limit), "k = {k}, q = {q}");
        }
    }
}

#[test]
fn detector_inverse_examples() {
    for n in [1usize, 4, 8, 12] {
        let st = singles_of(&make_phi_state(n, 0.8).unwrap());
        for p in [0.0, 0.05, 0.2] {
            let back = invert_detector_error_explicit(&apply_detector_error(&st, p).unwrap(), p).unwrap();
            assert!(common::max_abs_diff(back.probs(), st.probs()) < 1e-9, "n = {n}, p = {p}");
        }
        let obs = apply_detector_error(&st, 0.0).unwrap();
        let back = invert_detector_error_explicit(&obs, 0.0).unwrap();
        for j in 0..=n {
            assert_eq!(back.get(j), obs.get(2 * j));
        }
    }
    let p = 0.15;
    let obs = OutcomeDistribution::new(1, OutcomeKind::AtomCount, vec![p * p, 2.0 * p * (1.0 - p), (1.0 - p) * (1.0 - p)]).unwrap();
    let back = invert_detector_error_explicit(&obs, p).unwrap();
    assert_abs_diff_eq!(back.get(0), 0.0, epsilon = 1e-15);
    assert_abs_diff_eq!(back.get(1), 1.0, epsilon = 1e-15);
}

#[test]
fn least_squares_inverse() {
    let cluster = singles_of(&make_phi_state(15, std::f64::consts::PI).unwrap());
    let obs = apply_detector_error(&cluster, 0.1).unwrap();
    let back = invert_detector_error_least_squares(&obs, 0.1).unwrap();
    assert!(common::max_abs_diff(back.probs(), cluster.probs()) < 1e-9);

    let m = detector_error_matrix(6, 0.1).unwrap();
    let truth = singles_of(&make_ghz(6).unwrap());
    let exact = &m * DVector::from_column_slice(truth.probs());
    let x = invert_least_squares(exact.as_slice(), &m).unwrap();
    assert!(common::max_abs_diff(&x, truth.probs()) < 1e-10);

    let perturbed: Vec<f64> = exact.iter().enumerate().map(|(i, v)| v + 1e-3 * ((i * 7 % 5) as f64 - 2.0)).collect();
    let x = invert_least_squares(&perturbed, &m).unwrap();
    let residual = DVector::from_vec(perturbed) - &m * DVector::from_vec(x);
    assert!((m.transpose() * residual).amax() < 1e-10);

    let deficient = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
    assert!(matches!(invert_least_squares(&[1.0, 0.0, 0.0], &deficient), Err(latticeprobe::Error::RankDeficient { .. })));
}

#[test]
fn spatial_inverse() {
    let st = make_phi_state(4, 2.4).unwrap();
    let patterns = patterns_of(&st);
    let id = DMatrix::identity(4, 4);
    let back = invert_spatial_explicit(&apply_spatial_blur(&patterns, &id).unwrap(), &id).unwrap();
    assert!(common::max_abs_diff(back.probs(), patterns.probs()) < 1e-15);
    for sigma in [0.1, 0.25, 0.5] {
        let f = gaussian_position_kernel(sigma, 1.0, 4).unwrap();
        let blurred = apply_spatial_blur(&patterns, &f).unwrap();
        let explicit = invert_spatial_explicit(&blurred, &f).unwrap();
        assert!(common::max_abs_diff(explicit.probs(), patterns.probs()) < 1e-8, "σ = {sigma}");
        let ls = invert_spatial_least_squares(&blurred, &f).unwrap();
        assert!(common::max_abs_diff(ls.probs(), patterns.probs()) < 1e-8, "σ = {sigma}");
    }

    // n = 2 hand algebra: one antisymmetric site blurred by f, inverted with f^{-1}
    let f = DMatrix::from_row_slice(2, 2, &[0.8, 0.3, 0.2, 0.7]);
    let g = f.clone().try_inverse().unwrap();
    let only_first = OutcomeDistribution::new(2, OutcomeKind::SignPattern, vec![0.0, 0.0, 1.0, 0.0]).unwrap();
    let obs = apply_spatial_blur(&only_first, &f).unwrap();
    let space = MultisetSpace::new(2).unwrap();
    let at = |c: [u8; 2]| obs.get(space.index_of(&c).unwrap());
    // P({site}) = Σ over ordered pairs (x1, x2) of g[s,x1] g[s,x2] P_exp(x1 x2) / s(A)
    let hand = |s: usize| g[(s, 0)] * g[(s, 0)] * at([2, 0]) + g[(s, 0)] * g[(s, 1)] * at([1, 1]) + g[(s, 1)] * g[(s, 1)] * at([0, 2]);
    let back = invert_spatial_explicit(&obs, &f).unwrap();
    assert_abs_diff_eq!(back.get(0b10), hand(0), epsilon = 1e-12);
    assert_abs_diff_eq!(back.get(0b01), hand(1), epsilon = 1e-12);
    assert_abs_diff_eq!(back.get(0b10), 1.0, epsilon = 1e-12);
}

#[test]
fn combined_correction() {
    let st = make_phi_state(7, 1.4).unwrap();
    let prof = purity_profile(&st).unwrap();
    let atoms = apply_combined_error(&singles_of(&st), 0.0, 0.0).unwrap();
    for method in [InversionMethod::Explicit, InversionMethod::LeastSquares] {
        let c = correct_combined(&atoms, 0.0, 0.0, method).unwrap();
        assert!(common::max_abs_diff(c.profile.values(), prof.values()) < 1e-12);
        assert_eq!(c.method, method);
    }

    let cluster = make_phi_state(10, std::f64::consts::PI).unwrap();
    let truth = purity_profile(&cluster).unwrap();
    let obs = apply_combined_error(&singles_of(&cluster), 0.05, 0.05).unwrap();
    for method in [InversionMethod::Explicit, InversionMethod::LeastSquares] {
        let c = correct_combined(&obs, 0.05, 0.05, method).unwrap();
        assert!(common::max_abs_diff(c.profile.values(), truth.values()) < 1e-8, "{}", method.name());
    }

    let (n, p, q) = (8usize, 0.1, 0.1);
    let m = combined_correction_matrix(n, p, q, InversionMethod::Explicit).unwrap();
    let det_gain = ((1.0 + p) / (1.0 - p)).powi(2 * n as i32);
    for k in 0..=n {
        let limit = det_gain * bs_gain(q).powi(k as i32);
        assert!(m.row(k).iter().all(|x| x.abs() <= limit), "k = {k}");
    }
}

#[test]
fn correctors_are_unbiased_on_exact_distributions() {
    for n in [2usize, 5, 9, 12] {
        for st in family(n) {
            let truth = singles_of(&st);
            let prof = purity_profile(&st).unwrap();
            for (p, q) in [(0.0, 0.2), (0.2, 0.0), (0.1, 0.05), (0.2, 0.2)] {
                let obs = apply_combined_error(&truth, p, q).unwrap();
                for method in [InversionMethod::Explicit, InversionMethod::LeastSquares] {
                    let c = correct_combined(&obs, p, q, method).unwrap();
                    assert!(common::max_abs_diff(c.profile.values(), prof.values()) < 1e-8, "n = {n}, p = {p}, q = {q}");
                }
            }
        }
    }
}
