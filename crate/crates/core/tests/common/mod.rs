//! Shared helpers for the integration tests.
#![allow(dead_code)]

use latticeprobe::qstate::{QubitRegisterState, C64};
use nalgebra::DMatrix;

/// Two-copy index: copy I in the high `n` bits, copy II in the low `n` bits.
fn two_copy_index(x: usize, y: usize, n: usize) -> usize {
    (x << n) | y
}

/// Swap of column `col` (1-based) between the two copies, as a dense
/// `4^n × 4^n` permutation matrix.
pub fn column_swap(n: usize, col: usize) -> DMatrix<C64> {
    let d = 1usize << n;
    let bit = 1usize << (n - col);
    let mut m = DMatrix::zeros(d * d, d * d);
    for x in 0..d {
        for y in 0..d {
            let (bx, by) = (x & bit, y & bit);
            let x2 = (x & !bit) | by;
            let y2 = (y & !bit) | bx;
            m[(two_copy_index(x2, y2, n), two_copy_index(x, y, n))] = C64::new(1.0, 0.0);
        }
    }
    m
}

pub fn two_copy(rho: &DMatrix<C64>) -> DMatrix<C64> {
    rho.kronecker(rho)
}

/// Probability of each sign pattern (bit `n − c` set means column `c` is
/// antisymmetric), by projecting `ρ⊗ρ` with `⊗_c (1 ± SWAP_c)/2`.
pub fn projector_patterns(state: &QubitRegisterState) -> Vec<f64> {
    let n = state.n();
    let rr = two_copy(&state.density_matrix().unwrap());
    let dim = rr.nrows();
    let id = DMatrix::<C64>::identity(dim, dim);
    let swaps: Vec<DMatrix<C64>> = (1..=n).map(|c| column_swap(n, c)).collect();
    (0..1usize << n)
        .map(|s| {
            let mut proj = id.clone();
            for c in 1..=n {
                let minus = s >> (n - c) & 1 == 1;
                let sign = if minus { -1.0 } else { 1.0 };
                let factor = (&id + &swaps[c - 1] * C64::new(sign, 0.0)) * C64::new(0.5, 0.0);
                proj = factor * proj;
            }
            (proj * &rr).trace().re
        })
        .collect()
}

/// `Tr(SWAP_B ρ⊗ρ)` for every subset mask `B`.
pub fn swap_purities(state: &QubitRegisterState) -> Vec<f64> {
    let n = state.n();
    let rr = two_copy(&state.density_matrix().unwrap());
    let dim = rr.nrows();
    (0..1usize << n)
        .map(|b| {
            let mut op = DMatrix::<C64>::identity(dim, dim);
            for c in 1..=n {
                if b >> (n - c) & 1 == 1 {
                    op = column_swap(n, c) * op;
                }
            }
            (op * &rr).trace().re
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
