//! Squared Pauli expectation values of a pure state, grouped by support.
//!
//! `Tr ρ_B² = 2^{−|B|} Σ_{P ⊆ B} ⟨P⟩²` over Pauli strings supported inside `B`,
//! and i.i.d. dephasing multiplies `⟨P⟩²` by `(1−d)^{2 w}` where `w` counts the
//! X/Y factors of `P`. Grouping the squares by (support, w) once therefore gives
//! every subset purity for every dephasing strength.

use num_complex::Complex64 as C64;

use crate::combinatorics::{binomial_f64, CompensatedSum};

pub(crate) struct PauliSpectrum {
    n: usize,
    /// `weights[support * (n + 1) + w]`
    weights: Vec<f64>,
}

fn complex_walsh_hadamard(v: &mut [C64]) {
    let len = v.len();
    let mut h = 1;
    while h < len {
        for block in (0..len).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

impl PauliSpectrum {
    pub(crate) fn compute(n: usize, psi: &[C64]) -> Self {
        let dim = 1usize << n;
        let width = n + 1;
        let mut weights = vec![0.0; dim * width];
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        for a in 0..dim {
            for (x, slot) in buf.iter_mut().enumerate() {
                *slot = psi[x ^ a].conj() * psi[x];
            }
            // ⟨X^a Z^b⟩ = Σ_x (−1)^{b·x} conj(ψ(x⊕a)) ψ(x)
            complex_walsh_hadamard(&mut buf);
            let w = (a as u32).count_ones() as usize;
            for (b, val) in buf.iter().enumerate() {
                weights[(a | b) * width + w] += val.norm_sqr();
            }
        }
        PauliSpectrum { n, weights }
    }

    fn damped(&self, support: usize, eta2: f64) -> f64 {
        let width = self.n + 1;
        let row = &self.weights[support * width..(support + 1) * width];
        let mut acc = CompensatedSum::new();
        let mut damp = 1.0;
        for &q in row {
            acc.add(q * damp);
            damp *= eta2;
        }
        acc.value()
    }

    /// Purities of all `2^n` subsets, indexed by mask.
    pub(crate) fn subset_purities(&self, eta2: f64) -> Vec<f64> {
        let dim = 1usize << self.n;
        let mut sums: Vec<f64> = (0..dim).map(|s| self.damped(s, eta2)).collect();
        // zeta transform: sums[B] = Σ_{S ⊆ B} damped(S)
        for bit in 0..self.n {
            let b = 1usize << bit;
            for mask in 0..dim {
                if mask & b != 0 {
                    sums[mask] += sums[mask ^ b];
                }
            }
        }
        sums.iter()
            .enumerate()
            .map(|(mask, s)| s * 0.5f64.powi(mask.count_ones() as i32))
            .collect()
    }

    /// `avpur_k` for `k = 0..=n`.
    pub(crate) fn profile(&self, eta2: f64) -> Vec<f64> {
        let n = self.n;
        let mut by_size = vec![CompensatedSum::new(); n + 1];
        for support in 0..1usize << n {
            by_size[support.count_ones() as usize].add(self.damped(support, eta2));
        }
        let by_size: Vec<f64> = by_size.iter().map(|c| c.value()).collect();
        (0..=n)
            .map(|k| {
                let mut acc = CompensatedSum::new();
                for (s, t) in by_size.iter().enumerate().take(k + 1) {
                    acc.add(binomial_f64((n - s) as i64, (k - s) as i64) * t);
                }
                acc.value() * 0.5f64.powi(k as i32) / binomial_f64(n as i64, k as i64)
            })
            .collect()
    }
}
