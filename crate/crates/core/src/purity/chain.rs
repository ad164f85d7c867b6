//! Transfer-matrix contraction of subset purities for the cluster-like family.
//!
//! For `|φ_n⟩` with amplitude `e^{iφ c(x)}/√2^n`, the two-copy sum behind
//! `Tr ρ_B²` factorizes into nearest-neighbour bond phases and single-site
//! dephasing weights. Each site carries the pair `(x_i, x'_i)` of the two
//! copies, so one sweep over the chain costs `O(16 n)`.

use num_complex::Complex64 as C64;

use crate::combinatorics::binomial_f64;

/// `g(a, b) = (1 − a) b`, the "01" indicator of one bond.
#[inline]
fn g(a: usize, b: usize) -> i32 {
    ((1 - a) * b) as i32
}

#[inline]
fn split(s: usize) -> (usize, usize) {
    (s & 1, s >> 1)
}

/// Bond phase multiple for sites with copy states `s`, `t` and membership flags.
#[inline]
fn bond_count(s: usize, t: usize, in_left: bool, in_right: bool) -> i32 {
    if in_left == in_right {
        return 0;
    }
    let (x0, xp0) = split(s);
    let (x1, xp1) = split(t);
    let (y0, yp0) = if in_left { (xp0, x0) } else { (x0, xp0) };
    let (y1, yp1) = if in_right { (xp1, x1) } else { (x1, xp1) };
    g(x0, x1) + g(xp0, xp1) - g(y0, y1) - g(yp0, yp1)
}

#[inline]
fn site_weight(s: usize, in_b: bool, eta2: f64) -> f64 {
    let (x, xp) = split(s);
    if in_b && x != xp {
        eta2
    } else {
        1.0
    }
}

struct Phases([C64; 5]);

impl Phases {
    fn new(phi: f64) -> Self {
        // bond counts lie in −2..=2
        Phases(std::array::from_fn(|i| C64::from_polar(1.0, phi * (i as f64 - 2.0))))
    }

    #[inline]
    fn get(&self, count: i32) -> C64 {
        self.0[(count + 2) as usize]
    }
}

/// Membership of column `col` (0-based from the left) in `mask`.
#[inline]
fn member(n: usize, mask: u32, col: usize) -> bool {
    mask >> (n - 1 - col) & 1 == 1
}

/// `Tr ρ_B²` for `|φ_n⟩` dephased with `η² = (1 − d)²`.
pub(crate) fn subset_purity(n: usize, phi: f64, eta2: f64, mask: u32) -> f64 {
    let phases = Phases::new(phi);
    let mut v = [C64::new(0.0, 0.0); 4];
    let first = member(n, mask, 0);
    for (s, slot) in v.iter_mut().enumerate() {
        *slot = C64::new(site_weight(s, first, eta2), 0.0);
    }
    let mut prev_in = first;
    for col in 1..n {
        let cur_in = member(n, mask, col);
        let mut next = [C64::new(0.0, 0.0); 4];
        for (t, out) in next.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (s, vs) in v.iter().enumerate() {
                acc += vs * phases.get(bond_count(s, t, prev_in, cur_in));
            }
            *out = acc * site_weight(t, cur_in, eta2);
        }
        v = next;
        prev_in = cur_in;
    }
    let total: C64 = v.iter().sum();
    total.re * 0.25f64.powi(n as i32)
}

/// Average purities `avpur_k`, `k = 0..=n`, summing over all subsets at once.
///
/// The sweep state is `(copy pair, membership of the previous site, |B| so far)`.
pub(crate) fn profile(n: usize, phi: f64, eta2: f64) -> Vec<f64> {
    let phases = Phases::new(phi);
    let zero = C64::new(0.0, 0.0);
    // state[(s * 2 + in_prev) * (n + 1) + m]
    let width = n + 1;
    let idx = |s: usize, inb: usize, m: usize| (s * 2 + inb) * width + m;
    let mut state = vec![zero; 8 * width];
    for s in 0..4 {
        state[idx(s, 0, 0)] = C64::new(1.0, 0.0);
        state[idx(s, 1, 1)] = C64::new(site_weight(s, true, eta2), 0.0);
    }
    for _col in 1..n {
        let mut next = vec![zero; 8 * width];
        for t in 0..4 {
            for cur in 0..2usize {
                let w = site_weight(t, cur == 1, eta2);
                for s in 0..4 {
                    for prev in 0..2usize {
                        let ph = phases.get(bond_count(s, t, prev == 1, cur == 1)) * w;
                        for m in 0..width - cur {
                            let v = state[idx(s, prev, m)];
                            if v != zero {
                                next[idx(t, cur, m + cur)] += v * ph;
                            }
                        }
                    }
                }
            }
        }
        state = next;
    }
    let scale = 0.25f64.powi(n as i32);
    (0..=n)
        .map(|k| {
            let total: f64 = (0..4)
                .flat_map(|s| (0..2).map(move |inb| (s, inb)))
                .map(|(s, inb)| state[idx(s, inb, k)].re)
                .sum();
            total * scale / binomial_f64(n as i64, k as i64)
        })
        .collect()
}
