//! Exact integer combinatorics and compensated summation.
//!
//! The network inversions are alternating binomial sums. All binomials here are
//! exact integers (they fit comfortably in 64 bits for the register sizes we
//! support) and are only converted to floating point at the last step.

/// Binomial coefficient C(n, k), zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> u64 {
    if k < 0 || n < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

#[inline]
pub fn binomial_f64(n: i64, k: i64) -> f64 {
    binomial(n, k) as f64
}

/// Σ_l (−1)^l C(k, l) C(n−k, j−l), evaluated exactly.
///
/// This is the Krawtchouk kernel linking subset sizes and antisymmetric counts
/// in both directions of the singles map.
pub fn krawtchouk(n: i64, k: i64, j: i64) -> i128 {
    let mut acc: i128 = 0;
    for l in 0..=k.min(j).max(0) {
        let term = binomial(k, l) as i128 * binomial(n - k, j - l) as i128;
        if l % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Iterates over all `n`-bit masks with exactly `k` bits set, in increasing order.
pub fn masks_of_size(n: usize, k: usize) -> impl Iterator<Item = u32> {
    let limit: u64 = 1u64 << n;
    let mut next: Option<u64> = if k > n {
        None
    } else if k == 0 {
        Some(0)
    } else {
        Some((1u64 << k) - 1)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        if cur >= limit {
            return None;
        }
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            Some((((r ^ cur) >> 2) / c) | r)
        };
        Some(cur as u32)
    })
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator of floats.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

/// Compensated dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// In-place unnormalized Walsh–Hadamard transform (length must be a power of two).
pub fn walsh_hadamard(v: &mut [f64]) {
    let len = v.len();
    debug_assert!(len.is_power_of_two());
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(5, -1), 0);
        assert_eq!(binomial(5, 6), 0);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(15, 7), 6435);
        assert_eq!(binomial(30, 15), 155_117_520);
    }

    #[test]
    fn masks_enumerate_combinations() {
        for n in 0..=10usize {
            for k in 0..=n + 1 {
                let masks: Vec<u32> = masks_of_size(n, k).collect();
                assert_eq!(masks.len() as u64, binomial(n as i64, k as i64));
                assert!(masks.iter().all(|m| m.count_ones() as usize == k));
                assert!(masks.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn krawtchouk_generating_function() {
        // Σ_j x^j K(n,k,j) = (1−x)^k (1+x)^{n−k}; at x = 1 only k = 0 survives.
        for n in 0..=12 {
            for k in 0..=n {
                let at_one: i128 = (0..=n).map(|j| krawtchouk(n, k, j)).sum();
                assert_eq!(at_one, if k == 0 { 1 << n } else { 0 });
            }
        }
    }

    #[test]
    fn compensation_recovers_cancellation() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs), 2.0);
    }

    #[test]
    fn walsh_hadamard_involution() {
        let mut v = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let orig = v.clone();
        walsh_hadamard(&mut v);
        walsh_hadamard(&mut v);
        for (a, b) in v.iter().zip(&orig) {
            assert!((a / 8.0 - b).abs() < 1e-15);
        }
    }
}
