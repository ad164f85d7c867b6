//! The ideal detection network: purities to outcome statistics and back.
//!
//! Each column's pair of copies ends up symmetric (`+`, both atoms bunch) or
//! antisymmetric (`−`, one atom per row). Sign-pattern probabilities are the
//! Walsh–Hadamard transform of the subset purities, and counting the minus
//! signs gives the singles distribution `P(j)`, which is linked to the average
//! purities by a Krawtchouk matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, compensated_sum, krawtchouk, walsh_hadamard};
use crate::error::{invalid, Error, Result};
use crate::purity::{PurityProfile, SubsetMask, SubsetPurityMap};
use crate::{MAX_QUBITS, MAX_SIGN_PATTERN_QUBITS, MAX_SPATIAL_SITES};

/// What the entries of an [`OutcomeDistribution`] are indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeKind {
    /// `2^n` entries indexed by the minus-site mask.
    SignPattern,
    /// `n + 1` entries: number `j` of antisymmetric columns.
    SinglesCount,
    /// `n + 1` entries: `i` pairs observed as singly occupied after BS errors.
    PairCount,
    /// `2n + 1` entries: number of atoms detected on singly occupied sites.
    AtomCount,
    /// Observed-position multisets, indexed by [`crate::errmodel::MultisetSpace`].
    PositionMultiset,
}

impl OutcomeKind {
    pub fn name(self) -> &'static str {
        match self {
            OutcomeKind::SignPattern => "sign_pattern",
            OutcomeKind::SinglesCount => "singles_count",
            OutcomeKind::PairCount => "pair_count",
            OutcomeKind::AtomCount => "atom_count",
            OutcomeKind::PositionMultiset => "position_multiset",
        }
    }

    /// Number of entries for an `n`-column register.
    pub fn len(self, n: usize) -> Result<usize> {
        Ok(match self {
            OutcomeKind::SignPattern => {
                if n > MAX_SIGN_PATTERN_QUBITS {
                    return Err(Error::TooLarge { what: "sign-pattern distribution", n, max: MAX_SIGN_PATTERN_QUBITS });
                }
                1 << n
            }
            OutcomeKind::SinglesCount | OutcomeKind::PairCount => n + 1,
            OutcomeKind::AtomCount => 2 * n + 1,
            OutcomeKind::PositionMultiset => {
                if n > MAX_SPATIAL_SITES {
                    return Err(Error::TooLarge { what: "spatial channel", n, max: MAX_SPATIAL_SITES });
                }
                crate::errmodel::MultisetSpace::new(n)?.len()
            }
        })
    }
}

/// A probability vector over one of the [`OutcomeKind`] index sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    n: usize,
    kind: OutcomeKind,
    probs: Vec<f64>,
}

/// Entries may dip this far below zero before a distribution counts as unphysical.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-12;
/// Allowed deviation of the total from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

impl OutcomeDistribution {
    /// Validates length, nonnegativity and normalization.
    pub fn new(n: usize, kind: OutcomeKind, probs: Vec<f64>) -> Result<Self> {
        let dist = Self::unchecked(n, kind, probs)?;
        if let Some((index, &value)) = dist.probs.iter().enumerate().find(|(_, &p)| p < -NEGATIVITY_TOLERANCE) {
            return Err(Error::Unphysical { index, value });
        }
        let total = compensated_sum(dist.probs.iter().copied());
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(invalid(format!("distribution sums to {total}, not 1")));
        }
        Ok(dist)
    }

    /// Checks only the length; used for empirical frequencies and intermediate
    /// inversion results.
    pub fn unchecked(n: usize, kind: OutcomeKind, probs: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(invalid(format!("register width {n} outside 1..={MAX_QUBITS}")));
        }
        let expected = kind.len(n)?;
        if probs.len() != expected {
            return Err(Error::LengthMismatch { expected, got: probs.len() });
        }
        Ok(Self { n, kind, probs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> OutcomeKind {
        self.kind
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }

    pub(crate) fn expect(&self, kind: OutcomeKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch { expected: kind.name(), got: self.kind.name() });
        }
        Ok(())
    }
}

/// `P_s = 2^{−n} Σ_B (−1)^{|B ∩ s|} pur(B)` with `s` the minus-site mask.
pub fn sign_pattern_distribution(purities: &SubsetPurityMap) -> Result<OutcomeDistribution> {
    let n = purities.n();
    if n > MAX_SIGN_PATTERN_QUBITS {
        return Err(Error::TooLarge { what: "sign-pattern distribution", n, max: MAX_SIGN_PATTERN_QUBITS });
    }
    let mut p = purities.values().to_vec();
    walsh_hadamard(&mut p);
    let scale = 0.5f64.powi(n as i32);
    p.iter_mut().for_each(|v| *v *= scale);
    OutcomeDistribution::new(n, OutcomeKind::SignPattern, p)
}

/// `pur(B) = P(j_B even) − P(j_B odd)`.
pub fn purity_from_patterns(dist: &OutcomeDistribution, subset: SubsetMask) -> Result<f64> {
    dist.expect(OutcomeKind::SignPattern)?;
    if subset.n() != dist.n() {
        return Err(invalid("subset width differs from distribution width"));
    }
    let b = subset.bits();
    Ok(compensated_sum(dist.probs().iter().enumerate().map(|(s, &p)| {
        if (s as u32 & b).count_ones().is_multiple_of(2) {
            p
        } else {
            -p
        }
    })))
}

/// All subset purities from a sign-pattern distribution (inverse transform).
pub fn purities_from_patterns(dist: &OutcomeDistribution) -> Result<SubsetPurityMap> {
    dist.expect(OutcomeKind::SignPattern)?;
    let mut v = dist.probs().to_vec();
    walsh_hadamard(&mut v);
    SubsetPurityMap::new(dist.n(), v)
}

/// Marginal over the number of minus signs.
pub fn count_minus_signs(dist: &OutcomeDistribution) -> Result<OutcomeDistribution> {
    dist.expect(OutcomeKind::SignPattern)?;
    let n = dist.n();
    let mut acc = vec![crate::combinatorics::CompensatedSum::new(); n + 1];
    for (s, &p) in dist.probs().iter().enumerate() {
        acc[s.count_ones() as usize].add(p);
    }
    OutcomeDistribution::unchecked(n, OutcomeKind::SinglesCount, acc.iter().map(|c| c.value()).collect())
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(invalid(format!("register width {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

/// Integer numerators of the singles map: `P(j) = 2^{−n} Σ_k num[j][k] avpur_k`.
fn singles_numerators(n: usize) -> Vec<Vec<i128>> {
    let ni = n as i64;
    (0..=ni)
        .map(|j| (0..=ni).map(|k| binomial(ni, k) as i128 * krawtchouk(ni, k, j)).collect())
        .collect()
}

/// `(n+1) × (n+1)` matrix taking `avpur` to `P(j)`.
pub fn singles_matrix(n: usize) -> Result<DMatrix<f64>> {
    check_width(n)?;
    let num = singles_numerators(n);
    let scale = 0.5f64.powi(n as i32);
    Ok(DMatrix::from_fn(n + 1, n + 1, |j, k| num[j][k] as f64 * scale))
}

/// `(n+1) × (n+1)` matrix taking `P(j)` to `avpur`.
pub fn avpur_matrix(n: usize) -> Result<DMatrix<f64>> {
    check_width(n)?;
    let ni = n as i64;
    Ok(DMatrix::from_fn(n + 1, n + 1, |k, j| {
        krawtchouk(ni, j as i64, k as i64) as f64 / binomial(ni, k as i64) as f64
    }))
}

/// `P(j) = 2^{−n} Σ_k C(n,k) avpur_k Σ_l C(k,l) C(n−k,j−l) (−1)^l`.
pub fn singles_distribution(profile: &PurityProfile) -> Result<OutcomeDistribution> {
    let n = profile.n();
    check_width(n)?;
    let num = singles_numerators(n);
    let scale = 0.5f64.powi(n as i32);
    let probs: Vec<f64> = num
        .iter()
        .map(|row| compensated_sum(row.iter().zip(profile.values()).map(|(&c, &a)| c as f64 * a)) * scale)
        .collect();
    if let Some((index, &value)) = probs.iter().enumerate().find(|(_, &p)| p < -1e-9) {
        return Err(Error::Unphysical { index, value });
    }
    OutcomeDistribution::unchecked(n, OutcomeKind::SinglesCount, probs)
}

/// `avpur_k = C(n,k)^{−1} Σ_j P(j) Σ_l C(j,l) C(n−j,k−l) (−1)^l`.
///
/// The result is not range-checked, since noisy input maps outside the purity box.
pub fn avpur_from_pj(dist: &OutcomeDistribution) -> Result<PurityProfile> {
    dist.expect(OutcomeKind::SinglesCount)?;
    let n = dist.n();
    let ni = n as i64;
    let avpur = (0..=ni)
        .map(|k| {
            let s = compensated_sum(
                dist.probs().iter().enumerate().map(|(j, &p)| krawtchouk(ni, j as i64, k) as f64 * p),
            );
            s / binomial(ni, k) as f64
        })
        .collect();
    Ok(PurityProfile::from_estimate(avpur))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(v: &[f64]) -> PurityProfile {
        PurityProfile::new(v.to_vec()).unwrap()
    }

    #[test]
    fn single_qubit_patterns() {
        let pure = SubsetPurityMap::new(1, vec![1.0, 1.0]).unwrap();
        assert_eq!(sign_pattern_distribution(&pure).unwrap().probs(), &[1.0, 0.0]);
        let mixed = SubsetPurityMap::new(1, vec![1.0, 0.5]).unwrap();
        assert_eq!(sign_pattern_distribution(&mixed).unwrap().probs(), &[0.75, 0.25]);
    }

    #[test]
    fn product_profile_gives_no_singles() {
        let d = singles_distribution(&profile(&[1.0; 6])).unwrap();
        assert!((d.get(0) - 1.0).abs() < 1e-15);
        assert!(d.probs()[1..].iter().all(|p| p.abs() < 1e-15));
    }

    #[test]
    fn maximally_mixed_two_sites() {
        let d = singles_distribution(&profile(&[1.0, 0.5, 0.25])).unwrap();
        let want = [9.0 / 16.0, 6.0 / 16.0, 1.0 / 16.0];
        for (a, b) in d.probs().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn no_singles_means_pure() {
        let mut p = vec![0.0; 8];
        p[0] = 1.0;
        let d = OutcomeDistribution::new(7, OutcomeKind::SinglesCount, p).unwrap();
        assert!(avpur_from_pj(&d).unwrap().values().iter().all(|&a| (a - 1.0).abs() < 1e-15));
    }

    #[test]
    fn matrices_are_inverse() {
        for n in 1..=15 {
            let prod = avpur_matrix(n).unwrap() * singles_matrix(n).unwrap();
            let err = (prod - DMatrix::<f64>::identity(n + 1, n + 1)).abs().max();
            assert!(err < 1e-10, "n = {n}: {err}");
        }
    }

    #[test]
    fn three_qubit_full_parity() {
        let probs: Vec<f64> = (1..=8).map(|v| v as f64 / 36.0).collect();
        let d = OutcomeDistribution::new(3, OutcomeKind::SignPattern, probs.clone()).unwrap();
        // index bits: column 1 is the top bit, set = minus
        let p = |s: &str| {
            let idx = s.chars().fold(0usize, |acc, c| (acc << 1) | usize::from(c == '-'));
            probs[idx]
        };
        let want = p("+++") + p("+--") + p("-+-") + p("--+") - p("---") - p("+-+") - p("++-") - p("-++");
        let got = purity_from_patterns(&d, SubsetMask::full(3)).unwrap();
        assert!((got - want).abs() < 1e-15);
    }

    #[test]
    fn kind_and_length_checked() {
        assert!(OutcomeDistribution::new(2, OutcomeKind::SinglesCount, vec![1.0, 0.0]).is_err());
        assert!(OutcomeDistribution::new(1, OutcomeKind::SinglesCount, vec![1.1, -0.1]).is_err());
        let d = OutcomeDistribution::new(1, OutcomeKind::SinglesCount, vec![1.0, 0.0]).unwrap();
        assert!(purity_from_patterns(&d, SubsetMask::full(1)).is_err());
        assert!(OutcomeKind::SignPattern.len(11).is_err());
    }
}
