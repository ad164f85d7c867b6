//! Forward error channels from ideal outcome statistics to observed ones.
//!
//! * beam-splitter error: each truly symmetric pair fails to bunch with
//!   probability `q` and then looks like an antisymmetric pair;
//! * detector error: each atom on a singly occupied site is missed with
//!   probability `p`;
//! * fluctuating hopping: `q` drawn per run from the hopping distribution;
//! * spatial blur: every detected atom lands in a neighbouring bin according
//!   to a Gaussian kernel.
//!
//! Sites at different columns err independently.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::bham::qbs_detuned;
use crate::combinatorics::{binomial_f64, CompensatedSum};
use crate::error::{invalid, Error, Result};
use crate::network::{OutcomeDistribution, OutcomeKind};
use crate::MAX_SPATIAL_SITES;

/// Channel parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorParams {
    /// Pair error probability `q = q_bs + q_l`.
    pub q: f64,
    /// Single-atom miss probability `p = p_d + p_l`.
    pub p: f64,
    /// Position standard deviation, in the same unit as `lambda`.
    pub sigma: f64,
    /// Lattice wavelength; sites sit `lambda / 2` apart.
    pub lambda: f64,
}

impl Default for ErrorParams {
    fn default() -> Self {
        Self { q: 0.0, p: 0.0, sigma: 0.0, lambda: 1.0 }
    }
}

impl ErrorParams {
    pub fn new(q: f64, p: f64, sigma: f64, lambda: f64) -> Result<Self> {
        let e = Self { q, p, sigma, lambda };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("q", self.q)?;
        check_probability("p", self.p)?;
        if !(self.sigma >= 0.0) || !(self.lambda > 0.0) {
            return Err(invalid("need σ >= 0 and λ > 0"));
        }
        Ok(())
    }
}

pub(crate) fn check_probability(name: &str, v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        return Err(invalid(format!("{name} = {v} outside [0, 1)")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// beam-splitter and detector channels

/// `M[i][j] = C(n−j, i−j) q^{i−j} (1−q)^{n−i}`: `j` antisymmetric pairs seen as `i`.
pub fn bs_error_matrix(n: usize, q: f64) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&q) {
        return Err(invalid(format!("q = {q} outside [0, 1]")));
    }
    let ni = n as i64;
    Ok(DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if i < j {
            0.0
        } else {
            binomial_f64(ni - j as i64, (i - j) as i64) * q.powi((i - j) as i32) * (1.0 - q).powi((n - i) as i32)
        }
    }))
}

/// `M[i][j] = C(2j, i) p^{2j−i} (1−p)^i`: `2j` atoms on single sites, `i` detected.
pub fn detector_error_matrix(n: usize, p: f64) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p = {p} outside [0, 1]")));
    }
    Ok(DMatrix::from_fn(2 * n + 1, n + 1, |i, j| {
        let atoms = 2 * j;
        if i > atoms {
            0.0
        } else {
            binomial_f64(atoms as i64, i as i64) * p.powi((atoms - i) as i32) * (1.0 - p).powi(i as i32)
        }
    }))
}

/// Detector error after beam-splitter error, `(2n+1) × (n+1)`.
pub fn combined_channel_matrix(n: usize, p: f64, q: f64) -> Result<DMatrix<f64>> {
    Ok(detector_error_matrix(n, p)? * bs_error_matrix(n, q)?)
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|r| {
            let mut acc = CompensatedSum::new();
            for (c, &x) in v.iter().enumerate() {
                acc.add(m[(r, c)] * x);
            }
            acc.value()
        })
        .collect()
}

/// Observed pair counts `P_exp(2i)` from ideal `P(j)`.
pub fn apply_bs_error(dist: &OutcomeDistribution, q: f64) -> Result<OutcomeDistribution> {
    dist.expect(OutcomeKind::SinglesCount)?;
    let n = dist.n();
    let out = mat_vec(&bs_error_matrix(n, q)?, dist.probs());
    OutcomeDistribution::unchecked(n, OutcomeKind::PairCount, out)
}

/// Observed atom counts `P_exp(i)`, `i = 0..=2n`, from `P(j)` (or from pair
/// counts when a beam-splitter error stage came first).
pub fn apply_detector_error(dist: &OutcomeDistribution, p: f64) -> Result<OutcomeDistribution> {
    if !matches!(dist.kind(), OutcomeKind::SinglesCount | OutcomeKind::PairCount) {
        dist.expect(OutcomeKind::SinglesCount)?;
    }
    let n = dist.n();
    let out = mat_vec(&detector_error_matrix(n, p)?, dist.probs());
    OutcomeDistribution::unchecked(n, OutcomeKind::AtomCount, out)
}

/// Both stages: beam-splitter error, then detector error.
pub fn apply_combined_error(dist: &OutcomeDistribution, p: f64, q: f64) -> Result<OutcomeDistribution> {
    apply_detector_error(&apply_bs_error(dist, q)?, p)
}

// ---------------------------------------------------------------------------
// fluctuating hopping

/// Quadrature rule for the run-to-run hopping distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JDistribution {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut deriv;
        loop {
            // P_m(z) and P_{m−1}(z) by the three-term recurrence
            let (mut p_m, mut p_prev) = (1.0, 0.0);
            for j in 1..=m {
                let p_next = ((2 * j - 1) as f64 * z * p_m - (j - 1) as f64 * p_prev) / j as f64;
                p_prev = p_m;
                p_m = p_next;
            }
            deriv = m as f64 * (z * p_m - p_prev) / (z * z - 1.0);
            let step = p_m / deriv;
            z -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * deriv * deriv);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Number of Gauss–Legendre nodes for Gaussian hopping distributions.
pub const GAUSSIAN_J_NODES: usize = 32;
/// Half-width of the Gaussian quadrature window in standard deviations.
pub const GAUSSIAN_J_WIDTH: f64 = 4.0;

impl JDistribution {
    /// A discrete distribution taken verbatim.
    pub fn discrete(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::LengthMismatch { expected: nodes.len(), got: weights.len() });
        }
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(invalid("quadrature weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(invalid(format!("quadrature weights sum to {total}")));
        }
        if nodes.iter().any(|&j| !(j > 0.0)) {
            return Err(invalid("hopping values must be positive"));
        }
        Ok(Self { nodes, weights })
    }

    /// All runs at hopping `j`.
    pub fn point(j: f64) -> Result<Self> {
        Self::discrete(vec![j], vec![1.0])
    }

    /// Gaussian with the given mean and standard deviation, truncated to
    /// `±4σ` and integrated with 32-node Gauss–Legendre.
    pub fn gaussian(mean: f64, std_dev: f64) -> Result<Self> {
        if !(std_dev >= 0.0) {
            return Err(invalid("standard deviation must be nonnegative"));
        }
        if std_dev == 0.0 {
            return Self::point(mean);
        }
        if mean - GAUSSIAN_J_WIDTH * std_dev <= 0.0 {
            return Err(invalid("Gaussian hopping window reaches J <= 0"));
        }
        let (x, w) = gauss_legendre(GAUSSIAN_J_NODES);
        let half = GAUSSIAN_J_WIDTH * std_dev;
        let nodes: Vec<f64> = x.iter().map(|t| mean + half * t).collect();
        let raw: Vec<f64> = x.iter().zip(&w).map(|(t, wi)| wi * (-0.5 * (half * t / std_dev).powi(2)).exp()).collect();
        let total: f64 = raw.iter().sum();
        Self::discrete(nodes, raw.iter().map(|r| r / total).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(j, w)| j * w).sum()
    }

    /// Per-node bunching failure with the splitter timed for the mean hopping.
    pub fn failure_probabilities(&self, u: f64) -> Result<Vec<f64>> {
        let mean = self.mean();
        self.nodes.iter().map(|&j| qbs_detuned(j, mean, u)).collect()
    }

    /// Run-averaged bunching failure.
    pub fn effective_q(&self, u: f64) -> Result<f64> {
        Ok(self.failure_probabilities(u)?.iter().zip(&self.weights).map(|(q, w)| q * w).sum())
    }
}

/// Beam-splitter error averaged over run-to-run hopping fluctuations.
pub fn bs_error_matrix_random_j(n: usize, jdist: &JDistribution, u: f64) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(n + 1, n + 1);
    for (q, w) in jdist.failure_probabilities(u)?.iter().zip(jdist.weights()) {
        m += bs_error_matrix(n, *q)? * *w;
    }
    Ok(m)
}

pub fn apply_bs_error_random_j(dist: &OutcomeDistribution, jdist: &JDistribution, u: f64) -> Result<OutcomeDistribution> {
    dist.expect(OutcomeKind::SinglesCount)?;
    let n = dist.n();
    let out = mat_vec(&bs_error_matrix_random_j(n, jdist, u)?, dist.probs());
    OutcomeDistribution::unchecked(n, OutcomeKind::PairCount, out)
}

// ---------------------------------------------------------------------------
// spatial blur

/// Standard normal probability of `[lo, hi]`, accurate in both tails.
fn normal_mass(lo: f64, hi: f64) -> f64 {
    let lower_cdf = |z: f64| if z == f64::NEG_INFINITY { 0.0 } else { 0.5 * erfc(-z / std::f64::consts::SQRT_2) };
    let upper_tail = |z: f64| if z == f64::INFINITY { 0.0 } else { 0.5 * erfc(z / std::f64::consts::SQRT_2) };
    if lo >= 0.0 {
        upper_tail(lo) - upper_tail(hi)
    } else {
        lower_cdf(hi) - lower_cdf(lo)
    }
}

/// `f[x][y]`: probability that an atom at site `y` is recorded in bin `x`.
///
/// Bins have width `λ/2` and are centred on the sites; probability beyond the
/// outermost bins is folded into them, so every column sums to one.
pub fn gaussian_position_kernel(sigma: f64, lambda: f64, n: usize) -> Result<DMatrix<f64>> {
    if !(sigma >= 0.0) || !(lambda > 0.0) || n == 0 {
        return Err(invalid("kernel needs σ >= 0, λ > 0, n >= 1"));
    }
    if sigma == 0.0 {
        return Ok(DMatrix::identity(n, n));
    }
    let spacing = lambda / 2.0;
    Ok(DMatrix::from_fn(n, n, |x, y| {
        let centre = (x as f64 - y as f64) * spacing;
        let lo = if x == 0 { f64::NEG_INFINITY } else { (centre - spacing / 2.0) / sigma };
        let hi = if x == n - 1 { f64::INFINITY } else { (centre + spacing / 2.0) / sigma };
        normal_mass(lo, hi)
    }))
}

/// Multisets of detected bin positions, stored as per-bin counts.
///
/// Outcomes with `2k` atoms come before those with `2k + 2`; within a size the
/// order is lexicographic in the count vector.
#[derive(Debug, Clone)]
pub struct MultisetSpace {
    n: usize,
    counts: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

fn compositions(total: usize, bins: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
    if bins == 1 {
        prefix.push(total as u8);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for first in (0..=total).rev() {
        prefix.push(first as u8);
        compositions(total - first, bins - 1, prefix, out);
        prefix.pop();
    }
}

impl MultisetSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SPATIAL_SITES {
            return Err(Error::TooLarge { what: "spatial channel", n, max: MAX_SPATIAL_SITES });
        }
        let mut counts = Vec::new();
        for k in 0..=n {
            compositions(2 * k, n, &mut Vec::with_capacity(n), &mut counts);
        }
        let index = counts.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(Self { n, counts, index })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Per-bin counts of outcome `i`.
    pub fn counts(&self, i: usize) -> &[u8] {
        &self.counts[i]
    }

    pub fn index_of(&self, counts: &[u8]) -> Option<usize> {
        self.index.get(counts).copied()
    }

    /// Number of detected atoms in outcome `i`.
    pub fn atoms(&self, i: usize) -> usize {
        self.counts[i].iter().map(|&c| c as usize).sum()
    }

    /// Observed positions of outcome `i` as a sorted list of bins.
    pub fn positions(&self, i: usize) -> Vec<usize> {
        self.counts[i].iter().enumerate().flat_map(|(b, &c)| std::iter::repeat_n(b, c as usize)).collect()
    }

    /// `s(A) = Π_x c_x!`, the permutations fixing the ordered list.
    pub fn symmetry_factor(&self, i: usize) -> f64 {
        self.counts[i].iter().map(|&c| (1..=c as u64).product::<u64>() as f64).product()
    }
}

/// Sites (0-based) of the antisymmetric set encoded by a sign-pattern mask.
pub(crate) fn mask_sites(n: usize, mask: usize) -> Vec<usize> {
    (0..n).filter(|&site| mask >> (n - 1 - site) & 1 == 1).collect()
}

/// Distribution of blurred positions for two atoms on each of `sites`.
fn blur_sites(space: &MultisetSpace, kernel: &DMatrix<f64>, sites: &[usize]) -> Vec<(usize, f64)> {
    let n = space.n();
    let mut layer: BTreeMap<Vec<u8>, f64> = BTreeMap::from([(vec![0u8; n], 1.0)]);
    for &y in sites.iter().flat_map(|s| [s, s]) {
        let mut next: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
        for (counts, w) in &layer {
            for x in 0..n {
                let f = kernel[(x, y)];
                if f == 0.0 {
                    continue;
                }
                let mut c = counts.clone();
                c[x] += 1;
                *next.entry(c).or_insert(0.0) += w * f;
            }
        }
        layer = next;
    }
    let mut out: Vec<(usize, f64)> =
        layer.into_iter().map(|(c, w)| (space.index_of(&c).expect("multiset in space"), w)).collect();
    out.sort_unstable_by_key(|(i, _)| *i);
    out
}

/// `len(space) × 2^n` matrix: column `B` is the position distribution given
/// antisymmetric set `B`.
pub fn spatial_forward_matrix(n: usize, kernel: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if kernel.nrows() != n || kernel.ncols() != n {
        return Err(Error::LengthMismatch { expected: n, got: kernel.nrows() });
    }
    let space = MultisetSpace::new(n)?;
    let mut m = DMatrix::zeros(space.len(), 1 << n);
    for mask in 0..1usize << n {
        for (i, w) in blur_sites(&space, kernel, &mask_sites(n, mask)) {
            m[(i, mask)] = w;
        }
    }
    Ok(m)
}

/// Observed position multisets from the distribution over antisymmetric sets
/// (the sign-pattern distribution).
pub fn apply_spatial_blur(dist: &OutcomeDistribution, kernel: &DMatrix<f64>) -> Result<OutcomeDistribution> {
    dist.expect(OutcomeKind::SignPattern)?;
    let n = dist.n();
    let m = spatial_forward_matrix(n, kernel)?;
    OutcomeDistribution::unchecked(n, OutcomeKind::PositionMultiset, mat_vec(&m, dist.probs()))
}
