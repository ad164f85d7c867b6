//! Correctors that undo the error channels on observed statistics.
//!
//! Every corrector is linear in the observed distribution, so it is unbiased
//! and its single-run variance follows from its coefficients (see
//! [`crate::variance`]). The explicit formulas use exact integer binomials and
//! compensated sums; the least-squares alternative solves the over-determined
//! system through a QR factorization.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, binomial_f64, compensated_sum, CompensatedSum};
use crate::errmodel::{mask_sites, MultisetSpace};
use crate::error::{invalid, Error, Result};
use crate::network::{avpur_matrix, OutcomeDistribution, OutcomeKind};
use crate::purity::PurityProfile;
use crate::MAX_QUBITS;

/// A corrector's coefficient matrix: estimates = `entries · observed`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionMatrix {
    pub n: usize,
    /// What the rows estimate and the columns index.
    pub label: String,
    pub entries: DMatrix<f64>,
}

impl CorrectionMatrix {
    pub fn apply(&self, observed: &[f64]) -> Result<Vec<f64>> {
        if observed.len() != self.entries.ncols() {
            return Err(Error::LengthMismatch { expected: self.entries.ncols(), got: observed.len() });
        }
        Ok(apply_matrix(&self.entries, observed))
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        self.entries.row(r).iter().copied().collect()
    }
}

pub(crate) fn apply_matrix(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
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

fn check_error_rate(name: &str, v: f64) -> Result<()> {
    if v == 1.0 {
        return Err(Error::Singular(format!("{name} = 1 erases all information")));
    }
    if !(0.0..1.0).contains(&v) {
        return Err(invalid(format!("{name} = {v} outside [0, 1)")));
    }
    Ok(())
}

fn check_width(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::TooLarge { what: "corrector", n, max: MAX_QUBITS });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// beam-splitter error

/// `Binv[j][i] = C(n−i, n−j) (−q)^{j−i} / (1−q)^{n−i}` for `i <= j`.
pub fn bs_inverse_matrix(n: usize, q: f64) -> Result<CorrectionMatrix> {
    check_width(n)?;
    check_error_rate("q", q)?;
    let ni = n as i64;
    let entries = DMatrix::from_fn(n + 1, n + 1, |j, i| {
        if i > j {
            0.0
        } else {
            binomial_f64(ni - i as i64, ni - j as i64) * (-q).powi((j - i) as i32) / (1.0 - q).powi((n - i) as i32)
        }
    });
    Ok(CorrectionMatrix { n, label: "P(j) from pair counts".into(), entries })
}

/// Recovers `P(j)` from observed pair counts.
pub fn invert_bs_error(observed: &OutcomeDistribution, q: f64) -> Result<OutcomeDistribution> {
    observed.expect(OutcomeKind::PairCount)?;
    let n = observed.n();
    let p = bs_inverse_matrix(n, q)?.apply(observed.probs())?;
    OutcomeDistribution::unchecked(n, OutcomeKind::SinglesCount, p)
}

/// `(1+q)/(1−q)`, the per-site amplification of the beam-splitter corrector.
pub fn bs_gain(q: f64) -> f64 {
    (1.0 + q) / (1.0 - q)
}

/// Coefficients `((1+q)/(1−q))^{k−i} (−1)^i`, `i = 0..=k`, of the subset corrector.
pub fn subset_bs_coefficients(k: usize, q: f64) -> Result<Vec<f64>> {
    check_error_rate("q", q)?;
    let r = bs_gain(q);
    Ok((0..=k).map(|i| r.powi((k - i) as i32) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect())
}

/// `pur(B)` from the probabilities of seeing `2 i_B` atoms inside `B`
/// (`observed_in_b[i_B]`, `i_B = 0..=|B|`).
pub fn subset_purity_corrected(observed_in_b: &[f64], q: f64) -> Result<f64> {
    if observed_in_b.is_empty() {
        return Err(invalid("need probabilities for i_B = 0..=|B|"));
    }
    let c = subset_bs_coefficients(observed_in_b.len() - 1, q)?;
    Ok(compensated_sum(c.iter().zip(observed_in_b).map(|(a, b)| a * b)))
}

/// Coefficients `(−(1+p²)/(1−p²))^i` of the spatially resolved detector
/// corrector, where a site counts as singly occupied when at least one of its
/// two atoms is seen.
pub fn subset_detector_coefficients(k: usize, p: f64) -> Result<Vec<f64>> {
    check_error_rate("p", p)?;
    let r = (1.0 + p * p) / (1.0 - p * p);
    Ok((0..=k).map(|i| (-r).powi(i as i32)).collect())
}

/// `pur(B)` from the probabilities that `i_B` sites of `B` show atoms.
pub fn subset_purity_corrected_detector(observed_in_b: &[f64], p: f64) -> Result<f64> {
    if observed_in_b.is_empty() {
        return Err(invalid("need probabilities for i_B = 0..=|B|"));
    }
    let c = subset_detector_coefficients(observed_in_b.len() - 1, p)?;
    Ok(compensated_sum(c.iter().zip(observed_in_b).map(|(a, b)| a * b)))
}

/// `A_ki = C(n,k)^{−1} Σ_l (−1)^l ((1+q)/(1−q))^{k−l} C(i,l) C(n−i,k−l)`.
pub fn bs_correction_matrix(n: usize, q: f64) -> Result<CorrectionMatrix> {
    check_width(n)?;
    check_error_rate("q", q)?;
    let r = bs_gain(q);
    let ni = n as i64;
    let entries = DMatrix::from_fn(n + 1, n + 1, |k, i| {
        let (k, i) = (k as i64, i as i64);
        let s = compensated_sum((0..=k.min(i)).map(|l| {
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            sign * r.powi((k - l) as i32) * (binomial(i, l) as f64) * (binomial(ni - i, k - l) as f64)
        }));
        s / binomial(ni, k) as f64
    });
    Ok(CorrectionMatrix { n, label: "avpur_k from pair counts".into(), entries })
}

/// `avpur_k = Σ_i A_ki P_exp(2i)`.
pub fn avpur_corrected_bs(observed: &OutcomeDistribution, q: f64, k: usize) -> Result<f64> {
    observed.expect(OutcomeKind::PairCount)?;
    let n = observed.n();
    if k > n {
        return Err(invalid(format!("k = {k} exceeds n = {n}")));
    }
    let a = bs_correction_matrix(n, q)?;
    Ok(compensated_sum(a.row(k).iter().zip(observed.probs()).map(|(c, p)| c * p)))
}

/// The whole corrected profile from observed pair counts.
pub fn profile_corrected_bs(observed: &OutcomeDistribution, q: f64) -> Result<PurityProfile> {
    observed.expect(OutcomeKind::PairCount)?;
    let a = bs_correction_matrix(observed.n(), q)?;
    Ok(PurityProfile::from_estimate(a.apply(observed.probs())?))
}

// ---------------------------------------------------------------------------
// detector error

/// `P(j) = Σ_{i >= 2j} C(i, 2j) (−p)^{i−2j} / (1−p)^i · P_exp(i)`, `(n+1) × (2n+1)`.
pub fn detector_inverse_matrix(n: usize, p: f64) -> Result<CorrectionMatrix> {
    check_width(n)?;
    check_error_rate("p", p)?;
    let entries = DMatrix::from_fn(n + 1, 2 * n + 1, |j, i| {
        let m = 2 * j;
        if i < m {
            0.0
        } else {
            binomial_f64(i as i64, m as i64) * (-p).powi((i - m) as i32) / (1.0 - p).powi(i as i32)
        }
    });
    Ok(CorrectionMatrix { n, label: "P(j) from atom counts".into(), entries })
}

/// Explicit detector corrector: undoes the atom-count thinning and keeps the
/// even counts.
pub fn invert_detector_error_explicit(observed: &OutcomeDistribution, p: f64) -> Result<OutcomeDistribution> {
    observed.expect(OutcomeKind::AtomCount)?;
    let n = observed.n();
    let out = detector_inverse_matrix(n, p)?.apply(observed.probs())?;
    OutcomeDistribution::unchecked(n, OutcomeKind::SinglesCount, out)
}

// ---------------------------------------------------------------------------
// least squares

/// Relative size of the smallest `R` diagonal below which the forward matrix is
/// treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// `R^{−1} Qᵀ` for a tall forward matrix of full column rank: the linear map
/// from observations to the least-squares preimage.
pub fn least_squares_operator(forward: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (rows, cols) = forward.shape();
    if rows < cols {
        return Err(Error::RankDeficient { rank: rows, cols });
    }
    let qr = forward.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rank = r.diagonal().iter().filter(|v| v.abs() > RANK_TOLERANCE * scale).count();
    if rank < cols || scale == 0.0 {
        return Err(Error::RankDeficient { rank, cols });
    }
    let qt = qr.q().transpose();
    let op = r
        .solve_upper_triangular(&qt)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    Ok(op)
}

/// Minimizes `‖forward · x − observed‖²`; no sign constraints on `x`.
pub fn invert_least_squares(observed: &[f64], forward: &DMatrix<f64>) -> Result<Vec<f64>> {
    if observed.len() != forward.nrows() {
        return Err(Error::LengthMismatch { expected: forward.nrows(), got: observed.len() });
    }
    Ok(apply_matrix(&least_squares_operator(forward)?, observed))
}

/// Least-squares detector corrector, `P(j)` from atom counts.
pub fn invert_detector_error_least_squares(observed: &OutcomeDistribution, p: f64) -> Result<OutcomeDistribution> {
    observed.expect(OutcomeKind::AtomCount)?;
    let n = observed.n();
    check_error_rate("p", p)?;
    let forward = crate::errmodel::detector_error_matrix(n, p)?;
    let out = invert_least_squares(observed.probs(), &forward)?;
    OutcomeDistribution::unchecked(n, OutcomeKind::SinglesCount, out)
}

/// `(n+1) × (2n+1)` least-squares detector corrector.
pub fn detector_least_squares_matrix(n: usize, p: f64) -> Result<CorrectionMatrix> {
    check_width(n)?;
    check_error_rate("p", p)?;
    let entries = least_squares_operator(&crate::errmodel::detector_error_matrix(n, p)?)?;
    Ok(CorrectionMatrix { n, label: "P(j) from atom counts (least squares)".into(), entries })
}

// ---------------------------------------------------------------------------
// combined

/// How an over-determined channel is inverted: the explicit formula or least squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InversionMethod {
    #[default]
    Explicit,
    LeastSquares,
}

impl InversionMethod {
    pub fn name(self) -> &'static str {
        match self {
            InversionMethod::Explicit => "explicit",
            InversionMethod::LeastSquares => "least-squares",
        }
    }
}

/// A corrected profile tagged with the detector method that produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedCorrection {
    pub profile: PurityProfile,
    pub method: InversionMethod,
}

/// `(n+1) × (2n+1)` map from atom counts to `avpur`: detector inverse, then `A_ki`.
pub fn combined_correction_matrix(n: usize, p: f64, q: f64, method: InversionMethod) -> Result<CorrectionMatrix> {
    let det = match method {
        InversionMethod::Explicit => detector_inverse_matrix(n, p)?,
        InversionMethod::LeastSquares => detector_least_squares_matrix(n, p)?,
    };
    let a = bs_correction_matrix(n, q)?;
    Ok(CorrectionMatrix {
        n,
        label: format!("avpur_k from atom counts ({})", method.name()),
        entries: a.entries * det.entries,
    })
}

/// Corrects detector error first, then beam-splitter error.
pub fn correct_combined(observed: &OutcomeDistribution, p: f64, q: f64, method: InversionMethod) -> Result<CombinedCorrection> {
    observed.expect(OutcomeKind::AtomCount)?;
    let n = observed.n();
    let pairs = match method {
        InversionMethod::Explicit => detector_inverse_matrix(n, p)?.apply(observed.probs())?,
        InversionMethod::LeastSquares => detector_least_squares_matrix(n, p)?.apply(observed.probs())?,
    };
    let avpur = bs_correction_matrix(n, q)?.apply(&pairs)?;
    Ok(CombinedCorrection { profile: PurityProfile::from_estimate(avpur), method })
}

/// Detector-only profile correction (`q = 0`) as a matrix over atom counts.
pub fn detector_profile_matrix(n: usize, p: f64, method: InversionMethod) -> Result<CorrectionMatrix> {
    let det = match method {
        InversionMethod::Explicit => detector_inverse_matrix(n, p)?,
        InversionMethod::LeastSquares => detector_least_squares_matrix(n, p)?,
    };
    Ok(CorrectionMatrix {
        n,
        label: format!("avpur_k from atom counts, detector only ({})", method.name()),
        entries: avpur_matrix(n)? * det.entries,
    })
}

// ---------------------------------------------------------------------------
// spatial

/// Permanent by Ryser's formula with Gray-code updates.
pub fn permanent(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "permanent needs a square matrix");
    if n == 0 {
        return 1.0;
    }
    let mut row_sums = vec![0.0; n];
    let mut total = CompensatedSum::new();
    let mut gray: u64 = 0;
    for step in 1..(1u64 << n) {
        let next = step ^ (step >> 1);
        let changed = (gray ^ next).trailing_zeros() as usize;
        let sign_in = if next & (1 << changed) != 0 { 1.0 } else { -1.0 };
        for (r, s) in row_sums.iter_mut().enumerate() {
            *s += sign_in * m[(r, changed)];
        }
        gray = next;
        let prod: f64 = row_sums.iter().product();
        let sign = if (n - next.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
        total.add(sign * prod);
    }
    total.value()
}

/// Inverse of the position kernel, failing when it is numerically singular.
pub fn kernel_inverse(kernel: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = kernel.nrows();
    let lu = kernel.clone().lu();
    let inv = lu
        .try_inverse()
        .ok_or_else(|| Error::Singular("position kernel is not invertible".into()))?;
    let residual = (kernel * &inv - DMatrix::<f64>::identity(n, n)).abs().max();
    if !residual.is_finite() || residual > 1e-8 {
        return Err(Error::Singular(format!("position kernel inverse residual {residual:e}")));
    }
    Ok(inv)
}

/// `2^n × len(space)` explicit spatial corrector.
///
/// The entry for antisymmetric set `B` and multiset `A` with `|A| = 2|B|` is
/// `perm(G)/2^{|B|}` with `G_ij = f^{−1}(b_j, a_i)`, `a` the observed positions
/// and `b` the sites of `B` each listed twice.
pub fn spatial_explicit_matrix(n: usize, kernel: &DMatrix<f64>) -> Result<CorrectionMatrix> {
    let space = MultisetSpace::new(n)?;
    if kernel.nrows() != n || kernel.ncols() != n {
        return Err(Error::LengthMismatch { expected: n, got: kernel.nrows() });
    }
    let inv = kernel_inverse(kernel)?;
    let mut entries = DMatrix::zeros(1 << n, space.len());
    for mask in 0..1usize << n {
        let sites = mask_sites(n, mask);
        let doubled: Vec<usize> = sites.iter().flat_map(|&s| [s, s]).collect();
        let scale = 0.5f64.powi(sites.len() as i32);
        for a in 0..space.len() {
            if space.atoms(a) != doubled.len() {
                continue;
            }
            let pos = space.positions(a);
            let g = DMatrix::from_fn(pos.len(), pos.len(), |i, j| inv[(doubled[j], pos[i])]);
            entries[(mask, a)] = permanent(&g) * scale;
        }
    }
    Ok(CorrectionMatrix { n, label: "P(B) from position multisets".into(), entries })
}

/// Recovers the distribution over antisymmetric sets from blurred positions.
pub fn invert_spatial_explicit(observed: &OutcomeDistribution, kernel: &DMatrix<f64>) -> Result<OutcomeDistribution> {
    observed.expect(OutcomeKind::PositionMultiset)?;
    let n = observed.n();
    let out = spatial_explicit_matrix(n, kernel)?.apply(observed.probs())?;
    OutcomeDistribution::unchecked(n, OutcomeKind::SignPattern, out)
}

/// `2^n × len(space)` least-squares spatial corrector.
pub fn spatial_least_squares_matrix(n: usize, kernel: &DMatrix<f64>) -> Result<CorrectionMatrix> {
    let forward = crate::errmodel::spatial_forward_matrix(n, kernel)?;
    Ok(CorrectionMatrix {
        n,
        label: "P(B) from position multisets (least squares)".into(),
        entries: least_squares_operator(&forward)?,
    })
}

pub fn invert_spatial_least_squares(observed: &OutcomeDistribution, kernel: &DMatrix<f64>) -> Result<OutcomeDistribution> {
    observed.expect(OutcomeKind::PositionMultiset)?;
    let n = observed.n();
    let out = spatial_least_squares_matrix(n, kernel)?.apply(observed.probs())?;
    OutcomeDistribution::unchecked(n, OutcomeKind::SignPattern, out)
}
