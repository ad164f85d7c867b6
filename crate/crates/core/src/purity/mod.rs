//! Subset purities, average purities and the entropic separability inequalities.
//!
//! A separable state satisfies `pur(A) >= pur(B)` for all `A ⊆ B` and, averaged
//! over subset sizes, `avpur_k >= avpur_k'` for `k <= k'`. Any violation
//! certifies entanglement.

mod chain;
mod spectrum;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial_f64, compensated_sum, masks_of_size};
use crate::error::{invalid, Error, Result};
use crate::qstate::{column_bit, macro_normalization, make_werner, QubitRegisterState, Repr};

/// Default cutoff above which an inequality counts as violated.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Pure registers wider than this use the Pauli-spectrum route for whole-profile
/// and whole-map queries.
const SPECTRUM_THRESHOLD: usize = 10;

/// Subsystem `B` as a mask over the `n` columns (column 1 is the top bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsetMask {
    n: usize,
    bits: u32,
}

impl SubsetMask {
    pub fn new(n: usize, bits: u32) -> Result<Self> {
        if n > 31 || (bits as u64) >= (1u64 << n) {
            return Err(invalid(format!("mask {bits:#b} does not fit in {n} columns")));
        }
        Ok(Self { n, bits })
    }

    /// Builds a mask from 1-based column numbers.
    pub fn from_columns(n: usize, columns: &[usize]) -> Result<Self> {
        let mut bits = 0;
        for &c in columns {
            if c == 0 || c > n {
                return Err(invalid(format!("column {c} outside 1..={n}")));
            }
            bits |= column_bit(n, c);
        }
        Self::new(n, bits)
    }

    pub fn empty(n: usize) -> Self {
        Self { n, bits: 0 }
    }

    pub fn full(n: usize) -> Self {
        Self { n, bits: ((1u64 << n) - 1) as u32 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, column: usize) -> bool {
        column >= 1 && column <= self.n && self.bits & column_bit(self.n, column) != 0
    }

    pub fn complement(&self) -> Self {
        Self { n: self.n, bits: !self.bits & Self::full(self.n).bits }
    }

    pub fn is_subset_of(&self, other: &SubsetMask) -> bool {
        self.bits & !other.bits == 0
    }

    /// 1-based columns in increasing order.
    pub fn columns(&self) -> Vec<usize> {
        (1..=self.n).filter(|&c| self.contains(c)).collect()
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self.columns().iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", cols.join(","))
    }
}

/// Average purities `avpur_0..=avpur_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityProfile {
    avpur: Vec<f64>,
}

impl PurityProfile {
    /// Validates `avpur_0 = 1` and `2^{−k} <= avpur_k <= 1`.
    pub fn new(avpur: Vec<f64>) -> Result<Self> {
        const TOL: f64 = 1e-9;
        if avpur.len() < 2 {
            return Err(invalid("profile needs entries for k = 0..=n with n >= 1"));
        }
        if (avpur[0] - 1.0).abs() > TOL {
            return Err(invalid(format!("avpur_0 = {} must equal 1", avpur[0])));
        }
        for (k, &v) in avpur.iter().enumerate() {
            let lo = 0.5f64.powi(k as i32);
            if !(v >= lo - TOL && v <= 1.0 + TOL) {
                return Err(invalid(format!("avpur_{k} = {v} outside [{lo}, 1]")));
            }
        }
        Ok(Self { avpur })
    }

    /// Wraps estimated values without range checks (finite-sample estimates
    /// may stray outside the physical box).
    pub fn from_estimate(avpur: Vec<f64>) -> Self {
        Self { avpur }
    }

    pub fn n(&self) -> usize {
        self.avpur.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.avpur
    }

    pub fn get(&self, k: usize) -> f64 {
        self.avpur[k]
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.avpur
    }
}

/// Purities of all `2^n` subsets, indexed by mask bits.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetPurityMap {
    n: usize,
    values: Vec<f64>,
}

impl SubsetPurityMap {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(Error::IncompleteMap { expected, got: values.len() });
        }
        if (values[0] - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("pur(∅) = {} must equal 1", values[0])));
        }
        Ok(Self { n, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, mask: SubsetMask) -> f64 {
        self.values[mask.bits() as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Averages over subsets of each size.
    pub fn profile(&self) -> PurityProfile {
        let avpur = (0..=self.n)
            .map(|k| {
                let total = compensated_sum(masks_of_size(self.n, k).map(|m| self.values[m as usize]));
                total / binomial_f64(self.n as i64, k as i64)
            })
            .collect();
        PurityProfile::from_estimate(avpur)
    }
}

/// The pair realizing the largest inequality violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// `avpur_smaller < avpur_larger` with `smaller < larger`.
    Sizes { smaller: usize, larger: usize },
    /// `pur(inner) < pur(outer)` with `inner ⊆ outer`.
    Subsets { inner: u32, outer: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityVerdict {
    pub violated: bool,
    pub witness: Option<Witness>,
    /// Largest `avpur_{k'} − avpur_k` (or `pur(B) − pur(A)`) over ordered pairs.
    pub margin: f64,
}

// ---------------------------------------------------------------------------
// reduced purities

/// Splits every basis index into its (B part, complement part).
fn split_tables(n: usize, mask: u32) -> (Vec<usize>, Vec<usize>) {
    let dim = 1usize << n;
    let mut inside = vec![0usize; dim];
    let mut outside = vec![0usize; dim];
    for x in 0..dim {
        let (mut b, mut c) = (0usize, 0usize);
        for col in 1..=n {
            let bit = column_bit(n, col) as usize;
            let v = usize::from(x & bit != 0);
            if mask as usize & bit != 0 {
                b = (b << 1) | v;
            } else {
                c = (c << 1) | v;
            }
        }
        inside[x] = b;
        outside[x] = c;
    }
    (inside, outside)
}

/// `Σ_{r,r'} w(r,r') |Σ_c M[r,c] conj(M[r',c])|²` for a row-major `rows × cols` matrix.
fn weighted_gram_purity(m: &[C64], rows: usize, cols: usize, eta2: Option<f64>) -> f64 {
    let mut acc = 0.0;
    for r1 in 0..rows {
        let row1 = &m[r1 * cols..(r1 + 1) * cols];
        for r2 in r1..rows {
            let row2 = &m[r2 * cols..(r2 + 1) * cols];
            let g: C64 = row1.iter().zip(row2).map(|(a, b)| a * b.conj()).sum();
            let mut term = g.norm_sqr();
            if let Some(e2) = eta2 {
                term *= e2.powi(((r1 ^ r2) as u32).count_ones() as i32);
            }
            acc += if r1 == r2 { term } else { 2.0 * term };
        }
    }
    acc
}

fn pure_subset_purity(n: usize, amps: &[C64], mask: u32, d: f64) -> f64 {
    let k = mask.count_ones() as usize;
    if k == 0 {
        return 1.0;
    }
    let (inside, outside) = split_tables(n, mask);
    let (rows_b, cols_b) = (1usize << k, 1usize << (n - k));
    let damped = d > 0.0;
    // Without damping the smaller side gives the same purity more cheaply.
    let use_b_side = damped || k <= n - k;
    let (rows, cols) = if use_b_side { (rows_b, cols_b) } else { (cols_b, rows_b) };
    let mut m = vec![C64::new(0.0, 0.0); 1 << n];
    for (x, a) in amps.iter().enumerate() {
        let (r, c) = if use_b_side { (inside[x], outside[x]) } else { (outside[x], inside[x]) };
        m[r * cols + c] = *a;
    }
    let eta2 = damped.then_some((1.0 - d) * (1.0 - d));
    weighted_gram_purity(&m, rows, cols, eta2)
}

fn partial_trace(n: usize, rho: &DMatrix<C64>, mask: u32) -> DMatrix<C64> {
    let rows = 1usize << mask.count_ones();
    let (inside, outside) = split_tables(n, mask);
    let dim = 1usize << n;
    let mut reduced = DMatrix::zeros(rows, rows);
    for x in 0..dim {
        for y in 0..dim {
            if outside[x] == outside[y] {
                reduced[(inside[x], inside[y])] += rho[(x, y)];
            }
        }
    }
    reduced
}

fn dense_subset_purity(n: usize, rho: &DMatrix<C64>, mask: u32) -> f64 {
    if mask == 0 {
        return 1.0;
    }
    partial_trace(n, rho, mask).iter().map(|z| z.norm_sqr()).sum()
}

/// `ρ_B`, with the columns of `B` in increasing order (first column most
/// significant). Needs a state small enough for a dense density matrix.
pub fn reduced_density_matrix(state: &QubitRegisterState, subset: SubsetMask) -> Result<DMatrix<C64>> {
    if subset.n() != state.n() {
        return Err(invalid(format!("subset over {} columns applied to {}-qubit state", subset.n(), state.n())));
    }
    Ok(partial_trace(state.n(), &state.density_matrix()?, subset.bits()))
}

/// `Tr ρ_B²`; the empty subset has purity 1.
pub fn reduced_purity(state: &QubitRegisterState, subset: SubsetMask) -> Result<f64> {
    let n = state.n();
    if subset.n() != n {
        return Err(invalid(format!("subset over {} columns applied to {n}-qubit state", subset.n())));
    }
    Ok(match state.repr() {
        Repr::Pure(a) => match state.chain_phase() {
            Some(phi) if n > 6 => chain::subset_purity(n, phi, 1.0, subset.bits()),
            _ => pure_subset_purity(n, a, subset.bits(), 0.0),
        },
        Repr::PureDephased { amplitudes, d } => match state.chain_phase() {
            Some(phi) if n > 6 => chain::subset_purity(n, phi, (1.0 - d) * (1.0 - d), subset.bits()),
            _ => pure_subset_purity(n, amplitudes, subset.bits(), *d),
        },
        Repr::Dense(rho) => dense_subset_purity(n, rho, subset.bits()),
    })
}

/// The per-subset route with no family shortcuts; kept public for cross-checks.
pub fn reduced_purity_direct(state: &QubitRegisterState, subset: SubsetMask) -> Result<f64> {
    let n = state.n();
    if subset.n() != n {
        return Err(invalid("subset width differs from register width"));
    }
    Ok(match state.repr() {
        Repr::Pure(a) => pure_subset_purity(n, a, subset.bits(), 0.0),
        Repr::PureDephased { amplitudes, d } => pure_subset_purity(n, amplitudes, subset.bits(), *d),
        Repr::Dense(rho) => dense_subset_purity(n, rho, subset.bits()),
    })
}

fn eta2_of(state: &QubitRegisterState) -> f64 {
    let d = state.dephasing().unwrap_or(0.0);
    (1.0 - d) * (1.0 - d)
}

fn spectrum_of(state: &QubitRegisterState) -> Option<spectrum::PauliSpectrum> {
    let amps = state.amplitudes()?;
    (state.n() > SPECTRUM_THRESHOLD).then(|| spectrum::PauliSpectrum::compute(state.n(), amps))
}

/// Mean of `Tr ρ_B²` over all `|B| = k`.
pub fn average_purity(state: &QubitRegisterState, k: usize) -> Result<f64> {
    let n = state.n();
    if k > n {
        return Err(invalid(format!("subset size {k} exceeds n = {n}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if k == n {
        return reduced_purity(state, SubsetMask::full(n));
    }
    if let (Some(phi), Some(_)) = (state.chain_phase(), state.amplitudes()) {
        return Ok(chain::profile(n, phi, eta2_of(state))[k]);
    }
    let masks: Vec<u32> = masks_of_size(n, k).collect();
    let values: Vec<f64> = masks
        .par_iter()
        .map(|&m| reduced_purity(state, SubsetMask { n, bits: m }))
        .collect::<Result<_>>()?;
    Ok(compensated_sum(values) / masks.len() as f64)
}

/// The whole profile `avpur_0..=avpur_n`.
pub fn purity_profile(state: &QubitRegisterState) -> Result<PurityProfile> {
    let n = state.n();
    if let (Some(phi), Some(_)) = (state.chain_phase(), state.amplitudes()) {
        return PurityProfile::new(chain::profile(n, phi, eta2_of(state)));
    }
    if let Some(spectrum) = spectrum_of(state) {
        return PurityProfile::new(spectrum.profile(eta2_of(state)));
    }
    let avpur = (0..=n).map(|k| average_purity(state, k)).collect::<Result<Vec<_>>>()?;
    PurityProfile::new(avpur)
}

/// Purities of every subset.
pub fn subset_purities(state: &QubitRegisterState) -> Result<SubsetPurityMap> {
    let n = state.n();
    if let Some(spectrum) = spectrum_of(state) {
        if state.chain_phase().is_none() {
            return SubsetPurityMap::new(n, spectrum.subset_purities(eta2_of(state)));
        }
    }
    let values = (0..1u32 << n)
        .into_par_iter()
        .map(|m| reduced_purity(state, SubsetMask { n, bits: m }))
        .collect::<Result<Vec<_>>>()?;
    SubsetPurityMap::new(n, values)
}

/// Closed-form `pur(ρ_B)` of the macroscopic superposition `|γ_n⟩`, `k = |B|`.
pub fn macro_purity_closed_form(n: usize, gamma: C64, k: usize) -> Result<f64> {
    if k > n {
        return Err(invalid(format!("subset size {k} exceeds n = {n}")));
    }
    let denom = macro_normalization(n, gamma)?;
    let g2 = gamma.norm_sqr();
    let gn = gamma.powi(n as i32);
    let g2n = gamma.powi(2 * n as i32);
    let numer = 2.0
        + 2.0 * g2.powi(k as i32)
        + 2.0 * g2.powi((n - k) as i32)
        + 8.0 * gn.re
        + 2.0 * g2n.re;
    Ok(numer / (denom * denom))
}

// ---------------------------------------------------------------------------
// inequalities

/// Inputs the separability inequalities can be checked on.
pub trait InequalityInput {
    fn verdict(&self, tolerance: f64) -> InequalityVerdict;
}

impl InequalityInput for PurityProfile {
    fn verdict(&self, tolerance: f64) -> InequalityVerdict {
        profile_verdict(self, tolerance)
    }
}

impl InequalityInput for SubsetPurityMap {
    fn verdict(&self, tolerance: f64) -> InequalityVerdict {
        map_verdict(self, tolerance)
    }
}

/// Checks a profile (`avpur_k >= avpur_k'` for `k < k'`) or a subset map
/// (`pur(A) >= pur(B)` for `A ⊂ B`). The witness is the pair with the largest gap.
pub fn check_subset_inequalities<I: InequalityInput + ?Sized>(input: &I, tolerance: f64) -> InequalityVerdict {
    input.verdict(tolerance)
}

const TIE_TOLERANCE: f64 = 1e-12;

fn profile_verdict(profile: &PurityProfile, tolerance: f64) -> InequalityVerdict {
    let v = profile.values();
    let mut best: Option<(f64, usize, usize)> = None;
    let (mut min_val, mut min_at) = (v[0], 0usize);
    for (k2, &val) in v.iter().enumerate().skip(1) {
        let gap = val - min_val;
        if best.is_none_or(|(g, _, _)| gap > g) {
            best = Some((gap, min_at, k2));
        }
        // rounding-level ties keep the smaller k as witness
        if val < min_val - TIE_TOLERANCE {
            min_val = val;
            min_at = k2;
        }
    }
    match best {
        Some((margin, smaller, larger)) => InequalityVerdict {
            violated: margin > tolerance,
            witness: Some(Witness::Sizes { smaller, larger }),
            margin,
        },
        None => InequalityVerdict { violated: false, witness: None, margin: f64::NEG_INFINITY },
    }
}

// O(n 2^n) via a running minimum over subsets.
fn map_verdict(map: &SubsetPurityMap, tolerance: f64) -> InequalityVerdict {
    let n = map.n();
    let vals = map.values();
    let dim = 1usize << n;
    // min_sub[m]: smallest purity over subsets of m (including m), with its argmin
    let mut min_sub: Vec<(f64, u32)> = (0..dim).map(|m| (vals[m], m as u32)).collect();
    for mask in 1..dim {
        let mut bits = mask;
        while bits != 0 {
            let low = bits & bits.wrapping_neg();
            bits ^= low;
            let cand = min_sub[mask ^ low];
            if cand.0 < min_sub[mask].0 {
                min_sub[mask] = cand;
            }
        }
    }
    let mut best: Option<(f64, u32, u32)> = None;
    for outer in 1..dim {
        // smallest purity over proper subsets of `outer`
        let mut low = (f64::INFINITY, 0u32);
        let mut bits = outer;
        while bits != 0 {
            let b = bits & bits.wrapping_neg();
            bits ^= b;
            let cand = min_sub[outer ^ b];
            if cand.0 < low.0 {
                low = cand;
            }
        }
        let gap = vals[outer] - low.0;
        if best.is_none_or(|(g, _, _)| gap > g) {
            best = Some((gap, low.1, outer as u32));
        }
    }
    match best {
        Some((margin, inner, outer)) => InequalityVerdict {
            violated: margin > tolerance,
            witness: Some(Witness::Subsets { inner, outer }),
            margin,
        },
        None => InequalityVerdict { violated: false, witness: None, margin: f64::NEG_INFINITY },
    }
}

/// `d* = 1 − (2^{n−1} + 1)^{−1/2}`: Werner states with `d < d*` violate the
/// averaged inequalities.
pub fn werner_detection_threshold(n: usize) -> Result<f64> {
    if !(2..=crate::MAX_DENSE_QUBITS).contains(&n) {
        return Err(invalid(format!("Werner threshold defined for 2 <= n <= 10, got {n}")));
    }
    Ok(1.0 - (2f64.powi(n as i32 - 1) + 1.0).powf(-0.5))
}

/// Locates the noise level where `violated_at` switches from true to false.
///
/// `violated_at` is evaluated on `grid + 1` evenly spaced points of `[lo, hi]`;
/// the first true→false transition is then refined by bisection to `tol`.
/// Returns the smallest noise level found to be undetected.
pub fn detection_threshold<F>(violated_at: F, lo: f64, hi: f64, grid: usize, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<bool>,
{
    if !(lo < hi) || grid == 0 {
        return Err(invalid("detection threshold needs lo < hi and a non-empty grid"));
    }
    let step = (hi - lo) / grid as f64;
    if !violated_at(lo)? {
        return Ok(lo);
    }
    let mut left = lo;
    let mut right = None;
    for i in 1..=grid {
        let x = lo + step * i as f64;
        if violated_at(x)? {
            left = x;
        } else {
            right = Some(x);
            break;
        }
    }
    let mut right = right.ok_or_else(|| invalid("no transition inside the scanned interval"))?;
    while right - left > tol {
        let mid = 0.5 * (left + right);
        if violated_at(mid)? {
            left = mid;
        } else {
            right = mid;
        }
    }
    Ok(right)
}

/// Empirical Werner threshold by bisection on the profile verdict.
pub fn werner_threshold_by_bisection(n: usize, tol: f64) -> Result<f64> {
    detection_threshold(
        |d| {
            let profile = purity_profile(&make_werner(n, d)?)?;
            Ok(check_subset_inequalities(&profile, DEFAULT_TOLERANCE).violated)
        },
        0.0,
        1.0,
        20,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{apply_dephasing, make_classical_correlated, make_ghz, make_phi_state, make_uniform_product};
    use std::f64::consts::PI;

    #[test]
    fn ghz_single_qubit_half() {
        let ghz = make_ghz(3).unwrap();
        let b = SubsetMask::from_columns(3, &[1]).unwrap();
        assert!((reduced_purity(&ghz, b).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn product_state_all_pure() {
        let s = make_uniform_product(5, 0.7, 0.3).unwrap();
        for m in 0..32 {
            let p = reduced_purity(&s, SubsetMask::new(5, m).unwrap()).unwrap();
            assert!((p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_pair_formula() {
        for &phi in &[0.3, 1.0, PI, 4.0] {
            let s = make_phi_state(6, phi).unwrap();
            let b = SubsetMask::from_columns(6, &[2, 3]).unwrap();
            let want = (1.0 + (phi / 2.0).cos().powi(2)).powi(2) / 4.0;
            assert!((reduced_purity(&s, b).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_subset_is_one() {
        let s = make_werner(3, 0.4).unwrap();
        assert_eq!(reduced_purity(&s, SubsetMask::empty(3)).unwrap(), 1.0);
        assert_eq!(average_purity(&s, 0).unwrap(), 1.0);
    }

    #[test]
    fn mask_width_mismatch_rejected() {
        let s = make_ghz(3).unwrap();
        assert!(reduced_purity(&s, SubsetMask::full(4)).is_err());
        assert!(SubsetMask::new(3, 8).is_err());
        assert!(SubsetMask::from_columns(3, &[0]).is_err());
    }

    #[test]
    fn ghz_profile_half_inside() {
        let p = purity_profile(&make_ghz(10).unwrap()).unwrap();
        assert!((p.get(5) - 0.5).abs() < 1e-12);
        assert!((p.get(10) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn macro_closed_form_special_points() {
        let z = C64::new(0.0, 0.0);
        assert!((macro_purity_closed_form(4, z, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((macro_purity_closed_form(4, z, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((macro_purity_closed_form(4, z, 4).unwrap() - 1.0).abs() < 1e-15);
        assert!(macro_purity_closed_form(3, C64::new(-1.0, 0.0), 1).is_err());
    }

    #[test]
    fn ghz_profile_verdict_and_witness() {
        let mut v = vec![1.0];
        v.extend(std::iter::repeat_n(0.5, 9));
        v.push(1.0);
        let verdict = check_subset_inequalities(&PurityProfile::new(v).unwrap(), DEFAULT_TOLERANCE);
        assert!(verdict.violated);
        assert_eq!(verdict.witness, Some(Witness::Sizes { smaller: 1, larger: 10 }));
        assert!((verdict.margin - 0.5).abs() < 1e-15);
    }

    #[test]
    fn classical_profile_not_violated() {
        let p = purity_profile(&make_classical_correlated(6).unwrap()).unwrap();
        assert!(!check_subset_inequalities(&p, DEFAULT_TOLERANCE).violated);
        let map = subset_purities(&make_classical_correlated(4).unwrap()).unwrap();
        assert!(!check_subset_inequalities(&map, DEFAULT_TOLERANCE).violated);
    }

    #[test]
    fn subset_witness_is_nested() {
        let map = subset_purities(&make_phi_state(4, PI).unwrap()).unwrap();
        let verdict = check_subset_inequalities(&map, DEFAULT_TOLERANCE);
        assert!(verdict.violated);
        match verdict.witness.unwrap() {
            Witness::Subsets { inner, outer } => {
                assert_eq!(inner & !outer, 0);
                assert_ne!(inner, outer);
                assert!((map.values()[outer as usize] - map.values()[inner as usize] - verdict.margin).abs() < 1e-15);
            }
            w => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn werner_threshold_formula() {
        assert!((werner_detection_threshold(2).unwrap() - (1.0 - 1.0 / 3f64.sqrt())).abs() < 1e-15);
        assert!((werner_detection_threshold(3).unwrap() - (1.0 - 1.0 / 5f64.sqrt())).abs() < 1e-15);
        assert!(werner_detection_threshold(10).unwrap() > 0.95);
        assert!(werner_detection_threshold(1).is_err());
        assert!(werner_detection_threshold(11).is_err());
    }

    #[test]
    fn dephased_ghz_full_purity() {
        for &d in &[0.1, 0.5, 0.9] {
            let s = apply_dephasing(&make_ghz(4).unwrap(), d).unwrap();
            let full = reduced_purity(&s, SubsetMask::full(4)).unwrap();
            assert!((full - (1.0 + (1.0 - d).powi(8)) / 2.0).abs() < 1e-14);
            let one = reduced_purity(&s, SubsetMask::from_columns(4, &[2]).unwrap()).unwrap();
            assert!((one - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn chain_matches_direct_route() {
        for &(phi, d) in &[(0.7, 0.0), (PI, 0.2), (2.5, 0.6)] {
            let s = apply_dephasing(&make_phi_state(7, phi).unwrap(), d).unwrap();
            for m in [0b1u32, 0b1010101, 0b0111100, 0b1111111, 0b1100011] {
                let b = SubsetMask::new(7, m).unwrap();
                let fast = reduced_purity(&s, b).unwrap();
                let slow = reduced_purity_direct(&s, b).unwrap();
                assert!((fast - slow).abs() < 1e-12, "mask {m:b}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn spectrum_matches_direct_route() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let s = crate::qstate::random_pure(6, &mut rng).unwrap();
        for &d in &[0.0, 0.35] {
            let st = apply_dephasing(&s, d).unwrap();
            let pauli = spectrum::PauliSpectrum::compute(6, st.amplitudes().unwrap());
            let eta2 = (1.0 - d) * (1.0 - d);
            let map = pauli.subset_purities(eta2);
            for m in 0..64u32 {
                let direct = reduced_purity_direct(&st, SubsetMask::new(6, m).unwrap()).unwrap();
                assert!((map[m as usize] - direct).abs() < 1e-12);
            }
            let prof = pauli.profile(eta2);
            for (k, want) in prof.iter().enumerate() {
                let got = average_purity(&st, k).unwrap();
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn detection_threshold_on_step() {
        let t = detection_threshold(|x| Ok(x < 0.3125), 0.0, 1.0, 10, 1e-9).unwrap();
        assert!((t - 0.3125).abs() < 2e-9);
        assert!(detection_threshold(|_| Ok(true), 0.0, 1.0, 10, 1e-9).is_err());
        assert_eq!(detection_threshold(|_| Ok(false), 0.0, 1.0, 10, 1e-9).unwrap(), 0.0);
    }
}
