//! Multi-qubit register states and the noise channels applied to them.
//!
//! Basis index `x` runs over `0..2^n` with qubit 1 as the most significant bit,
//! so column `j` (1-based) of the register is bit `n - j` of `x`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::{MAX_DENSE_QUBITS, MAX_QUBITS};

pub type C64 = Complex64;

const NORM_TOL: f64 = 1e-12;

/// Bit mask of qubit `col` (1-based, left to right) in an `n`-qubit index.
#[inline]
pub fn column_bit(n: usize, col: usize) -> u32 {
    1u32 << (n - col)
}

/// Number of occurrences of the substring `01` in the `n`-bit expansion of `x`.
#[inline]
pub fn count_01(x: u32, n: usize) -> u32 {
    if n < 2 {
        return 0;
    }
    let mask = (1u32 << (n - 1)) - 1;
    ((!x >> 1) & x & mask).count_ones()
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Repr {
    Pure(Vec<C64>),
    PureDephased { amplitudes: Vec<C64>, d: f64 },
    Dense(DMatrix<C64>),
}

/// Which representation a state is held in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Pure,
    PureDephased,
    DenseMixed,
}

/// A state of `n` qubits: a pure vector, a pure vector with a symbolic i.i.d.
/// dephasing parameter, or a dense density matrix (`n <= 10`).
#[derive(Debug, Clone, PartialEq)]
pub struct QubitRegisterState {
    n: usize,
    repr: Repr,
    /// Set by [`make_phi_state`]; lets the purity engine use the
    /// nearest-neighbour chain contraction instead of dense algebra.
    chain_phase: Option<f64>,
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("register needs at least one qubit"));
    }
    if n > MAX_QUBITS {
        return Err(Error::TooLarge { what: "qubit register", n, max: MAX_QUBITS });
    }
    Ok(())
}

fn check_d(d: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&d) || d.is_nan() {
        return Err(invalid(format!("decoherence parameter d = {d} outside [0, 1]")));
    }
    Ok(())
}

fn register_width(len: usize) -> Result<usize> {
    if !len.is_power_of_two() || len < 2 {
        return Err(invalid(format!("{len} amplitudes is not 2^n for n >= 1")));
    }
    Ok(len.trailing_zeros() as usize)
}

impl QubitRegisterState {
    /// Wraps a normalized amplitude vector of length `2^n`.
    pub fn pure(amplitudes: Vec<C64>) -> Result<Self> {
        let n = register_width(amplitudes.len())?;
        check_n(n)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(invalid(format!("amplitudes have squared norm {norm}, expected 1")));
        }
        Ok(Self { n, repr: Repr::Pure(amplitudes), chain_phase: None })
    }

    /// Like [`QubitRegisterState::pure`] but rescales the vector first.
    pub fn pure_normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero or non-finite vector"));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::pure(amplitudes)
    }

    /// Wraps a density matrix; it must be Hermitian with unit trace.
    pub fn dense(rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != rho.ncols() {
            return Err(invalid("density matrix must be square"));
        }
        let n = register_width(rho.nrows())?;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::TooLarge { what: "dense mixed state", n, max: MAX_DENSE_QUBITS });
        }
        let tr: C64 = rho.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(invalid(format!("trace {tr} differs from 1")));
        }
        let dim = rho.nrows();
        for i in 0..dim {
            for j in i..dim {
                if (rho[(i, j)] - rho[(j, i)].conj()).norm() > NORM_TOL {
                    return Err(invalid(format!("matrix not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, repr: Repr::Dense(rho), chain_phase: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn kind(&self) -> StateKind {
        match self.repr {
            Repr::Pure(_) => StateKind::Pure,
            Repr::PureDephased { .. } => StateKind::PureDephased,
            Repr::Dense(_) => StateKind::DenseMixed,
        }
    }

    /// Amplitudes of the underlying pure vector (before symbolic dephasing).
    pub fn amplitudes(&self) -> Option<&[C64]> {
        match &self.repr {
            Repr::Pure(a) | Repr::PureDephased { amplitudes: a, .. } => Some(a),
            Repr::Dense(_) => None,
        }
    }

    /// Symbolic dephasing parameter; zero for undamped pure vectors.
    pub fn dephasing(&self) -> Option<f64> {
        match &self.repr {
            Repr::Pure(_) => Some(0.0),
            Repr::PureDephased { d, .. } => Some(*d),
            Repr::Dense(_) => None,
        }
    }

    pub(crate) fn repr(&self) -> &Repr {
        &self.repr
    }

    pub(crate) fn chain_phase(&self) -> Option<f64> {
        self.chain_phase
    }

    /// Materializes the density matrix, applying symbolic dephasing damping.
    pub fn density_matrix(&self) -> Result<DMatrix<C64>> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(Error::TooLarge { what: "dense mixed state", n: self.n, max: MAX_DENSE_QUBITS });
        }
        match &self.repr {
            Repr::Dense(rho) => Ok(rho.clone()),
            Repr::Pure(a) => Ok(DMatrix::from_fn(a.len(), a.len(), |x, y| a[x] * a[y].conj())),
            Repr::PureDephased { amplitudes: a, d } => {
                let eta = 1.0 - d;
                Ok(DMatrix::from_fn(a.len(), a.len(), |x, y| {
                    a[x] * a[y].conj() * eta.powi(((x ^ y) as u32).count_ones() as i32)
                }))
            }
        }
    }

    /// Converts to the dense representation.
    pub fn to_dense(&self) -> Result<Self> {
        Ok(Self { n: self.n, repr: Repr::Dense(self.density_matrix()?), chain_phase: None })
    }

    /// Tr ρ.
    pub fn trace(&self) -> f64 {
        match &self.repr {
            Repr::Pure(a) | Repr::PureDephased { amplitudes: a, .. } => {
                a.iter().map(|x| x.norm_sqr()).sum()
            }
            Repr::Dense(rho) => rho.trace().re,
        }
    }
}

/// `(|0⟩^n + (γ|0⟩ + √(1−|γ|²)|1⟩)^n) / √(2 + γ^n + conj(γ)^n)`.
pub fn make_macro_superposition(n: usize, gamma: C64) -> Result<QubitRegisterState> {
    check_n(n)?;
    let norm_sq = macro_normalization(n, gamma)?;
    let s = (1.0 - gamma.norm_sqr()).max(0.0).sqrt();
    let scale = 1.0 / norm_sq.sqrt();
    let amps = (0..1u32 << n)
        .map(|x| {
            let w = x.count_ones() as i32;
            let mut a = gamma.powi(n as i32 - w) * s.powi(w);
            if x == 0 {
                a += 1.0;
            }
            a * scale
        })
        .collect();
    QubitRegisterState::pure(amps)
}

/// `2 + γ^n + conj(γ)^n`, rejecting `|γ| > 1` and the vanishing case.
pub(crate) fn macro_normalization(n: usize, gamma: C64) -> Result<f64> {
    if gamma.norm() > 1.0 + 1e-15 || !gamma.is_finite() {
        return Err(invalid(format!("|γ| = {} exceeds 1", gamma.norm())));
    }
    let g_n = gamma.powi(n as i32);
    let value = 2.0 + 2.0 * g_n.re;
    if value.abs() < 1e-12 {
        return Err(Error::DegenerateNormalization);
    }
    Ok(value)
}

/// The GHZ state `(|0…0⟩ + |1…1⟩)/√2`.
pub fn make_ghz(n: usize) -> Result<QubitRegisterState> {
    make_macro_superposition(n, C64::new(0.0, 0.0))
}

/// Cluster-like state with amplitude `e^{iφ c(x)} / √(2^n)`.
///
/// At `φ = π` this is a linear cluster state up to local unitaries.
pub fn make_phi_state(n: usize, phi: f64) -> Result<QubitRegisterState> {
    check_n(n)?;
    let scale = (0.5f64).powf(n as f64 / 2.0);
    let amps = (0..1u32 << n)
        .map(|x| C64::from_polar(scale, phi * count_01(x, n) as f64))
        .collect();
    let mut state = QubitRegisterState::pure(amps)?;
    state.chain_phase = Some(phi);
    Ok(state)
}

/// I.i.d. single-qubit dephasing with decoherence parameter `d`.
///
/// Pure inputs stay symbolic (the parameter is recorded and off-diagonal
/// elements `(x, y)` are damped by `(1−d)^{h(x,y)}` on demand). Dense inputs get
/// the channel `ρ → (1−d/2)ρ + (d/2) Z_j ρ Z_j` applied qubit by qubit, which is
/// the factorized form of the sum over phase-flip subsets.
pub fn apply_dephasing(state: &QubitRegisterState, d: f64) -> Result<QubitRegisterState> {
    check_d(d)?;
    if d == 0.0 {
        return Ok(state.clone());
    }
    let repr = match &state.repr {
        Repr::Pure(a) => Repr::PureDephased { amplitudes: a.clone(), d },
        Repr::PureDephased { amplitudes, d: d0 } => Repr::PureDephased {
            amplitudes: amplitudes.clone(),
            d: 1.0 - (1.0 - d0) * (1.0 - d),
        },
        Repr::Dense(rho) => {
            let mut out = rho.clone();
            for col in 1..=state.n {
                dephase_qubit_dense(&mut out, column_bit(state.n, col) as usize, d);
            }
            Repr::Dense(out)
        }
    };
    Ok(QubitRegisterState { n: state.n, repr, chain_phase: state.chain_phase })
}

/// Dephasing on the listed columns only; the result is dense.
pub fn apply_dephasing_to(state: &QubitRegisterState, columns: &[usize], d: f64) -> Result<QubitRegisterState> {
    check_d(d)?;
    let mut rho = state.density_matrix()?;
    for &col in columns {
        if col == 0 || col > state.n {
            return Err(Error::InvalidParameter(format!("column {col} outside 1..={}", state.n)));
        }
        dephase_qubit_dense(&mut rho, column_bit(state.n, col) as usize, d);
    }
    QubitRegisterState::dense(rho)
}

/// `ρ → (1−d/2) ρ + (d/2) Z ρ Z` on the qubit selected by `bit`.
fn dephase_qubit_dense(rho: &mut DMatrix<C64>, bit: usize, d: f64) {
    let dim = rho.nrows();
    for y in 0..dim {
        for x in 0..dim {
            let sign = if (x & bit != 0) != (y & bit != 0) { -1.0 } else { 1.0 };
            rho[(x, y)] *= (1.0 - d / 2.0) + (d / 2.0) * sign;
        }
    }
}

/// Werner state `(1−d)|GHZ⟩⟨GHZ| + d 2^{−n} I`.
pub fn make_werner(n: usize, d: f64) -> Result<QubitRegisterState> {
    check_n(n)?;
    check_d(d)?;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge { what: "dense mixed state", n, max: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << n;
    let last = dim - 1;
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    for x in 0..dim {
        rho[(x, x)] = C64::new(d / dim as f64, 0.0);
    }
    for &(x, y) in &[(0, 0), (0, last), (last, 0), (last, last)] {
        rho[(x, y)] += C64::new((1.0 - d) / 2.0, 0.0);
    }
    QubitRegisterState::dense(rho)
}

/// Classically correlated state `(|0…0⟩⟨0…0| + |1…1⟩⟨1…1|)/2`.
pub fn make_classical_correlated(n: usize) -> Result<QubitRegisterState> {
    check_n(n)?;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge { what: "dense mixed state", n, max: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << n;
    let mut rho = DMatrix::<C64>::zeros(dim, dim);
    rho[(0, 0)] = C64::new(0.5, 0.0);
    rho[(dim - 1, dim - 1)] += C64::new(0.5, 0.0);
    QubitRegisterState::dense(rho)
}

/// Product state with every qubit in `cos(θ/2)|0⟩ + e^{iϕ} sin(θ/2)|1⟩`.
pub fn make_uniform_product(n: usize, theta: f64, azimuth: f64) -> Result<QubitRegisterState> {
    check_n(n)?;
    let zero = C64::new((theta / 2.0).cos(), 0.0);
    let one = C64::from_polar((theta / 2.0).sin(), azimuth);
    let amps = (0..1u32 << n)
        .map(|x| {
            let w = x.count_ones() as i32;
            zero.powi(n as i32 - w) * one.powi(w)
        })
        .collect();
    QubitRegisterState::pure_normalized(amps)
}

/// Haar-like random pure state from normalized complex Gaussian amplitudes.
pub fn random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<QubitRegisterState> {
    check_n(n)?;
    let amps = (0..1usize << n).map(|_| gaussian_c64(rng)).collect();
    QubitRegisterState::pure_normalized(amps)
}

/// Random mixed state `G G† / Tr(G G†)` from a `2^n × rank` Ginibre matrix.
pub fn random_mixed<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<QubitRegisterState> {
    check_n(n)?;
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge { what: "dense mixed state", n, max: MAX_DENSE_QUBITS });
    }
    let dim = 1usize << n;
    let g = DMatrix::from_fn(dim, rank.max(1), |_, _| gaussian_c64(rng));
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    // exact Hermitian symmetry after rounding
    let herm = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    QubitRegisterState::dense(herm)
}

fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    // Box–Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    C64::from_polar(r, 2.0 * std::f64::consts::PI * u2)
}

/// JSON fixture form: `{n, kind, amplitudes: [[re, im], ...], d?}`.
///
/// Dense states store the row-major matrix in `amplitudes`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateDocument {
    pub n: usize,
    pub kind: StateKind,
    pub amplitudes: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

impl From<&QubitRegisterState> for StateDocument {
    fn from(state: &QubitRegisterState) -> Self {
        let pack = |a: &[C64]| a.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>();
        match &state.repr {
            Repr::Pure(a) => StateDocument { n: state.n, kind: StateKind::Pure, amplitudes: pack(a), d: None },
            Repr::PureDephased { amplitudes, d } => StateDocument {
                n: state.n,
                kind: StateKind::PureDephased,
                amplitudes: pack(amplitudes),
                d: Some(*d),
            },
            Repr::Dense(rho) => {
                let dim = rho.nrows();
                let flat: Vec<C64> = (0..dim * dim).map(|i| rho[(i / dim, i % dim)]).collect();
                StateDocument { n: state.n, kind: StateKind::DenseMixed, amplitudes: pack(&flat), d: None }
            }
        }
    }
}

impl TryFrom<StateDocument> for QubitRegisterState {
    type Error = Error;

    fn try_from(doc: StateDocument) -> Result<Self> {
        let values: Vec<C64> = doc.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        let state = match doc.kind {
            StateKind::Pure => QubitRegisterState::pure(values)?,
            StateKind::PureDephased => {
                let d = doc.d.ok_or_else(|| invalid("pure_dephased state needs `d`"))?;
                apply_dephasing(&QubitRegisterState::pure(values)?, d)?
            }
            StateKind::DenseMixed => {
                let dim = 1usize << doc.n.min(MAX_DENSE_QUBITS + 1);
                if values.len() != dim * dim {
                    return Err(Error::LengthMismatch { expected: dim * dim, got: values.len() });
                }
                QubitRegisterState::dense(DMatrix::from_fn(dim, dim, |r, c| values[r * dim + c]))?
            }
        };
        if state.n != doc.n {
            return Err(invalid(format!("document says n = {} but data has n = {}", doc.n, state.n)));
        }
        Ok(state)
    }
}

impl QubitRegisterState {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&StateDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<StateDocument>(text)?.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn macro_gamma_zero_is_ghz() {
        let s = make_macro_superposition(3, c(0.0)).unwrap();
        let a = s.amplitudes().unwrap();
        assert!((a[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((a[7].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(a[1..7].iter().all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn macro_gamma_one_is_all_zero() {
        let s = make_macro_superposition(4, c(1.0)).unwrap();
        let a = s.amplitudes().unwrap();
        assert!((a[0].re - 1.0).abs() < 1e-15);
        assert!(a[1..].iter().all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn macro_normalized_for_generic_gamma() {
        let s = make_macro_superposition(5, c(0.5)).unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-12);
        let s = make_macro_superposition(6, C64::new(0.3, 0.6)).unwrap();
        assert!((s.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn macro_rejects_bad_gamma() {
        assert!(matches!(make_macro_superposition(3, c(1.2)), Err(Error::InvalidParameter(_))));
        assert!(matches!(make_macro_superposition(3, c(-1.0)), Err(Error::DegenerateNormalization)));
        // γ = i, n = 2: γ² = −1
        assert!(matches!(make_macro_superposition(2, C64::new(0.0, 1.0)), Err(Error::DegenerateNormalization)));
    }

    #[test]
    fn count_01_examples() {
        assert_eq!(count_01(0b01101, 5), 2);
        assert_eq!(count_01(0b01, 2), 1);
        assert_eq!(count_01(0b10, 2), 0);
        assert_eq!(count_01(0b11, 2), 0);
        assert_eq!(count_01(0b0101_0101, 8), 4);
        assert_eq!(count_01(1, 1), 0);
    }

    #[test]
    fn phi_state_examples() {
        let s = make_phi_state(3, 0.0).unwrap();
        let expect = (0.5f64).powf(1.5);
        assert!(s.amplitudes().unwrap().iter().all(|a| (a - c(expect)).norm() < 1e-15));

        let s = make_phi_state(2, PI).unwrap();
        let a = s.amplitudes().unwrap();
        let want = [0.5, -0.5, 0.5, 0.5];
        for (x, w) in a.iter().zip(want) {
            assert!((x - c(w)).norm() < 1e-15);
        }
    }

    #[test]
    fn register_bounds() {
        assert!(make_phi_state(0, 0.0).is_err());
        assert!(matches!(make_phi_state(16, 0.0), Err(Error::TooLarge { .. })));
        assert!(matches!(make_werner(11, 0.1), Err(Error::TooLarge { .. })));
        assert!(matches!(make_classical_correlated(11), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn dephasing_zero_is_identity() {
        let s = make_phi_state(4, 1.0).unwrap();
        assert_eq!(apply_dephasing(&s, 0.0).unwrap(), s);
        let w = make_werner(3, 0.2).unwrap();
        assert_eq!(apply_dephasing(&w, 0.0).unwrap(), w);
    }

    #[test]
    fn dephasing_rejects_out_of_range() {
        let s = make_ghz(2).unwrap();
        assert!(apply_dephasing(&s, -0.1).is_err());
        assert!(apply_dephasing(&s, 1.5).is_err());
    }

    #[test]
    fn full_dephasing_of_dense_ghz_is_diagonal() {
        let ghz = make_ghz(2).unwrap().to_dense().unwrap();
        let out = apply_dephasing(&ghz, 1.0).unwrap();
        let rho = out.density_matrix().unwrap();
        for x in 0..4 {
            for y in 0..4 {
                let want = if x == y && (x == 0 || x == 3) { 0.5 } else { 0.0 };
                assert!((rho[(x, y)] - c(want)).norm() < 1e-15, "({x},{y})");
            }
        }
    }

    #[test]
    fn dephasing_composes() {
        let s = make_ghz(3).unwrap();
        let twice = apply_dephasing(&apply_dephasing(&s, 0.2).unwrap(), 0.3).unwrap();
        assert!((twice.dephasing().unwrap() - (1.0 - 0.8 * 0.7)).abs() < 1e-15);
    }

    #[test]
    fn werner_extremes() {
        let w = make_werner(2, 1.0).unwrap();
        let rho = w.density_matrix().unwrap();
        assert!((rho.clone() - DMatrix::identity(4, 4) * c(0.25)).norm() < 1e-15);
        let w = make_werner(2, 0.0).unwrap().density_matrix().unwrap();
        let g = make_ghz(2).unwrap().density_matrix().unwrap();
        assert!((w - g).norm() < 1e-15);
        let w = make_werner(2, 0.5).unwrap();
        assert!((w.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classical_single_qubit_is_maximally_mixed() {
        let s = make_classical_correlated(1).unwrap().density_matrix().unwrap();
        assert!((s - DMatrix::identity(2, 2) * c(0.5)).norm() < 1e-15);
    }

    #[test]
    fn pure_constructor_validates() {
        assert!(QubitRegisterState::pure(vec![c(1.0), c(1.0)]).is_err());
        assert!(QubitRegisterState::pure(vec![c(1.0), c(0.0), c(0.0)]).is_err());
        assert!(QubitRegisterState::pure_normalized(vec![c(1.0), c(1.0)]).is_ok());
    }

    #[test]
    fn dense_constructor_validates() {
        let mut m = DMatrix::<C64>::identity(2, 2) * c(0.5);
        m[(0, 1)] = C64::new(0.1, 0.1);
        assert!(QubitRegisterState::dense(m.clone()).is_err());
        m[(1, 0)] = C64::new(0.1, -0.1);
        assert!(QubitRegisterState::dense(m).is_ok());
        assert!(QubitRegisterState::dense(DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = apply_dephasing(&make_macro_superposition(3, C64::new(0.2, 0.4)).unwrap(), 0.3).unwrap();
        let back = QubitRegisterState::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back.kind(), StateKind::PureDephased);
        assert_eq!(back.amplitudes(), s.amplitudes());
        let w = make_werner(2, 0.25).unwrap();
        let back = QubitRegisterState::from_json(&w.to_json().unwrap()).unwrap();
        assert_eq!(back, w);
    }
}
