//! Two-site Bose–Hubbard beam splitter and the loss-stage error budget.
//!
//! One column of the lattice holds two atoms spread over four modes
//! `a_I, b_I, a_II, b_II` (internal state `a`/`b`, row `I`/`II`). Hopping
//! between the rows acts as a beam splitter; the on-site interaction `U`
//! spoils it and leaves a probability `q_bs` that a symmetric pair fails to
//! bunch.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Mode order used throughout: `a_I, b_I, a_II, b_II`.
pub const MODES: [&str; 4] = ["a_I", "b_I", "a_II", "b_II"];
const ROW_I: [usize; 2] = [0, 1];

/// Hopping, interaction and loss constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Hopping energy (ħ = 1).
    pub j: f64,
    /// Hopping fluctuation, same units as `j`.
    pub delta_j: f64,
    /// On-site interaction, same units as `j`.
    pub u: f64,
    /// Two-atom loss time constant (ms).
    pub tau_d: f64,
    /// Single-atom loss time constant (ms).
    pub tau_s: f64,
}

impl PhysicalParams {
    pub fn new(j: f64, delta_j: f64, u: f64, tau_d: f64, tau_s: f64) -> Result<Self> {
        let p = Self { j, delta_j, u, tau_d, tau_s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j > 0.0) {
            return Err(invalid(format!("J = {} must be positive", self.j)));
        }
        if !(self.delta_j >= 0.0) || !(self.u >= 0.0) {
            return Err(invalid("δJ and U must be nonnegative"));
        }
        if !(self.tau_d > 0.0 && self.tau_s > 3.0 * self.tau_d) {
            return Err(invalid(format!("need τ_s > 3τ_d > 0, got τ_d = {}, τ_s = {}", self.tau_d, self.tau_s)));
        }
        Ok(())
    }

    /// Everything the error model needs from the hardware, in one record.
    pub fn summary(&self) -> Result<PhysicsSummary> {
        self.validate()?;
        let t_bs = optimal_bs_time(self.j, self.u)?;
        let loss = loss_stage(self.tau_d, self.tau_s)?;
        let q_bs = qbs_approx(self.j, self.delta_j, self.u)?;
        Ok(PhysicsSummary {
            t_bs,
            q_bs,
            q_bs_exact: qbs_exact(self.j, self.u, t_bs)?,
            t_l: loss.t_l,
            q_l: loss.q_l,
            p_l: loss.p_l,
            q: q_bs + loss.q_l,
        })
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { j: 1.0, delta_j: 0.0, u: 0.0, tau_d: 1.3, tau_s: 500.0 }
    }
}

/// Beam-splitter and loss-stage figures for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicsSummary {
    /// Optimal beam-splitter time `π/√(16J² + U²)`.
    pub t_bs: f64,
    /// Perturbative bunching failure including hopping noise.
    pub q_bs: f64,
    /// Exact bunching failure at `t_bs` without hopping noise.
    pub q_bs_exact: f64,
    pub t_l: f64,
    pub q_l: f64,
    pub p_l: f64,
    /// Total pair error `q_bs + q_l`.
    pub q: f64,
}

// ---------------------------------------------------------------------------
// two-atom Fock space

/// Occupation vectors of two bosons in four modes, in a fixed order.
fn fock_basis() -> &'static [[u8; 4]; 10] {
    const BASIS: [[u8; 4]; 10] = [
        [2, 0, 0, 0],
        [1, 1, 0, 0],
        [1, 0, 1, 0],
        [1, 0, 0, 1],
        [0, 2, 0, 0],
        [0, 1, 1, 0],
        [0, 1, 0, 1],
        [0, 0, 2, 0],
        [0, 0, 1, 1],
        [0, 0, 0, 2],
    ];
    &BASIS
}

fn basis_index(occ: [u8; 4]) -> usize {
    fock_basis().iter().position(|b| *b == occ).expect("two-atom occupation")
}

/// Modes occupied by the basis state, listed with multiplicity.
fn occupied_modes(occ: [u8; 4]) -> (usize, usize) {
    let mut modes = occ.iter().enumerate().flat_map(|(m, &c)| std::iter::repeat_n(m, c as usize));
    (modes.next().unwrap(), modes.next().unwrap())
}

/// A normalized two-atom state over the modes `a_I, b_I, a_II, b_II`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    amps: [C64; 10],
}

impl FockState {
    /// Builds a state from `(occupations, amplitude)` terms, then normalizes.
    pub fn from_occupations(terms: &[([u32; 4], C64)]) -> Result<Self> {
        let mut amps = [C64::new(0.0, 0.0); 10];
        for (occ, a) in terms {
            let total: u32 = occ.iter().sum();
            if total != 2 {
                return Err(Error::WrongParticleNumber(total));
            }
            amps[basis_index(occ.map(|c| c as u8))] += a;
        }
        Self::normalized(amps)
    }

    /// `Σ_{mn} S_mn α_m† α_n† |vac⟩` for a coefficient matrix `S`, normalized.
    pub fn from_pair_operator(s: &Matrix4<C64>) -> Result<Self> {
        Self::normalized(Self::amplitudes_of(s))
    }

    fn amplitudes_of(s: &Matrix4<C64>) -> [C64; 10] {
        let sym = (s + s.transpose()) * C64::new(0.5, 0.0);
        let mut amps = [C64::new(0.0, 0.0); 10];
        for (i, occ) in fock_basis().iter().enumerate() {
            let (m, n) = occupied_modes(*occ);
            amps[i] = if m == n { sym[(m, m)] * 2f64.sqrt() } else { sym[(m, n)] * 2.0 };
        }
        amps
    }

    /// `(c1 · α†)(c2 · α†)|vac⟩`, normalized.
    pub fn product(c1: [C64; 4], c2: [C64; 4]) -> Result<Self> {
        Self::from_pair_operator(&Matrix4::from_fn(|m, n| c1[m] * c2[n]))
    }

    fn normalized(mut amps: [C64; 10]) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-14 {
            return Err(invalid("two-atom state has zero norm"));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &[C64; 10] {
        &self.amps
    }

    /// Occupation vector of basis index `i`.
    pub fn basis_state(i: usize) -> [u8; 4] {
        fock_basis()[i]
    }

    /// Symmetric coefficient matrix `S` with `|ψ⟩ = Σ S_mn α_m† α_n† |vac⟩`.
    fn pair_operator(&self) -> Matrix4<C64> {
        let mut s = Matrix4::zeros();
        for (i, occ) in fock_basis().iter().enumerate() {
            let (m, n) = occupied_modes(*occ);
            if m == n {
                s[(m, m)] = self.amps[i] / 2f64.sqrt();
            } else {
                s[(m, n)] = self.amps[i] / 2.0;
                s[(n, m)] = self.amps[i] / 2.0;
            }
        }
        s
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨N⟩`, the expected atom number.
    pub fn atom_number(&self) -> f64 {
        fock_basis()
            .iter()
            .zip(&self.amps)
            .map(|(occ, a)| a.norm_sqr() * occ.iter().map(|&c| c as f64).sum::<f64>())
            .sum()
    }

    /// Probability of one atom in each row (the antisymmetric signature).
    pub fn singles_probability(&self) -> f64 {
        fock_basis()
            .iter()
            .zip(&self.amps)
            .filter(|(occ, _)| ROW_I.iter().map(|&m| occ[m]).sum::<u8>() == 1)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Probability of both atoms in one row.
    pub fn doubles_probability(&self) -> f64 {
        self.norm_sqr() - self.singles_probability()
    }

    pub fn overlap(&self, other: &FockState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

/// The three symmetric pair states of one column (one atom per row).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetricPair {
    /// `a_I† a_II† |vac⟩`
    Aa,
    /// `b_I† b_II† |vac⟩`
    Bb,
    /// `(a_I† b_II† + b_I† a_II†)|vac⟩/√2`
    Ab,
}

impl SymmetricPair {
    pub const ALL: [SymmetricPair; 3] = [SymmetricPair::Aa, SymmetricPair::Bb, SymmetricPair::Ab];

    pub fn state(self) -> FockState {
        let one = C64::new(1.0, 0.0);
        let terms: Vec<([u32; 4], C64)> = match self {
            SymmetricPair::Aa => vec![([1, 0, 1, 0], one)],
            SymmetricPair::Bb => vec![([0, 1, 0, 1], one)],
            SymmetricPair::Ab => vec![([1, 0, 0, 1], one), ([0, 1, 1, 0], one)],
        };
        FockState::from_occupations(&terms).expect("fixed two-atom state")
    }
}

/// `(c_I† d_II† − c_II† d_I†)|vac⟩/√2` with `c = a`, `d = b`.
pub fn antisymmetric_pair() -> FockState {
    let one = C64::new(1.0, 0.0);
    FockState::from_occupations(&[([1, 0, 0, 1], one), ([0, 1, 1, 0], -one)]).expect("fixed two-atom state")
}

/// Single-atom mode map of the ideal splitter after time `t`:
/// `α_I† → cos(Jt) α_I† − i sin(Jt) α_II†` and the mirror image.
fn bs_mode_matrix(j: f64, t: f64) -> Matrix4<C64> {
    let c = C64::new((j * t).cos(), 0.0);
    let s = C64::new(0.0, -(j * t).sin());
    let mut u = Matrix4::zeros();
    for internal in 0..2 {
        let (one, two) = (internal, internal + 2);
        u[(one, one)] = c;
        u[(two, one)] = s;
        u[(two, two)] = c;
        u[(one, two)] = s;
    }
    u
}

/// Noninteracting evolution for time `t` (`t = π/(4J)` is the 50:50 splitter).
pub fn ideal_bs_map(state: &FockState, j: f64, t: f64) -> Result<FockState> {
    if !(j > 0.0) {
        return Err(invalid("J must be positive"));
    }
    let u = bs_mode_matrix(j, t);
    Ok(FockState { amps: FockState::amplitudes_of(&(u * state.pair_operator() * u.transpose())) })
}

/// `H_BS + H_U` on the ten two-atom basis states (real symmetric).
pub fn hamiltonian(j: f64, u: f64) -> DMatrix<f64> {
    let basis = fock_basis();
    let mut h = DMatrix::zeros(10, 10);
    for (col, occ) in basis.iter().enumerate() {
        // on-site: U/2 N_l (N_l − 1) per row
        for row in [[0usize, 1], [2, 3]] {
            let nl = (occ[row[0]] + occ[row[1]]) as f64;
            h[(col, col)] += 0.5 * u * nl * (nl - 1.0);
        }
        // hopping −J(α_I† α_II + h.c.)
        for internal in 0..2 {
            for (to, from) in [(internal, internal + 2), (internal + 2, internal)] {
                if occ[from] == 0 {
                    continue;
                }
                let mut next = *occ;
                let amp = (next[from] as f64).sqrt();
                next[from] -= 1;
                let amp = amp * ((next[to] + 1) as f64).sqrt();
                next[to] += 1;
                h[(basis_index(next), col)] += -j * amp;
            }
        }
    }
    h
}

/// Exact propagation `e^{i(H_BS + H_U)t}|ψ⟩` by diagonalizing the 10 × 10 Hamiltonian.
pub fn evolve(state: &FockState, j: f64, u: f64, t: f64) -> Result<FockState> {
    let eig = SymmetricEigen::new(hamiltonian(j, u));
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let psi = DVector::from_column_slice(state.amplitudes());
    let coeffs = v.adjoint() * psi;
    let phased = DVector::from_fn(10, |i, _| coeffs[i] * C64::from_polar(1.0, eig.eigenvalues[i] * t));
    let out = v * phased;
    let mut amps = [C64::new(0.0, 0.0); 10];
    amps.copy_from_slice(out.as_slice());
    Ok(FockState { amps })
}

/// Failure-to-bunch probability of a symmetric pair after exact evolution.
pub fn bunching_failure_numeric(pair: SymmetricPair, j: f64, u: f64, t: f64) -> Result<f64> {
    Ok(evolve(&pair.state(), j, u, t)?.singles_probability())
}

/// `(P_+, P_−) = (1 − λ₁λ₂, λ₁λ₂)` for a single-qubit spectrum.
pub fn two_qubit_bs_outcome(lambda1: f64, lambda2: f64) -> Result<(f64, f64)> {
    if !(lambda1 >= -1e-12 && lambda2 >= -1e-12) || (lambda1 + lambda2 - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("({lambda1}, {lambda2}) is not a probability spectrum")));
    }
    let m = lambda1 * lambda2;
    Ok((1.0 - m, m))
}

/// Eigenvalues of a 2 × 2 Hermitian density matrix, largest first.
pub fn qubit_spectrum(rho: &Matrix2<C64>) -> Result<(f64, f64)> {
    let herm = (rho - rho.adjoint()).norm();
    let tr = (rho[(0, 0)] + rho[(1, 1)]).re;
    if herm > 1e-12 || (tr - 1.0).abs() > 1e-12 {
        return Err(invalid("not a normalized Hermitian 2 × 2 matrix"));
    }
    let (a, d) = (rho[(0, 0)].re, rho[(1, 1)].re);
    let disc = (((a - d) / 2.0).powi(2) + rho[(0, 1)].norm_sqr()).sqrt();
    let mean = (a + d) / 2.0;
    Ok((mean + disc, mean - disc))
}

/// Runs the ideal splitter on every branch of `ρ ⊗ ρ` (both copies written in
/// the eigenbasis of `ρ`) and returns the observed `(P_+, P_−)`.
pub fn simulate_bs_outcome(rho: &Matrix2<C64>, j: f64) -> Result<(f64, f64)> {
    let (l1, l2) = qubit_spectrum(rho)?;
    let eig = rho.symmetric_eigen();
    let t = PI / (4.0 * j);
    let vec_of = |col: usize| {
        let v = eig.eigenvectors.column(col);
        (v[0], v[1])
    };
    let lambdas = [eig.eigenvalues[0], eig.eigenvalues[1]];
    let zero = C64::new(0.0, 0.0);
    let mut p_minus = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let w = lambdas[x] * lambdas[y];
            if w.abs() < 1e-300 {
                continue;
            }
            let (cx0, cx1) = vec_of(x);
            let (cy0, cy1) = vec_of(y);
            // copy one in row I, copy two in row II
            let first = [cx0, cx1, zero, zero];
            let second = [zero, zero, cy0, cy1];
            let out = ideal_bs_map(&FockState::product(first, second)?, j, t)?;
            p_minus += w * out.singles_probability();
        }
    }
    debug_assert!((l1 + l2 - 1.0).abs() < 1e-9);
    Ok((1.0 - p_minus, p_minus))
}

/// `16J²/(16J²+U²) cos²(√(16J²+U²) t/2) + U²/(16J²+U²)`.
pub fn qbs_exact(j: f64, u: f64, t: f64) -> Result<f64> {
    if !(j > 0.0) {
        return Err(invalid("J must be positive"));
    }
    let omega2 = 16.0 * j * j + u * u;
    Ok(16.0 * j * j / omega2 * (omega2.sqrt() * t / 2.0).cos().powi(2) + u * u / omega2)
}

/// `t_bs = π/√(16J² + U²)`, where `qbs_exact` reaches `U²/(16J²+U²)`.
pub fn optimal_bs_time(j: f64, u: f64) -> Result<f64> {
    if !(j > 0.0) || !(u >= 0.0) {
        return Err(invalid("need J > 0 and U >= 0"));
    }
    Ok(PI / (16.0 * j * j + u * u).sqrt())
}

/// Bunching failure when the splitter is timed for hopping `j_mean` but the
/// actual hopping is `j`.
pub fn qbs_detuned(j: f64, j_mean: f64, u: f64) -> Result<f64> {
    qbs_exact(j, u, optimal_bs_time(j_mean, u)?)
}

/// Ratio above which the perturbative formula is flagged.
pub const QBS_APPROX_VALIDITY: f64 = 0.3;

/// `π²/8 (δJ/J)² + (U/J)²/16`.
pub fn qbs_approx(j: f64, delta_j: f64, u: f64) -> Result<f64> {
    if !(j > 0.0) || !(delta_j >= 0.0) || !(u >= 0.0) {
        return Err(invalid("need J > 0, δJ >= 0, U >= 0"));
    }
    let (rj, ru) = (delta_j / j, u / j);
    if rj > QBS_APPROX_VALIDITY || ru > QBS_APPROX_VALIDITY {
        log::warn!("q_bs approximation used outside its range: δJ/J = {rj:.3}, U/J = {ru:.3}");
    }
    Ok(PI * PI / 8.0 * rj * rj + ru * ru / 16.0)
}

/// Duration and error probabilities of the Feshbach loss stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossStage {
    /// Loss-stage duration (ms).
    pub t_l: f64,
    /// Probability a doubly occupied site survives.
    pub q_l: f64,
    /// Probability a single atom is lost.
    pub p_l: f64,
}

/// `q_l(t) = e^{−t/3τ_d}` for the loss stage.
pub fn pair_survival(t: f64, tau_d: f64) -> f64 {
    (-t / (3.0 * tau_d)).exp()
}

/// `p_l(t) = 1 − e^{−t/τ_s}`.
pub fn single_loss(t: f64, tau_s: f64) -> f64 {
    -(-t / tau_s).exp_m1()
}

/// Minimizes `p_l + q_l` over the loss-stage duration.
pub fn loss_stage(tau_d: f64, tau_s: f64) -> Result<LossStage> {
    if !(tau_d > 0.0 && tau_s > 3.0 * tau_d) {
        return Err(invalid(format!("need τ_s > 3τ_d > 0, got τ_d = {tau_d}, τ_s = {tau_s}")));
    }
    let t_l = (tau_s / (3.0 * tau_d)).ln() / (1.0 / (3.0 * tau_d) - 1.0 / tau_s);
    Ok(LossStage { t_l, q_l: pair_survival(t_l, tau_d), p_l: single_loss(t_l, tau_s) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qbs_values() {
        assert!(qbs_exact(1.0, 0.0, PI / 4.0).unwrap() < 1e-30);
        let t = optimal_bs_time(1.0, 4.0).unwrap();
        assert!((qbs_exact(1.0, 4.0, t).unwrap() - 0.5).abs() < 1e-15);
        assert!((qbs_approx(1.0, 0.1, 0.2).unwrap() - 0.014837).abs() < 5e-7);
        assert_eq!(qbs_approx(1.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn approx_matches_exact_for_small_u() {
        for &u in &[0.05, 0.1, 0.2] {
            let exact = qbs_exact(1.0, u, optimal_bs_time(1.0, u).unwrap()).unwrap();
            let approx = qbs_approx(1.0, 0.0, u).unwrap();
            assert!((approx - exact).abs() / exact < 0.05);
        }
    }

    #[test]
    fn loss_stage_reference_point() {
        let l = loss_stage(1.3, 500.0).unwrap();
        assert!((l.t_l - 19.08).abs() < 0.01);
        assert!((l.q_l - 0.0075).abs() < 2e-4);
        assert!((l.p_l - 0.0374).abs() < 2e-4);
        assert!(loss_stage(1.0, 3.0).is_err());
    }

    #[test]
    fn loss_stage_formula() {
        let l = loss_stage(1.0, 100.0).unwrap();
        assert!((l.t_l - (100f64 / 3.0).ln() / (1.0 / 3.0 - 0.01)).abs() < 1e-12);
    }

    #[test]
    fn spectrum_outcomes() {
        assert_eq!(two_qubit_bs_outcome(1.0, 0.0).unwrap(), (1.0, 0.0));
        assert_eq!(two_qubit_bs_outcome(0.5, 0.5).unwrap(), (0.75, 0.25));
        let (p, m) = two_qubit_bs_outcome(0.9, 0.1).unwrap();
        assert!((p - 0.91).abs() < 1e-15 && (m - 0.09).abs() < 1e-15);
        assert!(two_qubit_bs_outcome(0.7, 0.7).is_err());
    }

    #[test]
    fn wrong_particle_number() {
        let one = C64::new(1.0, 0.0);
        assert!(matches!(
            FockState::from_occupations(&[([1, 0, 0, 0], one)]),
            Err(Error::WrongParticleNumber(1))
        ));
    }

    #[test]
    fn hamiltonian_is_symmetric() {
        let h = hamiltonian(1.3, 0.7);
        assert!((&h - h.transpose()).abs().max() < 1e-15);
    }

    #[test]
    fn pair_operator_round_trip() {
        let s = SymmetricPair::Ab.state();
        let back = FockState::from_pair_operator(&s.pair_operator()).unwrap();
        assert!((back.overlap(&s).norm() - 1.0).abs() < 1e-14);
    }
}
