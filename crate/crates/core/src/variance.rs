//! Single-run variances of the linear correctors, their bounds, worst cases
//! over the purity box, and seeded Monte Carlo experiments.
//!
//! A linear estimator `Σ_i c_i 1[outcome = i]` has mean `Σ_i P_exp(i) c_i` and
//! single-run variance `V = Σ_i P_exp(i) c_i² − mean²`; after `N` independent
//! runs the standard error is `√(V/N)`.

use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{compensated_sum, CompensatedSum};
use crate::errmodel::{
    bs_error_matrix, check_probability, detector_error_matrix, spatial_forward_matrix, ErrorParams,
};
use crate::error::{invalid, Error, Result};
use crate::estimator::{
    bs_correction_matrix, detector_profile_matrix, combined_correction_matrix, spatial_explicit_matrix,
    spatial_least_squares_matrix, InversionMethod,
};
use crate::lp::{maximize_concave_quadratic, LinearProgram};
use crate::network::{sign_pattern_distribution, singles_matrix, OutcomeDistribution, OutcomeKind};
use crate::purity::{purity_profile, subset_purities, PurityProfile, SubsetMask};
use crate::qstate::QubitRegisterState;

/// `Σ_i P_exp(i) c_i² − estimate²`.
pub fn variance_vk(observed: &[f64], coefficients: &[f64], estimate: f64) -> Result<f64> {
    if observed.len() != coefficients.len() {
        return Err(Error::LengthMismatch { expected: coefficients.len(), got: observed.len() });
    }
    let second = compensated_sum(observed.iter().zip(coefficients).map(|(p, c)| p * c * c));
    Ok(second - estimate * estimate)
}

/// Which channel (and hence which corrector) the variance refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceMode {
    /// Beam-splitter error only, pair counts observed.
    Bs,
    /// Detector error only, atom counts observed.
    Detector,
    /// Beam-splitter then detector error.
    Combined,
    /// Spatially resolved subset purity with effective detector error `p²`.
    SpatialSubset,
}

impl VarianceMode {
    pub fn name(self) -> &'static str {
        match self {
            VarianceMode::Bs => "bs",
            VarianceMode::Detector => "detector",
            VarianceMode::Combined => "combined",
            VarianceMode::SpatialSubset => "spatial-subset",
        }
    }
}

/// Upper bounds on the single-run variance.
///
/// `Bs`: `((1+q)/(1−q))^{2k}`; `Detector`: `((1+p)/(1−p))^{4n}`; `Combined`:
/// their product; `SpatialSubset` (`k = |B|`): `((1+p²)/(1−p²))^{2k}`.
pub fn analytic_bounds(n: usize, k: usize, p: f64, q: f64, mode: VarianceMode) -> Result<f64> {
    check_probability("p", p)?;
    check_probability("q", q)?;
    let rq = ((1.0 + q) / (1.0 - q)).powi(2 * k as i32);
    let rp = ((1.0 + p) / (1.0 - p)).powi(4 * n as i32);
    Ok(match mode {
        VarianceMode::Bs => rq,
        VarianceMode::Detector => rp,
        VarianceMode::Combined => rp * rq,
        VarianceMode::SpatialSubset => ((1.0 + p * p) / (1.0 - p * p)).powi(2 * k as i32),
    })
}

/// One row of a variance table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    /// Subset size, or `|B|` for subset estimators.
    pub k: usize,
    /// Subset mask for subset estimators.
    pub subset: Option<u32>,
    pub v: f64,
    pub bound: Option<f64>,
    pub method: String,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
}

// ---------------------------------------------------------------------------
// profile estimators

/// A profile corrector together with the forward map from profiles to
/// observed distributions.
#[derive(Debug, Clone)]
pub struct ProfileEstimator {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub mode: VarianceMode,
    pub method: InversionMethod,
    /// `observed = forward · avpur`.
    pub forward: DMatrix<f64>,
    /// `avpur estimate = coefficients · observed`.
    pub coefficients: DMatrix<f64>,
}

impl ProfileEstimator {
    pub fn new(n: usize, p: f64, q: f64, mode: VarianceMode, method: InversionMethod) -> Result<Self> {
        check_probability("p", p)?;
        check_probability("q", q)?;
        let s = singles_matrix(n)?;
        let (forward, coefficients) = match mode {
            VarianceMode::Bs => (bs_error_matrix(n, q)? * s, bs_correction_matrix(n, q)?.entries),
            VarianceMode::Detector => (detector_error_matrix(n, p)? * s, detector_profile_matrix(n, p, method)?.entries),
            VarianceMode::Combined => (
                detector_error_matrix(n, p)? * bs_error_matrix(n, q)? * s,
                combined_correction_matrix(n, p, q, method)?.entries,
            ),
            VarianceMode::SpatialSubset => {
                return Err(invalid("use SpatialEstimator for spatially resolved subsets"));
            }
        };
        let method = if mode == VarianceMode::Bs { InversionMethod::Explicit } else { method };
        Ok(Self { n, p, q, mode, method, forward, coefficients })
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.mode.name(), self.method.name())
    }

    /// Exact observed distribution for a profile.
    pub fn observed(&self, profile: &PurityProfile) -> Result<Vec<f64>> {
        if profile.n() != self.n {
            return Err(Error::LengthMismatch { expected: self.n + 1, got: profile.values().len() });
        }
        Ok(crate::estimator::apply_matrix(&self.forward, profile.values()))
    }

    pub fn coefficient_row(&self, k: usize) -> Vec<f64> {
        self.coefficients.row(k).iter().copied().collect()
    }

    /// `V_k` for the state with this profile.
    pub fn variance(&self, profile: &PurityProfile, k: usize) -> Result<f64> {
        if k > self.n {
            return Err(invalid(format!("k = {k} exceeds n = {}", self.n)));
        }
        let obs = self.observed(profile)?;
        let c = self.coefficient_row(k);
        let mean = compensated_sum(obs.iter().zip(&c).map(|(p, c)| p * c));
        variance_vk(&obs, &c, mean)
    }

    pub fn bound(&self, k: usize) -> Result<f64> {
        analytic_bounds(self.n, k, self.p, self.q, self.mode)
    }

    pub fn report(&self, profile: &PurityProfile, k: usize) -> Result<VarianceReport> {
        Ok(VarianceReport {
            k,
            subset: None,
            v: self.variance(profile, k)?,
            bound: Some(self.bound(k)?),
            method: self.label(),
            n: self.n,
            p: self.p,
            q: self.q,
            sigma: 0.0,
        })
    }

    /// Maximizes `V_k` over profiles in the purity box
    /// `2^{−m} <= avpur_m <= 1`, and with `constrained` also over those whose
    /// ideal `P(j)` is nonnegative.
    pub fn worst_case(&self, k: usize, constrained: bool) -> Result<WorstCase> {
        let n = self.n;
        if k > n {
            return Err(invalid(format!("k = {k} exceeds n = {n}")));
        }
        let c = self.coefficient_row(k);
        let dim = n + 1;
        // a·x = Σ_i P_exp(i) c_i², b·x = Σ_i P_exp(i) c_i
        let a: Vec<f64> = (0..dim)
            .map(|m| compensated_sum((0..c.len()).map(|i| self.forward[(i, m)] * c[i] * c[i])))
            .collect();
        let b: Vec<f64> =
            (0..dim).map(|m| compensated_sum((0..c.len()).map(|i| self.forward[(i, m)] * c[i]))).collect();
        let mut lp = LinearProgram::new(dim);
        lp.lo = (0..dim).map(|m| 0.5f64.powi(m as i32)).collect();
        lp.hi = vec![1.0; dim];
        if constrained {
            let s = singles_matrix(n)?;
            for j in 0..dim {
                lp.a_ub.push((0..dim).map(|m| -s[(j, m)]).collect());
                lp.b_ub.push(0.0);
            }
        }
        let best = maximize_concave_quadratic(&lp, &a, &b)?;
        Ok(WorstCase { v_max: best.value, argmax: best.x })
    }
}

/// The largest variance found and where it is attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase {
    pub v_max: f64,
    /// Maximizing profile (or distribution over antisymmetric sets for
    /// spatial estimators).
    pub argmax: Vec<f64>,
}

/// Worst-case `V_k` with the default nonnegativity constraint on `P(j)`.
pub fn worst_case_variance(
    n: usize,
    k: usize,
    p: f64,
    q: f64,
    mode: VarianceMode,
    method: InversionMethod,
) -> Result<WorstCase> {
    ProfileEstimator::new(n, p, q, mode, method)?.worst_case(k, true)
}

// ---------------------------------------------------------------------------
// spatial estimators

/// Estimator of one subset purity from blurred position multisets.
#[derive(Debug, Clone)]
pub struct SpatialEstimator {
    pub n: usize,
    pub subset: SubsetMask,
    pub method: InversionMethod,
    pub sigma: f64,
    /// `observed = forward · P(S)` over antisymmetric sets `S`.
    pub forward: DMatrix<f64>,
    /// `pur(B) estimate = coefficients · observed`.
    pub coefficients: Vec<f64>,
}

fn parity(s: usize, b: u32) -> f64 {
    if (s as u32 & b).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl SpatialEstimator {
    pub fn new(subset: SubsetMask, kernel: &DMatrix<f64>, method: InversionMethod, sigma: f64) -> Result<Self> {
        let n = subset.n();
        let forward = spatial_forward_matrix(n, kernel)?;
        let inverse = match method {
            InversionMethod::Explicit => spatial_explicit_matrix(n, kernel)?,
            InversionMethod::LeastSquares => spatial_least_squares_matrix(n, kernel)?,
        };
        let b = subset.bits();
        let coefficients = (0..inverse.entries.ncols())
            .map(|a| compensated_sum((0..1usize << n).map(|s| parity(s, b) * inverse.entries[(s, a)])))
            .collect();
        Ok(Self { n, subset, method, sigma, forward, coefficients })
    }

    /// `V_B` for a distribution over antisymmetric sets.
    pub fn variance(&self, patterns: &OutcomeDistribution) -> Result<f64> {
        patterns.expect(OutcomeKind::SignPattern)?;
        let obs = crate::estimator::apply_matrix(&self.forward, patterns.probs());
        let mean = compensated_sum(obs.iter().zip(&self.coefficients).map(|(p, c)| p * c));
        variance_vk(&obs, &self.coefficients, mean)
    }

    /// Estimate of `pur(B)` from an observed multiset distribution.
    pub fn estimate(&self, observed: &[f64]) -> Result<f64> {
        if observed.len() != self.coefficients.len() {
            return Err(Error::LengthMismatch { expected: self.coefficients.len(), got: observed.len() });
        }
        Ok(compensated_sum(observed.iter().zip(&self.coefficients).map(|(p, c)| p * c)))
    }

    /// Maximizes `V_B` over distributions `P(S)` whose implied subset purities
    /// all lie in `[2^{−|B'|}, 1]`.
    pub fn worst_case(&self) -> Result<WorstCase> {
        let dim = 1usize << self.n;
        let c = &self.coefficients;
        let a: Vec<f64> =
            (0..dim).map(|s| compensated_sum((0..c.len()).map(|i| self.forward[(i, s)] * c[i] * c[i]))).collect();
        let b: Vec<f64> = (0..dim).map(|s| compensated_sum((0..c.len()).map(|i| self.forward[(i, s)] * c[i]))).collect();
        let mut lp = LinearProgram::new(dim);
        lp.hi = vec![1.0; dim];
        lp.a_eq.push(vec![1.0; dim]);
        lp.b_eq.push(1.0);
        for other in 1..dim as u32 {
            let row: Vec<f64> = (0..dim).map(|s| parity(s, other)).collect();
            lp.a_ub.push(row.clone());
            lp.b_ub.push(1.0);
            lp.a_ub.push(row.iter().map(|v| -v).collect());
            lp.b_ub.push(-0.5f64.powi(other.count_ones() as i32));
        }
        let best = maximize_concave_quadratic(&lp, &a, &b)?;
        Ok(WorstCase { v_max: best.value, argmax: best.x })
    }
}

/// Sign-pattern distribution of a state (antisymmetric-set probabilities).
pub fn pattern_distribution(state: &QubitRegisterState) -> Result<OutcomeDistribution> {
    sign_pattern_distribution(&subset_purities(state)?)
}

// ---------------------------------------------------------------------------
// Monte Carlo

/// Observed outcomes of one seeded experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSample {
    pub seed: u64,
    pub runs: usize,
    /// Index of the observed outcome in each run.
    pub outcomes: Vec<u16>,
}

impl ExperimentSample {
    pub fn histogram(&self, len: usize) -> Vec<u64> {
        let mut h = vec![0u64; len];
        for &o in &self.outcomes {
            h[o as usize] += 1;
        }
        h
    }
}

/// Seeded finite-`N` estimate of the profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub estimate: PurityProfile,
    /// Sample variance of the per-run estimator values, per `k`.
    pub sample_variance: Vec<f64>,
    /// `√(sample_variance / N)`.
    pub standard_error: Vec<f64>,
    /// Exact `V_k` of the corrector on the true distribution.
    pub predicted_variance: Vec<f64>,
    #[serde(skip)]
    pub sample: ExperimentSample,
}

/// Independent stream seed for task `index` of a run seeded with `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `runs` outcomes from `probs` (tiny negative rounding clamped to zero).
pub fn sample_outcomes(probs: &[f64], runs: usize, seed: u64) -> Result<ExperimentSample> {
    let weights: Vec<f64> = probs.iter().map(|&p| p.max(0.0)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| invalid(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcomes = (0..runs).map(|_| dist.sample(&mut rng) as u16).collect();
    Ok(ExperimentSample { seed, runs, outcomes })
}

fn summarize(estimator: &ProfileEstimator, profile: &PurityProfile, sample: ExperimentSample) -> Result<MonteCarloResult> {
    let n = estimator.n;
    let runs = sample.runs;
    if runs == 0 {
        return Err(invalid("need at least one run"));
    }
    let hist = sample.histogram(estimator.forward.nrows());
    let mut estimate = Vec::with_capacity(n + 1);
    let mut sample_variance = Vec::with_capacity(n + 1);
    let mut predicted = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let c = estimator.coefficient_row(k);
        let mean = compensated_sum(hist.iter().zip(&c).map(|(&h, c)| h as f64 * c)) / runs as f64;
        let mut ss = CompensatedSum::new();
        for (&h, c) in hist.iter().zip(&c) {
            ss.add(h as f64 * (c - mean) * (c - mean));
        }
        estimate.push(mean);
        sample_variance.push(if runs > 1 { ss.value() / (runs - 1) as f64 } else { 0.0 });
        predicted.push(estimator.variance(profile, k)?);
    }
    let standard_error = sample_variance.iter().map(|v| (v / runs as f64).sqrt()).collect();
    Ok(MonteCarloResult {
        estimate: PurityProfile::from_estimate(estimate),
        sample_variance,
        standard_error,
        predicted_variance: predicted,
        sample,
    })
}

/// Runs `runs` seeded experiments on a state through the combined channel and
/// corrects the empirical frequencies.
pub fn monte_carlo_estimate(
    state: &QubitRegisterState,
    params: &ErrorParams,
    runs: usize,
    seed: u64,
    method: InversionMethod,
) -> Result<MonteCarloResult> {
    monte_carlo_from_profile(&purity_profile(state)?, params, runs, seed, method)
}

pub fn monte_carlo_from_profile(
    profile: &PurityProfile,
    params: &ErrorParams,
    runs: usize,
    seed: u64,
    method: InversionMethod,
) -> Result<MonteCarloResult> {
    params.validate()?;
    let est = ProfileEstimator::new(profile.n(), params.p, params.q, VarianceMode::Combined, method)?;
    let obs = est.observed(profile)?;
    summarize(&est, profile, sample_outcomes(&obs, runs, seed)?)
}

/// Independent replicates in parallel; replicate `r` uses `derive_seed(master, r)`.
pub fn monte_carlo_replicates(
    profile: &PurityProfile,
    params: &ErrorParams,
    runs: usize,
    master_seed: u64,
    replicates: usize,
    method: InversionMethod,
) -> Result<Vec<MonteCarloResult>> {
    params.validate()?;
    let est = ProfileEstimator::new(profile.n(), params.p, params.q, VarianceMode::Combined, method)?;
    let obs = est.observed(profile)?;
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| summarize(&est, profile, sample_outcomes(&obs, runs, derive_seed(master_seed, r))?))
        .collect()
}

/// Atom-count histogram from simulated per-site trajectories: draw the sign
/// pattern, let each symmetric pair fail to bunch with probability `q`, then
/// miss each atom with probability `p`.
pub fn sample_trajectories(
    state: &QubitRegisterState,
    params: &ErrorParams,
    runs: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    params.validate()?;
    let n = state.n();
    if n > crate::MAX_SPATIAL_SITES {
        return Err(Error::TooLarge { what: "trajectory sampler", n, max: crate::MAX_SPATIAL_SITES });
    }
    let patterns = pattern_distribution(state)?;
    let weights: Vec<f64> = patterns.probs().iter().map(|&p| p.max(0.0)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| invalid(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = vec![0u64; 2 * n + 1];
    for _ in 0..runs {
        let s = dist.sample(&mut rng);
        let mut atoms = 0;
        for site in 0..n {
            let minus = s >> site & 1 == 1;
            if minus || rng.gen_bool(params.q) {
                for _ in 0..2 {
                    if !rng.gen_bool(params.p) {
                        atoms += 1;
                    }
                }
            }
        }
        hist[atoms] += 1;
    }
    Ok(hist)
}

// ---------------------------------------------------------------------------
// exponential fits

/// Least-squares line through `(x, ln y)`; returns `(slope, intercept)`.
pub fn fit_log_slope(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 4 {
        return Err(Error::DegenerateGrid(format!("need at least 4 points, got {}", xs.len())));
    }
    if ys.iter().any(|&y| !(y > 0.0)) {
        return Err(Error::DegenerateGrid("values must be positive to take logarithms".into()));
    }
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let my = logs.iter().sum::<f64>() / m;
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    if sxx <= 1e-300 {
        return Err(Error::DegenerateGrid("all grid points coincide".into()));
    }
    let sxy = compensated_sum(xs.iter().zip(&logs).map(|(x, y)| (x - mx) * (y - my)));
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Growth rate `β` in `V_k ∝ exp(β n p)` for the detector corrector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaFit {
    pub beta: f64,
    pub intercept: f64,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
}

pub fn beta_fit(profile: &PurityProfile, k: usize, p_grid: &[f64], method: InversionMethod) -> Result<BetaFit> {
    let n = profile.n();
    let v = p_grid
        .iter()
        .map(|&p| ProfileEstimator::new(n, p, 0.0, VarianceMode::Detector, method)?.variance(profile, k))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = p_grid.iter().map(|p| n as f64 * p).collect();
    let (beta, intercept) = fit_log_slope(&xs, &v)?;
    Ok(BetaFit { beta, intercept, p: p_grid.to_vec(), v })
}
