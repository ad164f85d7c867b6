//! Data series behind the published figures, as tables with the x value in
//! the first column and one column per curve.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::errmodel::gaussian_position_kernel;
use crate::error::{invalid, Result};
use crate::estimator::InversionMethod;
use crate::io::Table;
use crate::network::singles_distribution;
use crate::purity::{purity_profile, reduced_purity, PurityProfile, SubsetMask};
use crate::qstate::{apply_dephasing, make_classical_correlated, make_ghz, make_phi_state};
use crate::variance::{pattern_distribution, ProfileEstimator, SpatialEstimator, VarianceMode};

/// Overrides for the default figure parameters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FigureOptions {
    /// Register size.
    pub n: Option<usize>,
    /// Number of grid points along the x axis.
    pub points: Option<usize>,
    /// `worst` or `state` (aliases `cluster`, `ghz`) for figures with both
    /// panels; both when unset.
    pub which: Option<String>,
}

/// One named table of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub name: String,
    pub table: Table,
}

pub const FIGURE_COUNT: u8 = 8;

/// Subset size lists used by the variance figures.
pub const VARIANCE_KS: [usize; 5] = [1, 4, 7, 11, 15];

/// Computes all tables of figure `index` (1 to 8).
pub fn figure(index: u8, opts: &FigureOptions) -> Result<Vec<FigureTable>> {
    match index {
        1 => fig1(opts),
        2 => fig2(opts),
        3 => fig3(opts),
        4 => fig4(opts),
        5 => fig5(opts),
        6 => fig6(opts),
        7 => fig7(opts),
        8 => fig8(opts),
        _ => Err(invalid(format!("unknown figure {index}; expected 1..={FIGURE_COUNT}"))),
    }
}

fn grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![lo];
    }
    (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect()
}

/// Whether the worst-case (`true`) or specific-state (`false`) panel is wanted.
fn wants(opts: &FigureOptions, worst: bool) -> Result<bool> {
    match opts.which.as_deref() {
        None => Ok(true),
        Some("worst") => Ok(worst),
        Some("state" | "cluster" | "ghz") => Ok(!worst),
        Some(other) => Err(invalid(format!("unknown panel {other:?}; expected worst or state"))),
    }
}

fn named(name: &str, table: Table) -> FigureTable {
    FigureTable { name: name.to_string(), table }
}

/// Subset classes of the φ-state plot: one interior atom, two separated
/// interior atoms, an interior block, and a block touching the end.
pub fn phi_classes(n: usize) -> Result<[SubsetMask; 4]> {
    if n < 6 {
        return Err(invalid("the φ classes need n >= 6"));
    }
    Ok([
        SubsetMask::from_columns(n, &[2])?,
        SubsetMask::from_columns(n, &[2, 5])?,
        SubsetMask::from_columns(n, &[2, 3, 4, 5])?,
        SubsetMask::from_columns(n, &[1, 2, 3, 4, 5])?,
    ])
}

/// `phi, pur_2, pur_2_5, pur_2_3_4_5, pur_1_2_3_4_5`.
pub fn fig1(opts: &FigureOptions) -> Result<Vec<FigureTable>> {
    let n = opts.n.unwrap_or(6);
    let classes = phi_classes(n)?;
    let mut t = Table::new(["phi", "pur_2", "pur_2_5", "pur_2_3_4_5", "pur_1_2_3_4_5"]);
    for phi in grid(0.0, 2.0 * PI, opts.points.unwrap_or(65)) {
        let state = make_phi_state(n, phi)?;
        let mut row = vec![phi];
        for b in classes {
            row.push(reduced_purity(&state, b)?);
        }
        t.push_numbers(&row)?;
    }
    Ok(vec![named("phi_classes", t)])
}

/// Profiles and `P(j)` of the classical, GHZ, cluster and dephased cluster
/// states.
pub fn fig2(opts: &FigureOptions) -> Result<Vec<FigureTable>> {
    let n = opts.n.unwrap_or(10);
    let cluster = make_phi_state(n, PI)?;
    let profiles = [
        purity_profile(&make_classical_correlated(n)?)?,
        purity_profile(&make_ghz(n)?)?,
        purity_profile(&cluster)?,
        purity_profile(&apply_dephasing(&cluster, 0.1)?)?,
    ];
    let names = ["classical", "ghz", "cluster", "cluster_dephased"];
    let mut avpur = Table::new(std::iter::once("k").chain(names));
    let mut pj = Table::new(std::iter::once("j").chain(names));
    let dists = profiles.iter().map(singles_distribution).collect::<Result<Vec<_>>>()?;
    for k in 0..=n {
        let mut a = vec![k as f64];
        a.extend(profiles.iter().map(|p| p.get(k)));
        avpur.push_numbers(&a)?;
        let mut b = vec![k as f64];
        b.extend(dists.iter().map(|d| d.get(k)));
        pj.push_numbers(&b)?;
    }
    Ok(vec![named("avpur", avpur), named("pj", pj)])
}

/// `phi, k1, k2, k3, k7` for the φ state.
pub fn fig3(opts: &FigureOptions) -> Result<Vec<FigureTable>> {
    let n = opts.n.unwrap_or(15);
    let ks: Vec<usize> = [1, 2, 3, 7].into_iter().filter(|&k| k <= n).collect();
    let mut t = Table::new(std::iter::once("phi".to_string()).chain(ks.iter().map(|k| format!("k{k}"))));
    for phi in grid(0.0, 2.0 * PI, opts.points.unwrap_or(65)) {
        let prof = purity_profile(&make_phi_state(n, phi)?)?;
        let mut row = vec![phi];
        row.extend(ks.iter().map(|&k| prof.get(k)));
        t.push_numbers(&row)?;
    }
    Ok(vec![named("phi_profile", t)])
}

/// `d, k1, k2, k8, k14, k15` for the dephased cluster state.
pub fn fig4(opts: &FigureOptions) -> Result<Vec<FigureTable>> {
    let n = opts.n.unwrap_or(15);
    let mut ks = vec![1, 2, n.div_ceil(2), n - 1, n];
    ks.dedup();
    let cluster = make_phi_state(n, PI)?;
    let mut t = Table::new(std::iter::once("d".to_string()).chain(ks.iter().map(|k| format!("k{k}"))));
    for d in grid(0.0, 1.0, opts.points.unwrap_or(51)) {
        let prof = purity_profile(&apply_dephasing(&cluster, d)?)?;
        let mut row = vec![d];
        row.extend(ks.iter().map(|&k| prof.get(k)));
        t.push_numbers(&row)?;
    }
    Ok(vec![named("cluster_dephasing", t)])
}

fn variance_ks(n: usize) -> Vec<usize> {
    VARIANCE_KS.iter().copied().filter(|&k| k <= n).collect()
}

fn variance_sweep(
    n: usize,
    xs: &[f64],
    mode: VarianceMode,
    method: InversionMethod,
    profile: Option<&PurityProfile>,
) -> Result<Table> {
    let ks = variance_ks(n);
    let x_name = if mode == VarianceMode::Bs { "q" } else { "p" };
    let mut t = Table::new(std::iter::once(x_name.to_string()).chain(ks.iter().map(|k| format!("k{k}"))));
    for &x in xs {
        let (p, q) = if mode == VarianceMode::Bs { (0.0, x) } else { (x, 0.0) };
        let est = ProfileEstimator::new(n, p, q, mode, method)?;
        let mut row = vec![x];
        for &k in &ks {
            row.push(match profile {
                Some(prof) => est.variance(prof, k)?,
                None => est.worst_case(k, true)?.v_max,
            });
        }
        t.push_numbers(&row)?;
    }
    Ok(t)
}

/// `V_k` against `q` (worst case and cluster state).
pub fn fig5(opts: &FigureOptions) -> Result<Vec<FigureTable>> {
    let n = opts.n.unwrap_or(15);
    let qs = grid(0.0, 0.2, opts.points.unwrap_or(21));
    let mut out = Vec::new();
    if wants(opts, true)? {
        out.push(named("worst", variance_sweep(n, &qs, VarianceMode::Bs, InversionMethod::Explicit, None)?));
    }
    if wants(opts, false)? {
        let prof = purity_profile(&make_phi_state(n, PI)?)?;
        out.push(named("cluster", variance_sweep(n, &qs, VarianceMode::Bs, InversionMethod::Explicit, Some(&prof))?));
    }
    Ok(out)
}

/// Worst-case `V_k` against `n` at `q = 1/k` for `k ∈ {2, 4, 7, n}`, with the
/// `exp(4kq) = e⁴` line.
pub fn fig6(opts: &FigureOptions) -> Result<Vec<FigureTable>> {
    let n_max = opts.n.unwrap_or(15);
    let mut t = Table::new(["n", "k2", "k4", "k7", "kn", "bound"]);
    for n in 2..=n_max {
        let mut row = vec![n as f64];
        for k in [2, 4, 7, n] {
            if k > n {
                row.push(f64::NAN);
                continue;
            }
            let q = 1.0 / k as f64;
            let est = ProfileEstimator::new(n, 0.0, q, VarianceMode::Bs, InversionMethod::Explicit)?;
            row.push(est.worst_case(k, true)?.v_max);
        }
        row.push(4f64.exp());
        t.push_numbers(&row)?;
    }
    Ok(vec![named("worst_vs_n", t)])
}

/// Detector error: explicit-corrector `V_k` against `p` (worst case and
/// cluster state), and the least-squares worst case against `n` at
/// `p = 1/(2k)` for `k ∈ {1, 2, 3, n}`.
pub fn fig7(opts: &FigureOptions) -> Result<Vec<FigureTable>> {
    let n_max = opts.n.unwrap_or(15);
    let ps = grid(0.0, 0.1, opts.points.unwrap_or(21));
    let mut out = Vec::new();
    if wants(opts, true)? {
        out.push(named(
            "worst_vs_p",
            variance_sweep(n_max, &ps, VarianceMode::Detector, InversionMethod::Explicit, None)?,
        ));
    }
    if wants(opts, false)? {
        let prof = purity_profile(&make_phi_state(n_max, PI)?)?;
        out.push(named(
            "cluster_vs_p",
            variance_sweep(n_max, &ps, VarianceMode::Detector, InversionMethod::Explicit, Some(&prof))?,
        ));
    }
    let mut t = Table::new(["n", "k1", "k2", "k3", "kn"]);
    for n in 1..=n_max {
        let mut row = vec![n as f64];
        for k in [1, 2, 3, n] {
            if k > n {
                row.push(f64::NAN);
                continue;
            }
            let p = 1.0 / (2.0 * k as f64);
            let est = ProfileEstimator::new(n, p, 0.0, VarianceMode::Detector, InversionMethod::LeastSquares)?;
            row.push(est.worst_case(k, true)?.v_max);
        }
        t.push_numbers(&row)?;
    }
    out.push(named("least_squares_worst_vs_n", t));
    Ok(out)
}

/// Subsets of the spatial-resolution plot.
pub fn spatial_subsets(n: usize) -> Result<[SubsetMask; 4]> {
    if n < 3 {
        return Err(invalid("the spatial subsets need n >= 3"));
    }
    Ok([
        SubsetMask::from_columns(n, &[2])?,
        SubsetMask::from_columns(n, &[2, 3])?,
        SubsetMask::from_columns(n, &[1, 3])?,
        SubsetMask::from_columns(n, &[1, 2, 3])?,
    ])
}

/// `V_B` against `σ` (in units of `λ`) for both inversion methods, worst
/// case and GHZ state.
pub fn fig8(opts: &FigureOptions) -> Result<Vec<FigureTable>> {
    let n = opts.n.unwrap_or(4);
    let subsets = spatial_subsets(n)?;
    let patterns = pattern_distribution(&make_ghz(n)?)?;
    let labels = ["B2", "B2_3", "B1_3", "B1_2_3"];
    let header = || {
        std::iter::once("sigma".to_string()).chain(
            ["explicit", "least_squares"]
                .iter()
                .flat_map(|m| labels.iter().map(move |l| format!("{m}_{l}"))),
        )
    };
    let mut worst = Table::new(header());
    let mut ghz = Table::new(header());
    for sigma in grid(0.0, 1.5, opts.points.unwrap_or(31)) {
        let kernel = gaussian_position_kernel(sigma, 1.0, n)?;
        let mut w = vec![sigma];
        let mut g = vec![sigma];
        for method in [InversionMethod::Explicit, InversionMethod::LeastSquares] {
            for b in subsets {
                let est = SpatialEstimator::new(b, &kernel, method, sigma)?;
                if wants(opts, true)? {
                    w.push(est.worst_case()?.v_max);
                }
                g.push(est.variance(&patterns)?);
            }
        }
        if wants(opts, true)? {
            worst.push_numbers(&w)?;
        }
        ghz.push_numbers(&g)?;
    }
    let mut out = Vec::new();
    if wants(opts, true)? {
        out.push(named("worst", worst));
    }
    if wants(opts, false)? {
        out.push(named("ghz", ghz));
    }
    Ok(out)
}
