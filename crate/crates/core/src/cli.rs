//! Command-line front end: argument parsing, configuration merging and the
//! subcommands. The `latticeprobe` binary only calls [`main_with_args`].

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bham::PhysicalParams;
use crate::errmodel::{gaussian_position_kernel, ErrorParams};
use crate::error::{invalid, Error, Result};
use crate::estimator::{correct_combined, profile_corrected_bs, InversionMethod};
use crate::figures::{figure, FigureOptions};
use crate::io::{distribution_table, profile_table, render_svg, subset_table, variance_table, Table};
use crate::network::{singles_distribution, OutcomeDistribution, OutcomeKind};
use crate::purity::{
    check_subset_inequalities, purity_profile, subset_purities, InequalityVerdict, SubsetMask, DEFAULT_TOLERANCE,
};
use crate::qstate::{
    apply_dephasing, make_classical_correlated, make_ghz, make_macro_superposition, make_phi_state,
    make_uniform_product, make_werner, QubitRegisterState, C64,
};
use crate::variance::{
    analytic_bounds, monte_carlo_estimate, pattern_distribution, ProfileEstimator, SpatialEstimator, VarianceMode,
    VarianceReport,
};

#[derive(Debug, Parser)]
#[command(name = "latticeprobe", version, about = "Purity-based entanglement detection in optical lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Average purities (or all subset purities) of a state.
    Purities(RunConfig),
    /// Ideal antisymmetric-count distribution P(j), or sign patterns.
    Pj(RunConfig),
    /// Beam-splitter and loss-stage error figures from physical constants.
    Physics(RunConfig),
    /// Seeded finite-N experiment through the error channels, then correction.
    Simulate(RunConfig),
    /// Corrects an observed count distribution (or the exact forward model).
    Correct(RunConfig),
    /// Single-run variances of the corrected estimators with their bounds.
    Variance(RunConfig),
    /// Worst-case variance over the purity box.
    Worstcase(RunConfig),
    /// Writes the data series of one figure as CSV.
    Figure {
        /// Figure number, 1 to 8.
        index: u8,
        #[command(flatten)]
        cfg: RunConfig,
    },
}

/// State families available from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ghz,
    Cluster,
    Phi,
    Macro,
    Werner,
    Classical,
    Product,
}

/// Every option of every subcommand. A JSON file passed with `--config` has
/// the same (snake_case) keys; explicit flags take precedence over it.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// JSON configuration file.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, env = "LATTICEPROBE_THREADS")]
    #[serde(skip)]
    pub threads: Option<usize>,

    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Number of qubits (columns).
    #[arg(long)]
    pub n: Option<usize>,
    /// Phase of the φ state.
    #[arg(long)]
    pub phi: Option<f64>,
    /// Real part of γ for the macroscopic superposition.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Imaginary part of γ.
    #[arg(long)]
    pub gamma_im: Option<f64>,
    /// Polar angle of each qubit in the product family.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Dephasing strength applied on top of the family state.
    #[arg(long)]
    pub dephase: Option<f64>,
    /// Weight of the maximally mixed part of the Werner state.
    #[arg(long)]
    pub werner: Option<f64>,
    /// State document (JSON) instead of a family.
    #[arg(long)]
    pub state_file: Option<PathBuf>,

    /// Beam-splitter error.
    #[arg(long)]
    pub q: Option<f64>,
    /// Detector error.
    #[arg(long)]
    pub p: Option<f64>,
    /// Position blur standard deviation, in units of λ.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Lattice spacing used as the blur length unit
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Hopping J (1/ms).
    #[arg(long)]
    pub j: Option<f64>,
    /// Spread of J between runs.
    #[arg(long)]
    pub delta_j: Option<f64>,
    /// On-site interaction U (1/ms).
    #[arg(long)]
    pub u: Option<f64>,
    /// Pair loss time constant (ms).
    #[arg(long)]
    pub tau_d: Option<f64>,
    /// Single-atom loss time constant (ms).
    #[arg(long)]
    pub tau_s: Option<f64>,

    /// Number of experimental runs.
    #[arg(long = "runs", visible_alias = "N")]
    pub runs: Option<usize>,
    /// Master seed for the simulated runs
    #[arg(long)]
    pub seed: Option<u64>,
    /// explicit or least-squares.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<InversionMethod>,
    /// bs, detector, combined or spatial.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<VarianceMode>,
    /// Restrict to one subset size.
    #[arg(long)]
    pub k: Option<usize>,
    /// Subset as comma-separated columns, e.g. 2,3.
    #[arg(long)]
    pub subset: Option<String>,
    /// Emit every subset purity instead of the averages.
    #[arg(long)]
    pub subsets: bool,
    /// Emit the sign-pattern distribution instead of P(j).
    #[arg(long)]
    pub patterns: bool,
    /// Drop the P(j) >= 0 constraint from the worst case.
    #[arg(long)]
    pub unconstrained: bool,

    /// Observed distribution CSV (index,P).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file (directory for `figure`); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the JSON summary to this file.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Also render SVG charts next to the CSV files.
    #[arg(long)]
    pub svg: bool,
    /// Grid points along the figure's x axis.
    #[arg(long)]
    pub points: Option<usize>,
    /// Figure panel: worst or state.
    #[arg(long)]
    pub which: Option<String>,
}

fn parse_method(s: &str) -> std::result::Result<InversionMethod, String> {
    match s {
        "explicit" => Ok(InversionMethod::Explicit),
        "least-squares" | "ls" => Ok(InversionMethod::LeastSquares),
        _ => Err(format!("unknown method {s:?}; expected explicit or least-squares")),
    }
}

fn parse_mode(s: &str) -> std::result::Result<VarianceMode, String> {
    match s {
        "bs" => Ok(VarianceMode::Bs),
        "detector" => Ok(VarianceMode::Detector),
        "combined" => Ok(VarianceMode::Combined),
        "spatial" | "spatial-subset" => Ok(VarianceMode::SpatialSubset),
        _ => Err(format!("unknown mode {s:?}; expected bs, detector, combined or spatial")),
    }
}

macro_rules! overlay {
    ($top:ident, $base:ident; $($opt:ident),* ; $($flag:ident),*) => {
        RunConfig {
            config: $top.config,
            threads: $top.threads,
            $($opt: $top.$opt.or($base.$opt),)*
            $($flag: $top.$flag || $base.$flag,)*
        }
    };
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid(format!("config: {e}")))
    }

    /// Fills options not given on the command line from `base`.
    pub fn overlay(self, base: RunConfig) -> RunConfig {
        let top = self;
        overlay!(top, base;
            family, n, phi, gamma, gamma_im, theta, dephase, werner, state_file,
            q, p, sigma, lambda, j, delta_j, u, tau_d, tau_s,
            runs, seed, method, mode, k, subset, input, out, json, points, which;
            subsets, patterns, unconstrained, svg)
    }

    /// Merges the `--config` file, if any.
    pub fn resolve(self) -> Result<RunConfig> {
        match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                Ok(self.overlay(RunConfig::from_json(&text)?))
            }
            None => Ok(self),
        }
    }

    fn require_n(&self) -> Result<usize> {
        self.n.ok_or_else(|| invalid("missing --n"))
    }

    pub fn error_params(&self) -> Result<ErrorParams> {
        for (name, v) in [("q", self.q), ("p", self.p)] {
            if v == Some(1.0) {
                return Err(Error::Singular(format!("{name} = 1 erases the signal")));
            }
        }
        ErrorParams::new(
            self.q.unwrap_or(0.0),
            self.p.unwrap_or(0.0),
            self.sigma.unwrap_or(0.0),
            self.lambda.unwrap_or(1.0),
        )
    }

    pub fn physical_params(&self) -> Result<PhysicalParams> {
        let d = PhysicalParams::default();
        PhysicalParams::new(
            self.j.unwrap_or(d.j),
            self.delta_j.unwrap_or(d.delta_j),
            self.u.unwrap_or(d.u),
            self.tau_d.unwrap_or(d.tau_d),
            self.tau_s.unwrap_or(d.tau_s),
        )
    }

    pub fn method(&self) -> InversionMethod {
        self.method.unwrap_or_default()
    }

    /// Builds the state described by the family options or `--state-file`.
    pub fn state(&self) -> Result<QubitRegisterState> {
        let base = if let Some(path) = &self.state_file {
            let st = QubitRegisterState::from_json(&std::fs::read_to_string(path)?)?;
            if let Some(n) = self.n {
                if n != st.n() {
                    return Err(invalid(format!("--n {n} disagrees with the state file ({} qubits)", st.n())));
                }
            }
            st
        } else {
            let n = self.require_n()?;
            let family = self.family.ok_or_else(|| invalid("missing --family or --state-file"))?;
            match family {
                Family::Ghz => make_ghz(n)?,
                Family::Cluster => make_phi_state(n, PI)?,
                Family::Phi => make_phi_state(n, self.phi.ok_or_else(|| invalid("missing --phi"))?)?,
                Family::Macro => {
                    make_macro_superposition(n, C64::new(self.gamma.unwrap_or(0.0), self.gamma_im.unwrap_or(0.0)))?
                }
                Family::Werner => make_werner(n, self.werner.unwrap_or(0.0))?,
                Family::Classical => make_classical_correlated(n)?,
                Family::Product => make_uniform_product(n, self.theta.unwrap_or(0.0), 0.0)?,
            }
        };
        match self.dephase {
            Some(d) if d != 0.0 => apply_dephasing(&base, d),
            _ => Ok(base),
        }
    }

    fn subset_mask(&self, n: usize) -> Result<Option<SubsetMask>> {
        let Some(text) = &self.subset else { return Ok(None) };
        let cols = text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<usize>().map_err(|_| invalid(format!("bad column {s:?} in --subset"))))
            .collect::<Result<Vec<_>>>()?;
        SubsetMask::from_columns(n, &cols).map(Some)
    }
}

/// Process exit status for an error: 3 for a singular corrector, 1 for I/O,
/// 2 for everything else (invalid configuration).
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Singular(_) | Error::RankDeficient { .. } => 3,
        Error::Io(_) | Error::Csv(_) => 1,
        _ => 2,
    }
}

/// Parses `args`, runs the command and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("latticeprobe: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    type Action = Box<dyn Fn(&RunConfig) -> Result<()>>;
    let (cfg, action): (RunConfig, Action) = match cli.command {
        Command::Purities(c) => (c, Box::new(cmd_purities)),
        Command::Pj(c) => (c, Box::new(cmd_pj)),
        Command::Physics(c) => (c, Box::new(cmd_physics)),
        Command::Simulate(c) => (c, Box::new(cmd_simulate)),
        Command::Correct(c) => (c, Box::new(cmd_correct)),
        Command::Variance(c) => (c, Box::new(cmd_variance)),
        Command::Worstcase(c) => (c, Box::new(cmd_worstcase)),
        Command::Figure { index, cfg } => (cfg, Box::new(move |c: &RunConfig| cmd_figure(index, c))),
    };
    let cfg = cfg.resolve()?;
    if let Some(t) = cfg.threads {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    action(&cfg)
}

fn emit_table(table: &Table, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => table.save_csv(path),
        None => table.write_csv(std::io::stdout().lock()),
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    runs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    verdict: InequalityVerdict,
}

fn emit_summary(cfg: &RunConfig, summary: &Summary) -> Result<()> {
    let line = serde_json::to_string(summary)?;
    writeln!(std::io::stderr(), "{line}")?;
    if let Some(path) = &cfg.json {
        crate::io::write_json(path, summary)?;
    }
    Ok(())
}

pub fn cmd_purities(cfg: &RunConfig) -> Result<()> {
    let state = cfg.state()?;
    let verdict = if cfg.subsets {
        let map = subset_purities(&state)?;
        emit_table(&subset_table(&map)?, cfg.out.as_deref())?;
        check_subset_inequalities(&map, DEFAULT_TOLERANCE)
    } else {
        let prof = purity_profile(&state)?;
        emit_table(&profile_table(&prof), cfg.out.as_deref())?;
        check_subset_inequalities(&prof, DEFAULT_TOLERANCE)
    };
    emit_summary(cfg, &Summary { command: "purities", method: None, runs: None, seed: None, verdict })
}

pub fn cmd_pj(cfg: &RunConfig) -> Result<()> {
    let state = cfg.state()?;
    let dist = if cfg.patterns { pattern_distribution(&state)? } else { singles_distribution(&purity_profile(&state)?)? };
    emit_table(&distribution_table(&dist), cfg.out.as_deref())
}

pub fn cmd_physics(cfg: &RunConfig) -> Result<()> {
    let summary = cfg.physical_params()?.summary()?;
    let text = serde_json::to_string_pretty(&summary)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let state = cfg.state()?;
    let params = cfg.error_params()?;
    let runs = cfg.runs.unwrap_or(100_000);
    let seed = cfg.seed.unwrap_or(0);
    let method = cfg.method();
    let exact = purity_profile(&state)?;
    let mc = monte_carlo_estimate(&state, &params, runs, seed, method)?;
    let mut t = Table::new(["k", "exact", "estimate", "standard_error", "predicted_variance_over_n"]);
    for k in 0..=exact.n() {
        t.push_numbers(&[
            k as f64,
            exact.get(k),
            mc.estimate.get(k),
            mc.standard_error[k],
            mc.predicted_variance[k] / runs as f64,
        ])?;
    }
    emit_table(&t, cfg.out.as_deref())?;
    let verdict = check_subset_inequalities(&mc.estimate, DEFAULT_TOLERANCE);
    emit_summary(cfg, &Summary { command: "simulate", method: Some(method.name()), runs: Some(runs), seed: Some(seed), verdict })
}

pub fn cmd_correct(cfg: &RunConfig) -> Result<()> {
    let params = cfg.error_params()?;
    let method = cfg.method();
    let observed = match &cfg.input {
        Some(path) => {
            let table = Table::load_csv(path)?;
            let col = table.columns.get(1).cloned().ok_or_else(|| invalid("input needs an index and a P column"))?;
            let probs = table.numeric_column(&col)?;
            let len = probs.len();
            let n = cfg.n.unwrap_or(len.saturating_sub(1) / 2);
            let kind = if len == 2 * n + 1 {
                OutcomeKind::AtomCount
            } else if len == n + 1 {
                OutcomeKind::PairCount
            } else {
                return Err(invalid(format!("{len} entries fit neither n+1 nor 2n+1 for n = {n}")));
            };
            OutcomeDistribution::new(n, kind, probs)?
        }
        None => {
            let prof = purity_profile(&cfg.state()?)?;
            let est = ProfileEstimator::new(prof.n(), params.p, params.q, VarianceMode::Combined, method)?;
            OutcomeDistribution::new(prof.n(), OutcomeKind::AtomCount, est.observed(&prof)?)?
        }
    };
    let (profile, tag) = if observed.kind() == OutcomeKind::PairCount {
        (profile_corrected_bs(&observed, params.q)?, InversionMethod::Explicit)
    } else {
        let c = correct_combined(&observed, params.p, params.q, method)?;
        (c.profile, c.method)
    };
    emit_table(&profile_table(&profile), cfg.out.as_deref())?;
    let verdict = check_subset_inequalities(&profile, DEFAULT_TOLERANCE);
    emit_summary(cfg, &Summary { command: "correct", method: Some(tag.name()), runs: None, seed: None, verdict })
}

fn spatial_estimator(cfg: &RunConfig, n: usize) -> Result<SpatialEstimator> {
    let subset = cfg.subset_mask(n)?.ok_or_else(|| invalid("spatial mode needs --subset"))?;
    let sigma = cfg.sigma.unwrap_or(0.0);
    let kernel = gaussian_position_kernel(sigma, cfg.lambda.unwrap_or(1.0), n)?;
    SpatialEstimator::new(subset, &kernel, cfg.method(), sigma)
}

fn spatial_report(cfg: &RunConfig, est: &SpatialEstimator, v: f64) -> Result<VarianceReport> {
    let k = est.subset.len();
    let p = cfg.p.unwrap_or(0.0);
    Ok(VarianceReport {
        k,
        subset: Some(est.subset.bits()),
        v,
        bound: None,
        method: format!("spatial/{}", est.method.name()),
        n: est.n,
        p,
        q: cfg.q.unwrap_or(0.0),
        sigma: est.sigma,
    })
}

fn ks(cfg: &RunConfig, n: usize) -> Result<Vec<usize>> {
    match cfg.k {
        Some(k) if k > n => Err(invalid(format!("k = {k} exceeds n = {n}"))),
        Some(k) => Ok(vec![k]),
        None => Ok((1..=n).collect()),
    }
}

pub fn cmd_variance(cfg: &RunConfig) -> Result<()> {
    let state = cfg.state()?;
    let n = state.n();
    let mode = cfg.mode.unwrap_or(VarianceMode::Combined);
    let reports = if mode == VarianceMode::SpatialSubset {
        let est = spatial_estimator(cfg, n)?;
        let v = est.variance(&pattern_distribution(&state)?)?;
        let mut r = spatial_report(cfg, &est, v)?;
        if cfg.sigma.unwrap_or(0.0) == 0.0 {
            r.bound = Some(analytic_bounds(n, r.k, r.p, 0.0, mode)?);
        }
        vec![r]
    } else {
        let params = cfg.error_params()?;
        let est = ProfileEstimator::new(n, params.p, params.q, mode, cfg.method())?;
        let prof = purity_profile(&state)?;
        ks(cfg, n)?.into_iter().map(|k| est.report(&prof, k)).collect::<Result<Vec<_>>>()?
    };
    emit_table(&variance_table(&reports), cfg.out.as_deref())
}

pub fn cmd_worstcase(cfg: &RunConfig) -> Result<()> {
    let n = cfg.require_n()?;
    let mode = cfg.mode.unwrap_or(VarianceMode::Combined);
    let reports = if mode == VarianceMode::SpatialSubset {
        let est = spatial_estimator(cfg, n)?;
        let v = est.worst_case()?.v_max;
        vec![spatial_report(cfg, &est, v)?]
    } else {
        let params = cfg.error_params()?;
        let est = ProfileEstimator::new(n, params.p, params.q, mode, cfg.method())?;
        ks(cfg, n)?
            .into_iter()
            .map(|k| {
                Ok(VarianceReport {
                    k,
                    subset: None,
                    v: est.worst_case(k, !cfg.unconstrained)?.v_max,
                    bound: Some(est.bound(k)?),
                    method: est.label(),
                    n,
                    p: params.p,
                    q: params.q,
                    sigma: 0.0,
                })
            })
            .collect::<Result<Vec<_>>>()?
    };
    emit_table(&variance_table(&reports), cfg.out.as_deref())
}

pub fn cmd_figure(index: u8, cfg: &RunConfig) -> Result<()> {
    let opts = FigureOptions { n: cfg.n, points: cfg.points, which: cfg.which.clone() };
    let tables = figure(index, &opts)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
    std::fs::create_dir_all(&dir)?;
    for ft in &tables {
        let stem = format!("fig{index}_{}", ft.name);
        let csv_path = dir.join(format!("{stem}.csv"));
        ft.table.save_csv(&csv_path)?;
        eprintln!("wrote {}", csv_path.display());
        if cfg.svg {
            let svg_path = dir.join(format!("{stem}.svg"));
            std::fs::write(&svg_path, render_svg(&ft.table, &stem)?)?;
            eprintln!("wrote {}", svg_path.display());
        }
    }
    Ok(())
}
