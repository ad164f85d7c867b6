//! Seeded finite-N experiments: estimates, standard errors, and the
//! replicate-level check that the sample variance matches V_k.
//!
//! cargo run --release --example monte_carlo

use latticeprobe::errmodel::ErrorParams;
use latticeprobe::estimator::InversionMethod;
use latticeprobe::purity::{check_subset_inequalities, purity_profile, DEFAULT_TOLERANCE};
use latticeprobe::qstate::{make_ghz, make_phi_state};
use latticeprobe::variance::{monte_carlo_estimate, monte_carlo_replicates, sample_trajectories};

fn main() -> latticeprobe::Result<()> {
    let ghz = make_ghz(8)?;
    let params = ErrorParams::new(0.02, 0.1, 0.0, 1.0)?;
    let r = monte_carlo_estimate(&ghz, &params, 200_000, 42, InversionMethod::LeastSquares)?;
    let exact = purity_profile(&ghz)?;
    println!("GHZ n = 8, p = 0.1, q = 0.02, N = 2e5 (least squares)");
    println!(" k   exact   estimate   std err");
    for k in 0..=8 {
        println!("{k:>2}  {:.4}  {:>8.4}  {:.4}", exact.get(k), r.estimate.get(k), r.standard_error[k]);
    }
    let verdict = check_subset_inequalities(&r.estimate, DEFAULT_TOLERANCE);
    println!("entanglement detected from the sample: {} (margin {:.3})", verdict.violated, verdict.margin);

    let cluster = make_phi_state(6, std::f64::consts::PI)?;
    let prof = purity_profile(&cluster)?;
    let bs = ErrorParams::new(0.05, 0.0, 0.0, 1.0)?;
    let reps = monte_carlo_replicates(&prof, &bs, 100_000, 2024, 50, InversionMethod::Explicit)?;
    let v3 = reps[0].predicted_variance[3];
    let mean_ratio = reps.iter().map(|r| r.sample_variance[3] / v3).sum::<f64>() / reps.len() as f64;
    println!("\ncluster n = 6, q = 0.05: V_3 = {v3:.4}, mean sample variance / V_3 over 50 seeds = {mean_ratio:.4}");

    let hist = sample_trajectories(&cluster, &ErrorParams::new(0.05, 0.05, 0.0, 1.0)?, 100_000, 1)?;
    println!("per-site trajectory sampler, atom-count histogram: {hist:?}");
    Ok(())
}
