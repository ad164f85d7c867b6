//! Single-run variances of the corrected estimators, their analytic bounds,
//! and the worst case over all admissible purity profiles.
//!
//! cargo run --release --example variance_bounds

use latticeprobe::estimator::InversionMethod;
use latticeprobe::purity::purity_profile;
use latticeprobe::qstate::{make_ghz, make_phi_state};
use latticeprobe::variance::{beta_fit, ProfileEstimator, VarianceMode};

fn main() -> latticeprobe::Result<()> {
    let n = 15;
    let cluster = purity_profile(&make_phi_state(n, std::f64::consts::PI)?)?;
    let ghz = purity_profile(&make_ghz(n)?)?;

    println!(" k     q    cluster       GHZ    worst case     bound");
    for k in [2usize, 4, 7, 11, 15] {
        let q = 1.0 / k as f64;
        let est = ProfileEstimator::new(n, 0.0, q, VarianceMode::Bs, InversionMethod::Explicit)?;
        println!(
            "{k:>2}  {q:.3}  {:>9.4}  {:>9.4}  {:>11.4}  {:>8.3}",
            est.variance(&cluster, k)?,
            est.variance(&ghz, k)?,
            est.worst_case(k, true)?.v_max,
            est.bound(k)?
        );
    }

    println!("\ndetector error, k = 15, explicit vs least squares:");
    for p in [0.01, 0.03, 0.05, 0.07] {
        let ex = ProfileEstimator::new(n, p, 0.0, VarianceMode::Detector, InversionMethod::Explicit)?;
        let ls = ProfileEstimator::new(n, p, 0.0, VarianceMode::Detector, InversionMethod::LeastSquares)?;
        println!("  p = {p:.2}: {:>10.3}  {:>8.3}", ex.variance(&cluster, 15)?, ls.variance(&cluster, 15)?);
    }

    let grid: Vec<f64> = (1..=8).map(|i| 0.01 * i as f64).collect();
    let fit = beta_fit(&cluster, 15, &grid, InversionMethod::Explicit)?;
    println!("\nV_15 ∝ exp(β n p) with β = {:.3}", fit.beta);
    Ok(())
}
