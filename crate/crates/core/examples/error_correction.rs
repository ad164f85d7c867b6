//! Forward error channels and their correctors on exact distributions.
//!
//! cargo run --example error_correction

use latticeprobe::errmodel::{apply_bs_error, apply_combined_error, apply_detector_error, JDistribution};
use latticeprobe::estimator::{correct_combined, invert_bs_error, invert_detector_error_explicit, InversionMethod};
use latticeprobe::network::singles_distribution;
use latticeprobe::purity::purity_profile;
use latticeprobe::qstate::make_phi_state;

fn max_err(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn main() -> latticeprobe::Result<()> {
    let n = 10;
    let cluster = make_phi_state(n, std::f64::consts::PI)?;
    let truth = purity_profile(&cluster)?;
    let pj = singles_distribution(&truth)?;

    let pairs = apply_bs_error(&pj, 0.1)?;
    println!("BS error q = 0.1, corrected P(j) error: {:.1e}", max_err(invert_bs_error(&pairs, 0.1)?.probs(), pj.probs()));

    let atoms = apply_detector_error(&pj, 0.05)?;
    let back = invert_detector_error_explicit(&atoms, 0.05)?;
    println!("detector error p = 0.05, corrected P(j) error: {:.1e}", max_err(back.probs(), pj.probs()));

    let (p, q) = (0.05, 0.05);
    let observed = apply_combined_error(&pj, p, q)?;
    println!("\nobserved atom counts with p = q = 0.05:");
    for (i, v) in observed.probs().iter().enumerate() {
        println!("  {i:>2} atoms  {v:.5}");
    }
    for method in [InversionMethod::Explicit, InversionMethod::LeastSquares] {
        let c = correct_combined(&observed, p, q, method)?;
        println!("{:>13}: profile error {:.1e}", method.name(), max_err(c.profile.values(), truth.values()));
    }

    // hopping that fluctuates from run to run raises the effective q
    let jdist = JDistribution::gaussian(1.0, 0.05 / std::f64::consts::SQRT_2)?;
    println!("\neffective q for δJ/J = 0.05, U = 0: {:.5}", jdist.effective_q(0.0)?);
    Ok(())
}
