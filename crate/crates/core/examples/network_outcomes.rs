//! Outcome statistics of the beam-splitter network: sign patterns, the count
//! of antisymmetric columns, and recovering purities from them.
//!
//! cargo run --example network_outcomes

use latticeprobe::network::{avpur_from_pj, count_minus_signs, purity_from_patterns, singles_distribution};
use latticeprobe::purity::{purity_profile, SubsetMask};
use latticeprobe::qstate::{make_ghz, make_phi_state};
use latticeprobe::variance::pattern_distribution;

fn main() -> latticeprobe::Result<()> {
    let ghz = make_ghz(3)?;
    let patterns = pattern_distribution(&ghz)?;
    println!("GHZ n = 3 sign patterns (- = antisymmetric column):");
    for (s, p) in patterns.probs().iter().enumerate() {
        let label: String = (0..3).map(|c| if s >> (2 - c) & 1 == 1 { '-' } else { '+' }).collect();
        println!("  {label}  {p:.4}");
    }
    let b = SubsetMask::from_columns(3, &[1, 2])?;
    println!("pur({{1,2}}) from patterns = {:.4}", purity_from_patterns(&patterns, b)?);

    let cluster = make_phi_state(12, std::f64::consts::PI)?;
    let prof = purity_profile(&cluster)?;
    let pj = singles_distribution(&prof)?;
    println!("\ncluster n = 12, P(j):");
    for (j, p) in pj.probs().iter().enumerate() {
        println!("  j = {j:>2}  {p:.5}");
    }
    let back = avpur_from_pj(&pj)?;
    let err = back.values().iter().zip(prof.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("avpur recovered from P(j), max error {err:.1e}");

    let marginal = count_minus_signs(&pattern_distribution(&make_phi_state(6, 1.0)?)?)?;
    let shown: Vec<String> = marginal.probs().iter().map(|p| format!("{:.5}", p.abs())).collect();
    println!("\nφ = 1, n = 6: P(j) from pattern marginal = [{}]", shown.join(", "));
    Ok(())
}
