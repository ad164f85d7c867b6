//! Reduced purities of the standard state families and the inequality verdicts
//! they produce.
//!
//! cargo run --example purity_inequalities

use std::f64::consts::PI;

use latticeprobe::purity::{
    check_subset_inequalities, purity_profile, subset_purities, werner_detection_threshold, SubsetMask,
    DEFAULT_TOLERANCE,
};
use latticeprobe::qstate::{apply_dephasing, make_classical_correlated, make_ghz, make_phi_state, make_werner};

fn main() -> latticeprobe::Result<()> {
    let n = 8;
    let states = [
        ("ghz", make_ghz(n)?),
        ("cluster", make_phi_state(n, PI)?),
        ("cluster, d = 0.6", apply_dephasing(&make_phi_state(n, PI)?, 0.6)?),
        ("werner, d = 0.5", make_werner(n, 0.5)?),
        ("classical", make_classical_correlated(n)?),
    ];
    for (name, state) in &states {
        let prof = purity_profile(state)?;
        let verdict = check_subset_inequalities(&prof, DEFAULT_TOLERANCE);
        let values: Vec<String> = prof.values().iter().map(|v| format!("{v:.3}")).collect();
        println!("{name:>18}: avpur = [{}]", values.join(", "));
        println!("{:>18}  entangled: {} (margin {:.3})", "", verdict.violated, verdict.margin);
    }

    // subset-resolved check finds violations the averages can hide
    let cluster = make_phi_state(6, 2.0)?;
    let map = subset_purities(&cluster)?;
    let verdict = check_subset_inequalities(&map, DEFAULT_TOLERANCE);
    println!("\nφ = 2 chain, n = 6, subset verdict: {:?}", verdict.witness);
    let b = SubsetMask::from_columns(6, &[2, 3])?;
    println!("pur({{2,3}}) = {:.4}", map.get(b));

    for n in 2..=6 {
        println!("Werner detection threshold, n = {n}: d* = {:.4}", werner_detection_threshold(n)?);
    }
    Ok(())
}
