//! Two-site Bose-Hubbard beam splitter: bunching, its failure probability,
//! and the loss stage that removes doubly occupied sites.
//!
//! cargo run --example bose_hubbard_physics

use std::f64::consts::PI;

use latticeprobe::bham::{
    antisymmetric_pair, bunching_failure_numeric, ideal_bs_map, loss_stage, optimal_bs_time, qbs_approx, qbs_exact,
    PhysicalParams, SymmetricPair,
};

fn main() -> latticeprobe::Result<()> {
    let out = ideal_bs_map(&antisymmetric_pair(), 1.0, PI / 4.0)?;
    println!("antisymmetric pair after the beam splitter: P(one atom per row) = {:.6}", out.singles_probability());
    for pair in SymmetricPair::ALL {
        let out = ideal_bs_map(&pair.state(), 1.0, PI / 4.0)?;
        println!("{pair:?}: P(both atoms in one row) = {:.6}", out.doubles_probability());
    }

    println!("\n   U/J    t_bs     q_bs exact   numeric      approx");
    for u in [0.0, 0.1, 0.2, 0.5, 1.0, 4.0] {
        let t = optimal_bs_time(1.0, u)?;
        println!(
            "{u:>6.2}  {t:.4}  {:.6e}  {:.6e}  {:.6e}",
            qbs_exact(1.0, u, t)?,
            bunching_failure_numeric(SymmetricPair::Ab, 1.0, u, t)?,
            qbs_approx(1.0, 0.0, u)?
        );
    }

    let loss = loss_stage(1.3, 500.0)?;
    println!("\nloss stage (τ_d = 1.3 ms, τ_s = 500 ms): t_l = {:.2} ms, q_l = {:.4}, p_l = {:.4}", loss.t_l, loss.q_l, loss.p_l);

    let summary = PhysicalParams::new(1.0, 0.05, 0.2, 1.3, 500.0)?.summary()?;
    println!("error budget: {}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
