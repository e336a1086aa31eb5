//! Conditional entropy profiles and the index sets built from them.
//!
//! Polarizes `Y` of a doubly symmetric binary source with `X` as side
//! information, exactly at small N and by Monte Carlo at larger N.

use polarcov::polarize::{exact_profile, index_sets, mc_profile};
use polarcov::prob::JointPmf;
use polarcov::schemes::empirical::empirical_spec;

fn main() -> polarcov::Result<()> {
    let joint = JointPmf::dsbs(0.11)?;
    let spec = empirical_spec(joint.clone())?;

    let p = exact_profile(&spec, 3)?;
    println!("N = 8, exact");
    println!("  H(U_j | U^<j>)      {:.4?}", p.h_unconditioned);
    println!("  H(U_j | U^<j>, X)   {:.4?}", p.conditioned("X")?);
    let total: f64 = p.conditioned("X")?.iter().sum();
    println!("  sum = {total:.6}, N H(Y|X) = {:.6}", 8.0 * joint.conditional_entropy(&[1], &[0])?);

    let sets = index_sets(&p, 0.1, 0.1)?;
    println!("  V_Y|X = {:?}", sets.conditioned("X")?.very_high);
    println!("  H_Y   = {:?}", sets.unconditioned.high);

    for n in [6u32, 8, 10] {
        let p = mc_profile(&spec, n, 20_000, 1)?;
        let sets = index_sets(&p, 0.1, 0.1)?;
        let len = p.block_len() as f64;
        let se = p.std_errors.as_ref().map(|e| e.total_conditioned["X"]).unwrap_or(0.0);
        println!(
            "N = {:5}  |V_Y|X|/N = {:.3}  (H(Y|X) = {:.3}, total SE {se:.3})",
            p.block_len(),
            sets.conditioned("X")?.very_high.len() as f64 / len,
            joint.conditional_entropy(&[1], &[0])?,
        );
    }
    Ok(())
}
