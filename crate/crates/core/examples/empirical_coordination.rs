//! Empirical coordination of a doubly symmetric binary source.
//!
//! Node 1 sees x and sends a message plus the trace of its low-entropy draws;
//! node 2 rebuilds y exactly. The joint type of `(x, y)` approaches `q_XY`.

use polarcov::polarize::mc_profile;
use polarcov::prob::JointPmf;
use polarcov::schemes::empirical::empirical_spec;
use polarcov::schemes::rates::{rate_report, COMMON_RANDOMNESS, MESSAGE};
use polarcov::schemes::{empirical_decode, empirical_encode, empirical_run, EmpiricalSetup, Scheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polarcov::Result<()> {
    let joint = JointPmf::dsbs(0.11)?;
    let spec = empirical_spec(joint.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);

    let setup = EmpiricalSetup::new(spec.clone(), mc_profile(&spec, 6, 20_000, 1)?, 0.1, 0.1)?;
    let x = spec.sample_letters(64, &mut rng).swap_remove(0);
    let common = vec![0; setup.common_set().len()];
    let enc = empirical_encode(&setup, &x, &common, &mut rng)?;
    let y = empirical_decode(&setup, &enc.message, &common, &enc.trace)?;
    println!("message {} symbols, trace {} symbols, decoded = encoded: {}", enc.message.len(), enc.trace.len(), y == enc.y);

    for n in [4u32, 6, 8, 10] {
        let setup = EmpiricalSetup::new(spec.clone(), mc_profile(&spec, n, 20_000, 1)?, 0.1, 0.1)?;
        let t = empirical_run(&setup, 4, &mut rng)?;
        let v = t.joint_type(2, 2)?.distance_to(&joint)?;
        let r = rate_report(&Scheme::Empirical(setup), 4)?;
        println!(
            "N = {:5}: V(q, T) = {v:.4}, message rate {:.3}, common {:.3}",
            1 << n,
            r.finite(MESSAGE),
            r.finite(COMMON_RANDOMNESS)
        );
    }
    Ok(())
}
