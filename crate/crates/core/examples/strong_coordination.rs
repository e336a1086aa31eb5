//! Strong coordination through an auxiliary `V` with `X - V - Y`.
//!
//! Node 1 draws v from x using shared randomness, sends `v[F4]` and the trace
//! on `F1`; node 2 rebuilds v and simulates `q_{Y|V}` with local randomness.
//! At N = 4 the induced law is enumerated and compared to `q_XY^{⊗N}`.

use polarcov::oracle::{enumerate_induced, iid_block_law, OracleConfig, OracleScheme};
use polarcov::polarize::exact_profile;
use polarcov::prob::{kl_slices, l1_slices};
use polarcov::schemes::rates::{rate_report, COMMON_RANDOMNESS, COMMUNICATION, COMMUNICATION_FORMULA, LOCAL};
use polarcov::schemes::strong::{markov_joint, strong_specs};
use polarcov::schemes::{strong_run, Scheme, StrongSetup};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> polarcov::Result<()> {
    let fx = [0.9, 0.7, 0.5, 0.3, 0.1];
    let fy = [0.85, 0.75, 0.5, 0.2, 0.1];
    let xv: Vec<Vec<f64>> = (0..2)
        .map(|x| fx.iter().map(|&f| 0.2 * if x == 0 { f } else { 1.0 - f }).collect())
        .collect();
    let yv: Vec<Vec<f64>> = fy.iter().map(|&f| vec![f, 1.0 - f]).collect();
    let joint = markov_joint(&xv, &yv)?;

    let (vs, ys) = strong_specs(joint.clone())?;
    let (vp, yp) = (exact_profile(&vs, 2)?, exact_profile(&ys, 2)?);
    let setup = StrongSetup::new(vs, ys, vp, yp, 0.5, 0.3)?;
    let p = setup.partition().clone();
    println!("F1 {:?} F2 {:?} F3 {:?} F4 {:?} local {:?}", p.f1, p.f2, p.f3, p.f4, setup.local_set());

    let t = strong_run(&setup, 3, &mut ChaCha8Rng::seed_from_u64(5))?;
    for b in &t.blocks {
        println!("x {:?} -> v {:?} -> y {:?}", b.x, b.v.as_deref().unwrap_or(&[]), b.y);
    }

    let law = enumerate_induced(&OracleConfig::new(
        OracleScheme::Strong {
            joint: joint.clone(),
            f1: p.f1,
            f2: p.f2,
            f3: p.f3,
            f4: p.f4,
            local: setup.local_set().clone(),
        },
        2,
        1,
    ))?;
    let induced = law.marginal(&["X1", "Y1"])?;
    let target = iid_block_law(&joint.marginal(&[0, 2])?, 4)?;
    println!(
        "exact V(q, p~) = {:.4}, D(q || p~) = {:.4}",
        l1_slices(induced.probs(), target.probs()),
        kl_slices(target.probs(), induced.probs())
    );

    let r = rate_report(&Scheme::Strong(setup), 3)?;
    for name in [COMMUNICATION_FORMULA, COMMUNICATION, COMMON_RANDOMNESS, LOCAL] {
        let row = r.row(name).expect("reported");
        println!("{name:22} {:.3} (target {:.3})", row.finite, row.target);
    }
    Ok(())
}
