use std::collections::BTreeSet;

use approx::assert_abs_diff_eq;
use polarcov::oracle::{enumerate_induced, exact_metrics, oracle_conditional_entropies, OracleConfig, OracleScheme, ORACLE_BUDGET};
use polarcov::polarize::exact_profile;
use polarcov::prob::{JointPmf, Pmf};
use polarcov::schemes::empirical::empirical_spec;
use polarcov::schemes::resolvability::resolvability_spec;
use polarcov::schemes::strong::{markov_joint, strong_specs};
use polarcov::schemes::{EmpiricalSetup, ResolvabilitySetup, StrongSetup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_binary_pair(rng: &mut ChaCha8Rng) -> JointPmf {
    let w: Vec<f64> = (0..4).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    JointPmf::new(vec![2, 2], w.iter().map(|v| v / s).collect()).unwrap()
}

#[test]
fn profiles_match_oracle_entropies() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let j = random_binary_pair(&mut rng);
        let spec = empirical_spec(j.clone()).unwrap();
        for n in 0..=3 {
            let p = exact_profile(&spec, n).unwrap();
            let h = oracle_conditional_entropies(&j, 1, &[], n, ORACLE_BUDGET).unwrap();
            let hc = oracle_conditional_entropies(&j, 1, &[0], n, ORACLE_BUDGET).unwrap();
            for i in 0..(1 << n) {
                assert_abs_diff_eq!(p.h_unconditioned[i], h[i], epsilon = 1e-9);
                assert_abs_diff_eq!(p.conditioned("X").unwrap()[i], hc[i], epsilon = 1e-9);
            }
        }
    }
}

#[test]
fn ternary_profile_matches_oracle() {
    let j = JointPmf::new(vec![2, 3], vec![0.1, 0.25, 0.05, 0.2, 0.1, 0.3]).unwrap();
    let spec = empirical_spec(j.clone()).unwrap();
    let p = exact_profile(&spec, 2).unwrap();
    let hc = oracle_conditional_entropies(&j, 1, &[0], 2, ORACLE_BUDGET).unwrap();
    for i in 0..4 {
        assert_abs_diff_eq!(p.conditioned("X").unwrap()[i], hc[i], epsilon = 1e-9);
    }
}

#[test]
fn resolvability_divergence_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let px = Pmf::bernoulli(0.05 + 0.4 * rng.random::<f64>()).unwrap();
        let e = 0.05 + 0.4 * rng.random::<f64>();
        let j = JointPmf::from_marginal_and_channel(&px, &[vec![1.0 - e, e], vec![e, 1.0 - e]]).unwrap();
        let spec = resolvability_spec(j.clone()).unwrap();
        let profile = exact_profile(&spec, 2).unwrap();
        let setup = ResolvabilitySetup::new(spec, profile.clone(), 0.6, 0.3).unwrap();
        let v_x: BTreeSet<usize> = setup.sets().unconditioned.very_high.clone();
        let scheme = OracleScheme::Resolvability {
            joint: j.clone(),
            recycled: setup.recycled_set().clone(),
            fresh: setup.fresh_set().clone(),
            refresh_recycled: false,
        };
        let law = enumerate_induced(&OracleConfig::new(scheme, 2, 1)).unwrap();
        let px_block = law.marginal(&["X1"]).unwrap();
        let target = polarcov::oracle::iid_block_law(&j.marginal(&[0]).unwrap(), 4).unwrap();
        let d = polarcov::prob::kl_slices(target.probs(), px_block.probs());
        let formula: f64 = v_x.iter().map(|&i| 1.0 - profile.h_unconditioned[i]).sum();
        assert_abs_diff_eq!(d, formula, epsilon = 1e-9);
    }
}

#[test]
fn empirical_divergence_identity() {
    let j = JointPmf::dsbs(0.11).unwrap();
    let spec = empirical_spec(j.clone()).unwrap();
    let profile = exact_profile(&spec, 2).unwrap();
    let setup = EmpiricalSetup::new(spec, profile.clone(), 0.6, 0.3).unwrap();
    let scheme = OracleScheme::Empirical {
        joint: j.clone(),
        common: setup.common_set().clone(),
        message: setup.message_set().clone(),
        deterministic_low: false,
    };
    let law = enumerate_induced(&OracleConfig::new(scheme, 2, 1)).unwrap();
    let m = exact_metrics(&law, &j).unwrap();
    let hc = profile.conditioned("X").unwrap();
    let h = &profile.h_unconditioned;
    let formula: f64 = setup.common_set().iter().map(|&i| 1.0 - hc[i]).sum::<f64>()
        + setup.low_set().iter().map(|&i| h[i] - hc[i]).sum::<f64>();
    assert_abs_diff_eq!(m.kl_target_induced, formula, epsilon = 1e-9);
}

#[test]
fn strong_beats_uniform_baseline() {
    let fx = [0.9, 0.7, 0.5, 0.3, 0.1];
    let fy = [0.85, 0.75, 0.5, 0.2, 0.1];
    let xv: Vec<Vec<f64>> = (0..2)
        .map(|x| fx.iter().map(|&f| 0.2 * if x == 0 { f } else { 1.0 - f }).collect())
        .collect();
    let yv: Vec<Vec<f64>> = fy.iter().map(|&f| vec![f, 1.0 - f]).collect();
    let joint = markov_joint(&xv, &yv).unwrap();
    let (vs, ys) = strong_specs(joint.clone()).unwrap();
    let vp = exact_profile(&vs, 2).unwrap();
    let yp = exact_profile(&ys, 2).unwrap();
    let s = StrongSetup::new(vs, ys, vp.clone(), yp, 0.5, 0.3).unwrap();
    let p = s.partition();
    let scheme = OracleScheme::Strong {
        joint: joint.clone(),
        f1: p.f1.clone(),
        f2: p.f2.clone(),
        f3: p.f3.clone(),
        f4: p.f4.clone(),
        local: s.local_set().clone(),
    };
    let law = enumerate_induced(&OracleConfig::new(scheme, 2, 1)).unwrap();
    let all: BTreeSet<usize> = (0..4).collect();
    let baseline = OracleScheme::Strong {
        joint: joint.clone(),
        f1: BTreeSet::new(),
        f2: BTreeSet::new(),
        f3: all.clone(),
        f4: BTreeSet::new(),
        local: all,
    };
    let lb = enumerate_induced(&OracleConfig::new(baseline, 2, 1)).unwrap();
    let xy = law.marginal(&["X1", "Y1"]).unwrap();
    let xyb = lb.marginal(&["X1", "Y1"]).unwrap();
    let target = polarcov::oracle::iid_block_law(&joint.marginal(&[0, 2]).unwrap(), 4).unwrap();
    let v = polarcov::prob::l1_slices(xy.probs(), target.probs());
    let vb = polarcov::prob::l1_slices(xyb.probs(), target.probs());
    assert!(v < vb);
}
