//! Acceptance gate. Runs every criterion, prints one line each, and exits
//! non-zero if any fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use polarcov::bench::{run_experiment, ExperimentConfig};
use polarcov::field::{polar_inverse, polar_transform, SymbolVector};
use polarcov::oracle::{enumerate_induced, exact_metrics, iid_block_law, kron_matrix, OracleConfig, OracleScheme};
use polarcov::polarize::{exact_profile, index_sets, mc_profile, PolarProfile, SideSequence, SourceSpec};
use polarcov::prob::{divergence_bounds, kl_slices, JointPmf, Pmf, SQRT_2LN2};
use polarcov::schemes::empirical::{empirical_decode, empirical_encode, empirical_spec};
use polarcov::schemes::rates::{self, rate_report};
use polarcov::schemes::resolvability::resolvability_spec;
use polarcov::schemes::strong::{markov_joint, strong_decode, strong_encode, strong_specs, AXIS_X};
use polarcov::schemes::{EmpiricalSetup, ResolvabilitySetup, Scheme, StrongSetup};
use polarcov::scsample::{sc_sample, FrozenPlan, Rule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, DiscreteCDF, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Outcome);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn random_joint(rng: &mut ChaCha8Rng, shape: &[usize]) -> JointPmf {
    let w: Vec<f64> = (0..shape.iter().product()).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = w.iter().sum();
    JointPmf::new(shape.to_vec(), w.iter().map(|v| v / s).collect()).unwrap()
}

fn random_pmf(rng: &mut ChaCha8Rng, q: usize) -> Pmf {
    let w: Vec<f64> = (0..q).map(|_| 0.01 + rng.random::<f64>()).collect();
    Pmf::from_weights(&w).unwrap()
}

/// Big-endian index of a block, matching the oracle's sequence axes.
fn seq_index(v: &[u32], q: usize) -> usize {
    v.iter().fold(0, |acc, &s| acc * q + s as usize)
}

fn uniform(q: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    (0..len).map(|_| rng.random_range(0..q as u32)).collect()
}

fn toy_strong_joint() -> JointPmf {
    let fx = [0.9, 0.7, 0.5, 0.3, 0.1];
    let fy = [0.85, 0.75, 0.5, 0.2, 0.1];
    let xv: Vec<Vec<f64>> = (0..2)
        .map(|x| fx.iter().map(|&f| 0.2 * if x == 0 { f } else { 1.0 - f }).collect())
        .collect();
    let yv: Vec<Vec<f64>> = fy.iter().map(|&f| vec![f, 1.0 - f]).collect();
    markov_joint(&xv, &yv).unwrap()
}

fn strong_setup(joint: &JointPmf, n: u32, dv: f64, dh: f64, mc: Option<u64>) -> Result<StrongSetup, String> {
    let (vs, ys) = strong_specs(joint.clone()).map_err(e)?;
    let (vp, yp) = match mc {
        None => (exact_profile(&vs, n).map_err(e)?, exact_profile(&ys, n).map_err(e)?),
        Some(s) => (mc_profile(&vs, n, s, 1).map_err(e)?, mc_profile(&ys, n, s, 2).map_err(e)?),
    };
    StrongSetup::new(vs, ys, vp, yp, dv, dh).map_err(e)
}

/// Pearson statistic with cells of expected count below 5 pooled into one.
fn chi_square_p(counts: &[u64], probs: &[f64]) -> Result<(f64, usize), String> {
    let total: u64 = counts.iter().sum();
    let n = total as f64;
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&c, &p) in counts.iter().zip(probs) {
        let expected = n * p;
        if p == 0.0 && c > 0 {
            return Err(format!("{c} draws landed on a zero-probability cell"));
        }
        if expected < 5.0 {
            pooled_obs += c as f64;
            pooled_exp += expected;
        } else {
            stat += (c as f64 - expected).powi(2) / expected;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    let df = (cells - 1) as f64;
    Ok((1.0 - ChiSquared::new(df).map_err(e)?.cdf(stat), cells))
}

fn transform_roundtrip() -> Outcome {
    for q in [2u32, 3] {
        for n in [1u32, 2, 3] {
            let len = 1usize << n;
            let g = kron_matrix(q, n);
            for idx in 0..(q as usize).pow(len as u32) {
                let x: Vec<u32> = (0..len).map(|i| ((idx / (q as usize).pow(i as u32)) % q as usize) as u32).collect();
                let xv = SymbolVector::from_raw(q, x.clone()).map_err(e)?;
                let u = polar_transform(&xv);
                let by_matrix: Vec<u32> = (0..len)
                    .map(|j| (0..len).map(|i| x[i] * g[i][j]).sum::<u32>() % q)
                    .collect();
                ensure(u.as_slice() == by_matrix, format!("q={q} N={len}: transform differs from x G_n"))?;
                ensure(polar_inverse(&u) == xv, format!("q={q} N={len}: roundtrip failed"))?;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in [2u32, 3, 5] {
        for _ in 0..1000 {
            let x = SymbolVector::from_raw(q, uniform(q as usize, 1024, &mut rng)).map_err(e)?;
            ensure(polar_inverse(&polar_transform(&x)) == x, format!("q={q} N=1024: roundtrip failed"))?;
        }
    }
    Ok("exhaustive q in {2,3}, N in {2,4,8}; 3000 random vectors at N=1024; 0 failures".into())
}

fn profile_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let shapes = [[2, 2], [2, 3], [3, 2]];
    let mut worst: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut mc_checks = 0;
    let mut exceed = Vec::new();
    for t in 0..10 {
        let j = random_joint(&mut rng, &shapes[t % 3]);
        let h = j.entropy_of(&[1]).map_err(e)?;
        let hc = j.conditional_entropy(&[1], &[0]).map_err(e)?;
        let spec = empirical_spec(j).map_err(e)?;
        for n in [1u32, 2, 3] {
            let p = exact_profile(&spec, n).map_err(e)?;
            let len = (1usize << n) as f64;
            let s: f64 = p.h_unconditioned.iter().sum();
            let sc: f64 = p.conditioned("X").map_err(e)?.iter().sum();
            worst = worst.max((s - len * h).abs()).max((sc - len * hc).abs());
            ensure(worst <= 1e-9, format!("joint {t}, N={len}: conservation off by {worst:e}"))?;
            if n == 3 {
                let m = mc_profile(&spec, n, 100_000, 100 + t as u64).map_err(e)?;
                let se = m.std_errors.as_ref().ok_or("mc profile without standard errors")?;
                let pairs = [
                    (&p.h_unconditioned[..], &m.h_unconditioned[..], &se.h_unconditioned[..]),
                    (p.conditioned("X").map_err(e)?, m.conditioned("X").map_err(e)?, &se.h_conditioned["X"][..]),
                ];
                for (ex, est, err) in pairs {
                    for i in 0..ex.len() {
                        let d = (ex[i] - est[i]).abs();
                        // Differences at rounding level carry no sampling error.
                        if d <= 1e-9 {
                            continue;
                        }
                        mc_checks += 1;
                        worst_z = worst_z.max(d / err[i]);
                        if d > 3.0 * err[i] {
                            exceed.push(format!("joint {t} index {i}: {:.2} SE", d / err[i]));
                        }
                    }
                }
            }
        }
    }
    // Each comparison leaves 3 SE with probability 0.0027 by chance alone.
    let p3 = 2.0 * (1.0 - Normal::standard().cdf(3.0));
    let allowed = Binomial::new(p3, mc_checks as u64).map_err(e)?.inverse_cdf(0.999) as usize;
    ensure(
        exceed.len() <= allowed,
        format!("{} of {mc_checks} indices beyond 3 SE (chance allows {allowed}): {exceed:?}", exceed.len()),
    )?;
    Ok(format!(
        "10 joints, max conservation error {worst:.1e}; {} of {mc_checks} mc indices beyond 3 SE (allowed {allowed}, max {worst_z:.2} SE) {exceed:?}",
        exceed.len()
    ))
}

fn divergence_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut sizes = Vec::new();
    for t in 0..5 {
        let j = random_joint(&mut rng, &[2, 2]);
        let spec = resolvability_spec(j.clone()).map_err(e)?;
        let profile = exact_profile(&spec, 2).map_err(e)?;
        let setup = ResolvabilitySetup::new(spec, profile.clone(), 0.6, 0.3).map_err(e)?;
        let v_x = setup.sets().unconditioned.very_high.clone();
        let law = enumerate_induced(&OracleConfig::new(
            OracleScheme::Resolvability {
                joint: j.clone(),
                recycled: setup.recycled_set().clone(),
                fresh: setup.fresh_set().clone(),
                refresh_recycled: false,
            },
            2,
            1,
        ))
        .map_err(e)?;
        let target = iid_block_law(&j.marginal(&[0]).map_err(e)?, 4).map_err(e)?;
        let d = kl_slices(target.probs(), law.marginal(&["X1"]).map_err(e)?.probs());
        let terms: Vec<f64> = v_x.iter().map(|&i| 1.0 - profile.h_unconditioned[i]).collect();
        let formula: f64 = terms.iter().sum();
        let delta_eff = terms.iter().copied().fold(0.0, f64::max);
        worst = worst.max((d - formula).abs());
        ensure((d - formula).abs() <= 1e-9, format!("target {t}: D = {d}, formula = {formula}"))?;
        ensure(
            d <= v_x.len() as f64 * delta_eff + 1e-12,
            format!("target {t}: D = {d} above |V_X| delta_eff"),
        )?;
        sizes.push(v_x.len());
    }
    Ok(format!("5 binary targets, |V_X| = {sizes:?}, max |D - formula| = {worst:.1e}"))
}

fn sampler_law() -> Outcome {
    const DRAWS: usize = 100_000;
    let mut notes = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // All SampleTrue: (X, Y) must follow the iid source.
    let j = JointPmf::new(vec![2, 2], vec![0.3, 0.15, 0.1, 0.45]).map_err(e)?;
    let spec = empirical_spec(j.clone()).map_err(e)?;
    let plan = FrozenPlan::new(spec.modulus(), 4, Rule::SampleTrue).map_err(e)?;
    let all: BTreeSet<usize> = (0..4).collect();
    let law = enumerate_induced(&OracleConfig::new(
        OracleScheme::Empirical {
            joint: j.clone(),
            common: BTreeSet::new(),
            message: all,
            deterministic_low: false,
        },
        2,
        1,
    ))
    .map_err(e)?;
    let probs = law.marginal(&["X1", "Y1"]).map_err(e)?.probs().to_vec();
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..DRAWS {
        let x = spec.sample_letters(4, &mut rng).swap_remove(0);
        let path = sc_sample(&spec, Some(&SideSequence::single(0, x.clone())), &plan, &mut rng).map_err(e)?;
        counts[seq_index(&x, 2) * 16 + seq_index(path.x.as_slice(), 2)] += 1;
    }
    let (p, cells) = chi_square_p(&counts, &probs)?;
    ensure(p > 0.001, format!("all-SampleTrue: p = {p:.2e}"))?;
    notes.push(format!("all-true p={p:.3} ({cells} cells)"));

    // Resolvability encoder plan.
    let j = JointPmf::new(vec![2, 2], vec![0.2, 0.05, 0.15, 0.6]).map_err(e)?;
    let spec = resolvability_spec(j.clone()).map_err(e)?;
    let setup = ResolvabilitySetup::new(spec.clone(), exact_profile(&spec, 2).map_err(e)?, 0.6, 0.3).map_err(e)?;
    let law = enumerate_induced(&OracleConfig::new(
        OracleScheme::Resolvability {
            joint: j,
            recycled: setup.recycled_set().clone(),
            fresh: setup.fresh_set().clone(),
            refresh_recycled: false,
        },
        2,
        1,
    ))
    .map_err(e)?;
    let probs = law.marginal(&["X1"]).map_err(e)?.probs().to_vec();
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..DRAWS {
        let rec = uniform(2, setup.recycled_set().len(), &mut rng);
        let fresh = uniform(2, setup.fresh_set().len(), &mut rng);
        let plan = setup.plan(&rec, &fresh).map_err(e)?;
        let path = sc_sample(&spec, None, &plan, &mut rng).map_err(e)?;
        counts[seq_index(path.x.as_slice(), 2)] += 1;
    }
    let (p, cells) = chi_square_p(&counts, &probs)?;
    ensure(p > 0.001, format!("resolvability plan: p = {p:.2e}"))?;
    notes.push(format!(
        "resolvability p={p:.3} ({cells} cells, |V_X|Y|={}, fresh={})",
        setup.recycled_set().len(),
        setup.fresh_set().len()
    ));

    // Strong coordination encoder plan on (X, V).
    let joint = toy_strong_joint();
    let s = strong_setup(&joint, 2, 0.5, 0.3, None)?;
    let part = s.partition().clone();
    let law = enumerate_induced(&OracleConfig::new(
        OracleScheme::Strong {
            joint,
            f1: part.f1.clone(),
            f2: part.f2.clone(),
            f3: part.f3.clone(),
            f4: part.f4.clone(),
            local: s.local_set().clone(),
        },
        2,
        1,
    ))
    .map_err(e)?;
    let probs = law.marginal(&["X1", "V1"]).map_err(e)?.probs().to_vec();
    let mut counts = vec![0u64; probs.len()];
    let vspec = s.v_spec();
    for _ in 0..DRAWS {
        let mut plan = FrozenPlan::new(vspec.modulus(), 4, Rule::SampleNoSide).map_err(e)?;
        plan.freeze(&part.f2, &uniform(5, part.f2.len(), &mut rng)).map_err(e)?;
        plan.freeze(&part.f3, &uniform(5, part.f3.len(), &mut rng)).map_err(e)?;
        plan.assign(&part.f4, Rule::SampleTrue).map_err(e)?;
        let x = vspec.sample_letters(4, &mut rng).swap_remove(AXIS_X);
        let path = sc_sample(vspec, Some(&SideSequence::single(AXIS_X, x.clone())), &plan, &mut rng).map_err(e)?;
        counts[seq_index(&x, 2) * 625 + seq_index(path.x.as_slice(), 5)] += 1;
    }
    let (p, cells) = chi_square_p(&counts, &probs)?;
    ensure(p > 0.001, format!("strong plan: p = {p:.2e}"))?;
    notes.push(format!("strong p={p:.3} ({cells} cells, partition {:?})", part.sizes()));
    Ok(notes.join("; "))
}

fn decoder_determinism() -> Outcome {
    let mut checked = 0;
    for n in [2u32, 4] {
        let len = 1usize << n;
        let spec = empirical_spec(JointPmf::dsbs(0.11).map_err(e)?).map_err(e)?;
        let profile = profile_for(&spec, n)?;
        let setup = EmpiricalSetup::new(spec.clone(), profile, 0.1, 0.1).map_err(e)?;
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let common = uniform(2, setup.common_set().len(), &mut rng);
            let x = spec.sample_letters(len, &mut rng).swap_remove(0);
            let enc = empirical_encode(&setup, &x, &common, &mut rng).map_err(e)?;
            let y = empirical_decode(&setup, &enc.message, &common, &enc.trace).map_err(e)?;
            ensure(y == enc.y, format!("empirical N={len} seed {seed}: decoder mismatch"))?;
            checked += 1;
        }
        let s = strong_setup(&toy_strong_joint(), n, 0.5, 0.3, (n > 2).then_some(20_000))?;
        let part = s.partition().clone();
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rec = uniform(5, part.f2.len(), &mut rng);
            let fresh = uniform(5, part.f3.len(), &mut rng);
            let x = s.v_spec().sample_letters(len, &mut rng).swap_remove(AXIS_X);
            let enc = strong_encode(&s, &x, &rec, &fresh, &mut rng).map_err(e)?;
            let dec = strong_decode(&s, &enc.message, &rec, &fresh, &enc.trace, &mut rng).map_err(e)?;
            ensure(dec.v == enc.v, format!("strong N={len} seed {seed}: decoder mismatch"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} encode/decode pairs at N in {{4, 16}}, 0 mismatches"))
}

fn profile_for(spec: &SourceSpec, n: u32) -> Result<PolarProfile, String> {
    match exact_profile(spec, n) {
        Ok(p) => Ok(p),
        Err(polarcov::Error::Budget { .. }) => mc_profile(spec, n, 20_000, 9).map_err(e),
        Err(err) => Err(e(err)),
    }
}

fn bound_audit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut applied = std::collections::BTreeMap::<String, usize>::new();
    for t in 0..1000 {
        let q = 2 + t % 5;
        let p = random_pmf(&mut rng, q);
        // Every other pair is a small perturbation so the entropy bound applies.
        let qd = if t % 2 == 0 {
            random_pmf(&mut rng, q)
        } else {
            let w: Vec<f64> = p.probs().iter().map(|&v| v * (1.0 + 0.2 * (rng.random::<f64>() - 0.5))).collect();
            Pmf::from_weights(&w).map_err(e)?
        };
        let r = random_pmf(&mut rng, q);
        let rep = divergence_bounds(&p, &qd, Some(&r), None).map_err(e)?;
        for row in &rep.rows {
            ensure(row.holds != Some(false), format!("pair {t}: {} fails ({} > {})", row.name, row.lhs, row.rhs))?;
            if row.holds.is_some() {
                *applied.entry(row.name.clone()).or_default() += 1;
            }
        }
    }
    for t in 0..200 {
        let shape: Vec<usize> = (0..2 + t % 2).map(|_| rng.random_range(2..4)).collect();
        let j = random_joint(&mut rng, &shape);
        let p = j.marginal_pmf(0).map_err(e)?;
        let rep = divergence_bounds(&p, &p, None, Some(&j)).map_err(e)?;
        let row = rep.row(polarcov::prob::INDEPENDENCE).ok_or("independence row missing")?;
        ensure(row.holds == Some(true), format!("joint {t}: independence identity {} vs {}", row.lhs, row.rhs))?;
        *applied.entry(row.name.clone()).or_default() += 1;
    }
    for name in [
        polarcov::prob::SYMMETRY,
        polarcov::prob::TRIANGLE,
        polarcov::prob::ENTROPY_DIFFERENCE,
        polarcov::prob::INDEPENDENCE,
    ] {
        ensure(applied.get(name).copied().unwrap_or(0) > 0, format!("{name} was never applicable"))?;
    }
    Ok(format!("checked rows {applied:?}"))
}

fn variational_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut joints = vec![JointPmf::dsbs(0.11).map_err(e)?, JointPmf::dsbs(0.3).map_err(e)?];
    joints.extend((0..3).map(|_| random_joint(&mut rng, &[2, 2])));
    joints.push(random_joint(&mut rng, &[2, 3]));
    let mut notes = Vec::new();
    for (t, j) in joints.into_iter().enumerate() {
        let spec = empirical_spec(j.clone()).map_err(e)?;
        let profile = exact_profile(&spec, 2).map_err(e)?;
        let setup = EmpiricalSetup::new(spec, profile, 0.4, 0.4).map_err(e)?;
        let law = enumerate_induced(&OracleConfig::new(
            OracleScheme::Empirical {
                joint: j.clone(),
                common: setup.common_set().clone(),
                message: setup.message_set().clone(),
                deterministic_low: false,
            },
            2,
            1,
        ))
        .map_err(e)?;
        let m = exact_metrics(&law, &j).map_err(e)?;
        let scheme = Scheme::Empirical(setup);
        let terms = scheme.divergence_terms().map_err(e)?.ok_or("no divergence terms")?;
        let delta_eff = terms.iter().map(|t| t.1).fold(0.0, f64::max);
        let log_rhs = (2.0f64).sqrt() * (4.0 * delta_eff).sqrt();
        let ln_rhs = SQRT_2LN2 * (4.0 * delta_eff).sqrt();
        ensure(
            m.vdist <= log_rhs + 1e-12,
            format!("joint {t}: V = {} > sqrt(2) sqrt(N delta_eff) = {log_rhs}", m.vdist),
        )?;
        notes.push(format!("V={:.4}<= {:.4} (ln form {:.4}: {})", m.vdist, log_rhs, ln_rhs, m.vdist <= ln_rhs + 1e-12));
    }
    Ok(notes.join("; "))
}

fn experiment_config(json: &str, out: &std::path::Path) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::from_json(json).map_err(e)?;
    cfg.output_dir = out.to_path_buf();
    Ok(cfg)
}

fn hoeffding_audit() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let cfg = experiment_config(
        r#"{"scheme": "empirical", "target": [[0.445, 0.055], [0.055, 0.445]],
            "n": [6, 8], "k": [4], "trials": 200, "seed": 8,
            "thresholds": {"preset": "explicit", "delta_v": 0.1, "delta_h": 0.1},
            "epsilons": [0.2], "oracle": false}"#,
        dir.path(),
    )?;
    let out = run_experiment(&cfg).map_err(e)?;
    let g64 = out.summary.groups.iter().find(|g| g.block_len == 64).ok_or("no N=64 group")?;
    let g256 = out.summary.groups.iter().find(|g| g.block_len == 256).ok_or("no N=256 group")?;
    let row = &g256.exceedance[0];
    let budget = 2.0 * 4.0 * (-256.0f64 * 0.04 / 32.0).exp();
    ensure((row.budget - budget).abs() < 1e-12, format!("budget {} != {budget}", row.budget))?;
    ensure(
        row.observed <= row.budget + row.slack,
        format!("P[V > 0.2] = {} above {} + {}", row.observed, row.budget, row.slack),
    )?;
    let (m64, m256) = (g64.histogram_dist.mean, g256.histogram_dist.mean);
    ensure(m256 < m64, format!("mean V at N=256 ({m256}) not below N=64 ({m64})"))?;
    Ok(format!(
        "P[V>0.2]={:.3} <= {:.3}+{:.3}; mean V {m64:.4} (N=64) > {m256:.4} (N=256)",
        row.observed, row.budget, row.slack
    ))
}

fn rate_accounting() -> Outcome {
    let mut notes = Vec::new();
    // Hand-built sets: |V_X|Y| = 2, |V_X| = 5, N = 8, k = 4.
    let spec = resolvability_spec(JointPmf::dsbs(0.2).map_err(e)?).map_err(e)?;
    let profile = exact_profile(&spec, 3).map_err(e)?;
    let mut sets = index_sets(&profile, 0.3, 0.3).map_err(e)?;
    sets.unconditioned.very_high = (0..5).collect();
    sets.conditioned.get_mut("Y").ok_or("no Y conditioning")?.very_high = (3..5).collect();
    let setup = ResolvabilitySetup::from_sets(spec, profile, sets).map_err(e)?;
    let r = rate_report(&Scheme::Resolvability(setup), 4).map_err(e)?.finite(rates::RANDOMNESS);
    ensure(r == 0.4375, format!("randomness rate {r} != 0.4375"))?;
    notes.push("worked example 0.4375".to_string());

    // Reported rates against set cardinalities on realized sets.
    let joint = toy_strong_joint();
    for n in [2u32, 3] {
        let nf = (1usize << n) as f64;
        let k = 3usize;
        let kf = k as f64;
        let spec = resolvability_spec(JointPmf::dsbs(0.11).map_err(e)?).map_err(e)?;
        let s = ResolvabilitySetup::new(spec.clone(), exact_profile(&spec, n).map_err(e)?, 0.3, 0.3).map_err(e)?;
        let want = (s.recycled_set().len() as f64 + kf * s.fresh_set().len() as f64) / (kf * nf);
        let got = rate_report(&Scheme::Resolvability(s), k).map_err(e)?.finite(rates::RANDOMNESS);
        ensure(got == want, format!("resolvability N={nf}: {got} != {want}"))?;

        let spec = empirical_spec(JointPmf::dsbs(0.11).map_err(e)?).map_err(e)?;
        let s = EmpiricalSetup::new(spec.clone(), exact_profile(&spec, n).map_err(e)?, 0.3, 0.3).map_err(e)?;
        let h_y = &s.sets().unconditioned.high;
        let v_yx = &s.sets().conditioned("X").map_err(e)?.very_high;
        let msg = h_y.difference(v_yx).count() as f64 / nf;
        let common = v_yx.len() as f64 / (kf * nf);
        let rep = rate_report(&Scheme::Empirical(s), k).map_err(e)?;
        ensure(rep.finite(rates::MESSAGE) == msg, format!("empirical message N={nf}"))?;
        ensure(rep.finite(rates::COMMON_RANDOMNESS) == common, format!("empirical common N={nf}"))?;

        let s = strong_setup(&joint, n, 0.5, 0.3, (n > 2).then_some(20_000))?;
        let sets = s.v_sets();
        let v_v = &sets.unconditioned.very_high;
        let v_vx = &sets.conditioned("X").map_err(e)?.very_high;
        let v_vxy = &sets.conditioned("X,Y").map_err(e)?.very_high;
        let comm = v_v.difference(v_vx).count() as f64 / nf;
        let common = (v_vxy.len() as f64 + kf * v_vx.difference(v_vxy).count() as f64) / (kf * nf);
        let local = s.local_set().len() as f64 / nf;
        let rep = rate_report(&Scheme::Strong(s), k).map_err(e)?;
        ensure(rep.finite(rates::COMMUNICATION_FORMULA) == comm, format!("strong communication N={nf}"))?;
        ensure(rep.finite(rates::COMMON_RANDOMNESS) == common, format!("strong common N={nf}"))?;
        ensure(rep.finite(rates::LOCAL) == local, format!("strong local N={nf}"))?;
    }
    notes.push("formulas exact at N in {4, 8}".to_string());

    // Trend under Monte Carlo profiles.
    let j = JointPmf::dsbs(0.11).map_err(e)?;
    let spec = empirical_spec(j.clone()).map_err(e)?;
    let h_y = j.entropy_of(&[1]).map_err(e)?;
    let h_yx = j.conditional_entropy(&[1], &[0]).map_err(e)?;
    let jx = JointPmf::new(vec![2, 2], vec![0.3, 0.1, 0.15, 0.45]).map_err(e)?;
    let rspec = resolvability_spec(jx.clone()).map_err(e)?;
    let h_x = jx.entropy_of(&[0]).map_err(e)?;
    let h_xy = jx.conditional_entropy(&[0], &[1]).map_err(e)?;
    let targets = [("|V_Y|X|/N", h_yx), ("|H_Y|/N", h_y), ("|V_X|/N", h_x), ("|V_X|Y|/N", h_xy)];
    let mut profiles = Vec::new();
    for n in 4..=10u32 {
        profiles.push((
            mc_profile(&spec, n, 50_000, 10 + n as u64).map_err(e)?,
            mc_profile(&rspec, n, 50_000, 20 + n as u64).map_err(e)?,
        ));
    }
    let series = |delta: f64| -> Result<Vec<Vec<f64>>, String> {
        let mut out = vec![Vec::new(); 4];
        for (n, (pe, pr)) in (4..=10u32).zip(&profiles) {
            let nf = (1usize << n) as f64;
            let s = index_sets(pe, delta, delta).map_err(e)?;
            out[0].push(s.conditioned("X").map_err(e)?.very_high.len() as f64 / nf);
            out[1].push(s.unconditioned.high.len() as f64 / nf);
            let s = index_sets(pr, delta, delta).map_err(e)?;
            out[2].push(s.unconditioned.very_high.len() as f64 / nf);
            out[3].push(s.conditioned("Y").map_err(e)?.very_high.len() as f64 / nf);
        }
        Ok(out)
    };
    let max_regression = |vals: &[f64], target: f64| {
        let gaps: Vec<f64> = vals.iter().map(|v| (v - target).abs()).collect();
        gaps.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    };
    for ((name, target), vals) in targets.iter().zip(series(0.2)?) {
        let r = max_regression(&vals, *target);
        ensure(r <= 0.02, format!("{name}: distance to {target:.4} regressed by {r:.4} ({vals:?})"))?;
        notes.push(format!("{name} {:.3}->{:.3} (target {target:.3})", vals[0], vals[vals.len() - 1]));
    }
    // Finer thresholds are reported, not gated: at N = 16 one index is 0.0625.
    let finer = series(0.1)?;
    let worst = targets
        .iter()
        .zip(&finer)
        .map(|((_, t), v)| max_regression(v, *t))
        .fold(f64::NEG_INFINITY, f64::max);
    notes.push(format!("trend gated at delta 0.2; at delta 0.1 the largest regression is {worst:.4}"));
    Ok(notes.join("; "))
}

fn inter_block_dependence() -> Outcome {
    let j = JointPmf::new(vec![2, 2], vec![0.3, 0.1, 0.15, 0.45]).map_err(e)?;
    let spec = resolvability_spec(j.clone()).map_err(e)?;
    let setup = ResolvabilitySetup::new(spec.clone(), exact_profile(&spec, 2).map_err(e)?, 0.6, 0.3).map_err(e)?;
    ensure(!setup.recycled_set().is_empty(), "no recycled positions at these thresholds")?;
    let metrics = |refresh: bool| -> Result<(f64, f64), String> {
        let law = enumerate_induced(&OracleConfig::new(
            OracleScheme::Resolvability {
                joint: j.clone(),
                recycled: setup.recycled_set().clone(),
                fresh: setup.fresh_set().clone(),
                refresh_recycled: refresh,
            },
            2,
            2,
        ))
        .map_err(e)?;
        let m = exact_metrics(&law, &j).map_err(e)?;
        Ok((m.inter_block_mi.ok_or("no inter-block MI")?, m.recycled_mi.ok_or("no recycled MI")?))
    };
    let (mi, rec) = metrics(false)?;
    ensure(mi <= rec + 1e-9, format!("I(Y1;Y2) = {mi} > I(Y2;C) = {rec}"))?;
    let (mi_r, rec_r) = metrics(true)?;
    ensure(mi_r <= rec_r + 1e-9, format!("refreshed: I(Y1;Y2) = {mi_r} > I(Y2;C) = {rec_r}"))?;
    ensure(mi_r < mi && rec_r < rec, format!("refresh did not shrink ({mi}, {rec}) -> ({mi_r}, {rec_r})"))?;
    Ok(format!(
        "|V_X|Y|={}: I(Y1;Y2)={mi:.3e} <= I(Y2;C)={rec:.3e}; refreshed {mi_r:.1e}, {rec_r:.1e}",
        setup.recycled_set().len()
    ))
}

fn reproducibility() -> Outcome {
    let json = r#"{"scheme": "strong", "target": "__T__", "n": [2, 3], "k": [2], "trials": 30, "seed": 11,
        "thresholds": {"preset": "explicit", "delta_v": 0.5, "delta_h": 0.3}}"#;
    let t = toy_strong_joint();
    let nested: Vec<Vec<Vec<f64>>> = (0..2)
        .map(|x| (0..5).map(|v| (0..2).map(|y| t.at(&[x, v, y])).collect()).collect())
        .collect();
    let json = json.replace("\"__T__\"", &serde_json::to_string(&nested).map_err(e)?);
    let mut csvs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(e)?;
        let out = run_experiment(&experiment_config(&json, dir.path())?).map_err(e)?;
        csvs.push(std::fs::read(dir.path().join(&out.summary.csv)).map_err(e)?);
    }
    ensure(csvs[0] == csvs[1], "CSV bytes differ between runs")?;
    Ok(format!("two runs, {} identical CSV bytes", csvs[0].len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("transform roundtrip", 5, transform_roundtrip),
        ("profile conservation and mc agreement", 120, profile_conservation),
        ("exact divergence identity", 60, divergence_identity),
        ("sampler law chi-square", 120, sampler_law),
        ("decoder determinism", 60, decoder_determinism),
        ("divergence bound audit", 60, bound_audit),
        ("per-block variational bound", 60, variational_bound),
        ("Hoeffding exceedance audit", 600, hoeffding_audit),
        ("rate accounting", 900, rate_accounting),
        ("inter-block dependence", 120, inter_block_dependence),
        ("reproducibility", 60, reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > Duration::from_secs(*limit) => Err(format!("{msg}; exceeded {limit} s")),
            o => o,
        };
        match outcome {
            Ok(msg) => println!("criterion {:2} PASS {name} [{:.1} s]: {msg}", i + 1, took.as_secs_f64()),
            Err(msg) => {
                failed += 1;
                println!("criterion {:2} FAIL {name} [{:.1} s]: {msg}", i + 1, took.as_secs_f64());
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
