//! Strong coordination: node 1 observes `x`, both nodes share randomness, and
//! node 2 synthesizes `y` through an auxiliary `v` so that the whole block
//! `(x, y)` is close to `q_{XY}^{⊗N}` in distribution.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::transcript::{BlockRecord, SchemeKind, Transcript};
use super::{check_k, uniform_symbols};
use crate::error::{Error, Result};
use crate::field::SymbolVector;
use crate::polarize::{index_sets, IndexSets, Partition, PolarProfile, SideSequence, SourceSpec};
use crate::prob::JointPmf;
use crate::scsample::{replay_path, sc_sample, FrozenPlan, Rule, Trace};

pub const AXIS_X: usize = 0;
pub const AXIS_V: usize = 1;
pub const AXIS_Y: usize = 2;

/// Specs for a joint over `(X, V, Y)` with `X -> V -> Y`: the first polarizes
/// `V` (side `X` and `X,Y`), the second polarizes `Y` (side `V`).
pub fn strong_specs(joint: JointPmf) -> Result<(SourceSpec, SourceSpec)> {
    if joint.rank() != 3 {
        return Err(Error::Dimension("strong coordination needs a joint over (X, V, Y)".into()));
    }
    let names = ["X", "V", "Y"];
    let v_spec = SourceSpec::new(joint.clone(), &names, AXIS_V, &[&[AXIS_X], &[AXIS_X, AXIS_Y]])?
        .with_markov(AXIS_X, AXIS_V, AXIS_Y)?;
    let y_spec = SourceSpec::new(joint, &names, AXIS_Y, &[&[AXIS_V]])?;
    Ok((v_spec, y_spec))
}

#[derive(Clone, Debug)]
pub struct StrongSetup {
    v_spec: SourceSpec,
    y_spec: SourceSpec,
    v_profile: PolarProfile,
    y_profile: PolarProfile,
    v_sets: IndexSets,
    y_sets: IndexSets,
    partition: Partition,
    local: BTreeSet<usize>,
}

impl StrongSetup {
    /// `v_profile` must condition on `X` and `X,Y`; `y_profile` on `V`.
    pub fn new(
        v_spec: SourceSpec,
        y_spec: SourceSpec,
        v_profile: PolarProfile,
        y_profile: PolarProfile,
        delta_v: f64,
        delta_h: f64,
    ) -> Result<Self> {
        if v_spec.polarized_axis() != AXIS_V || y_spec.polarized_axis() != AXIS_Y {
            return Err(Error::Config("strong specs must be built by strong_specs".into()));
        }
        if v_profile.n != y_profile.n {
            return Err(Error::Dimension("profiles use different block lengths".into()));
        }
        let v_sets = index_sets(&v_profile, delta_v, delta_h)?;
        let y_sets = index_sets(&y_profile, delta_v, delta_h)?;
        let partition = v_sets.partition("X", "X,Y")?;
        let local = y_sets.conditioned("V")?.very_high.clone();
        Ok(StrongSetup {
            v_spec,
            y_spec,
            v_profile,
            y_profile,
            v_sets,
            y_sets,
            partition,
            local,
        })
    }

    pub fn block_len(&self) -> usize {
        self.v_sets.block_len
    }

    pub fn v_spec(&self) -> &SourceSpec {
        &self.v_spec
    }

    pub fn y_spec(&self) -> &SourceSpec {
        &self.y_spec
    }

    pub fn v_profile(&self) -> &PolarProfile {
        &self.v_profile
    }

    pub fn y_profile(&self) -> &PolarProfile {
        &self.y_profile
    }

    pub fn v_sets(&self) -> &IndexSets {
        &self.v_sets
    }

    pub fn y_sets(&self) -> &IndexSets {
        &self.y_sets
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// `V_{Y|V}`: channel-simulation positions filled from local uniform randomness.
    pub fn local_set(&self) -> &BTreeSet<usize> {
        &self.local
    }

    fn v_plan(&self, recycled: &[u32], fresh: &[u32], message: Option<&[u32]>) -> Result<FrozenPlan> {
        let mut plan = FrozenPlan::new(self.v_spec.modulus(), self.block_len(), Rule::SampleNoSide)?;
        plan.freeze(&self.partition.f2, recycled)?;
        plan.freeze(&self.partition.f3, fresh)?;
        match message {
            Some(m) => plan.freeze(&self.partition.f4, m)?,
            None => plan.assign(&self.partition.f4, Rule::SampleTrue)?,
        }
        Ok(plan)
    }

    fn y_plan(&self) -> Result<FrozenPlan> {
        let mut plan = FrozenPlan::new(self.y_spec.modulus(), self.block_len(), Rule::SampleTrue)?;
        plan.assign(&self.local, Rule::SampleUniform)?;
        Ok(plan)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongEncoding {
    pub message: Vec<u32>,
    /// Draws on `F1`, sent along with the message.
    pub trace: Trace,
    pub u: SymbolVector,
    pub v: SymbolVector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongDecoding {
    pub v: SymbolVector,
    pub y: SymbolVector,
    pub local_uniform: usize,
    pub local_conditional: usize,
}

pub fn strong_encode<R: Rng + ?Sized>(
    setup: &StrongSetup,
    x: &[u32],
    recycled: &[u32],
    fresh: &[u32],
    rng: &mut R,
) -> Result<StrongEncoding> {
    if x.len() != setup.block_len() {
        return Err(Error::Dimension(format!(
            "x has length {}, block length is {}",
            x.len(),
            setup.block_len()
        )));
    }
    let plan = setup.v_plan(recycled, fresh, None)?;
    let side = SideSequence::single(AXIS_X, x.to_vec());
    let path = sc_sample(&setup.v_spec, Some(&side), &plan, rng)?;
    let message = setup.partition.f4.iter().map(|&j| path.u.as_slice()[j]).collect();
    Ok(StrongEncoding {
        message,
        trace: path.trace.restrict(&setup.partition.f1),
        u: path.u,
        v: path.x,
    })
}

/// Rebuilds `v` from the shared data, then simulates the channel `q_{Y|V}`
/// with randomness local to node 2.
pub fn strong_decode<R: Rng + ?Sized>(
    setup: &StrongSetup,
    message: &[u32],
    recycled: &[u32],
    fresh: &[u32],
    trace: &Trace,
    local_rng: &mut R,
) -> Result<StrongDecoding> {
    let plan = setup.v_plan(recycled, fresh, Some(message))?;
    let (_, v) = replay_path(&setup.v_spec, None, &plan, trace)?;
    let side = SideSequence::single(AXIS_V, v.as_slice().to_vec());
    let path = sc_sample(&setup.y_spec, Some(&side), &setup.y_plan()?, local_rng)?;
    let local_uniform = setup.local.len();
    Ok(StrongDecoding {
        v,
        y: path.x,
        local_uniform,
        local_conditional: path.trace.len() - local_uniform,
    })
}

/// Runs `k` blocks with `x` drawn iid from the target's `X` marginal.
pub fn strong_run<R: Rng + ?Sized>(setup: &StrongSetup, k: usize, rng: &mut R) -> Result<Transcript> {
    check_k(k)?;
    let len = setup.block_len();
    let q = setup.v_spec.q();
    let recycled = uniform_symbols(q, setup.partition.f2.len(), rng);
    let mut t = Transcript::new(SchemeKind::Strong, len, k, recycled.clone());
    for _ in 0..k {
        let fresh = uniform_symbols(q, setup.partition.f3.len(), rng);
        let x = setup.v_spec.sample_letters(len, rng).swap_remove(AXIS_X);
        let enc = strong_encode(setup, &x, &recycled, &fresh, rng)?;
        let local_seed = rng.random::<u64>();
        let dec = strong_decode(
            setup,
            &enc.message,
            &recycled,
            &fresh,
            &enc.trace,
            &mut ChaCha8Rng::seed_from_u64(local_seed),
        )?;
        if dec.v != enc.v {
            return Err(Error::Replay("decoder rebuilt a different v".into()));
        }
        t.ledger.local_uniform += dec.local_uniform;
        t.ledger.local_conditional += dec.local_conditional + enc.message.len();
        t.push(BlockRecord {
            fresh,
            trace: enc.trace,
            message: enc.message,
            x,
            u: enc.u.into_inner(),
            v: Some(dec.v.into_inner()),
            y: dec.y.into_inner(),
            noise_seed: Some(local_seed),
        });
    }
    Ok(t)
}

/// A full-support joint over `(X, V, Y)` with `X -> V -> Y` built from
/// `q(x, v)` and `q(y | v)`.
pub fn markov_joint(xv: &[Vec<f64>], y_given_v: &[Vec<f64>]) -> Result<JointPmf> {
    let qx = xv.len();
    let qv = xv.first().map_or(0, Vec::len);
    let qy = y_given_v.first().map_or(0, Vec::len);
    if y_given_v.len() != qv {
        return Err(Error::Dimension("one channel row per auxiliary symbol required".into()));
    }
    let mut probs = Vec::with_capacity(qx * qv * qy);
    for row in xv {
        for (v, &p) in row.iter().enumerate() {
            probs.extend(y_given_v[v].iter().map(|w| p * w));
        }
    }
    JointPmf::new(vec![qx, qv, qy], probs)
}
