//! Channel resolvability: synthesize `q_Y^{⊗N}` at a channel output from
//! uniform randomness, recycling the `V_{X|Y}` part across blocks.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dmc::Dmc;
use super::transcript::{BlockRecord, SchemeKind, Transcript};
use super::{check_k, uniform_symbols};
use crate::error::{Error, Result};
use crate::polarize::{index_sets, IndexSets, PolarProfile, SourceSpec};
use crate::prob::JointPmf;
use crate::scsample::{sc_sample, FrozenPlan, Rule};

/// Source spec for a channel-input/output joint `q(x, y)` with `X` polarized.
pub fn resolvability_spec(joint: JointPmf) -> Result<SourceSpec> {
    if joint.rank() != 2 {
        return Err(Error::Dimension("resolvability needs a joint over (X, Y)".into()));
    }
    SourceSpec::new(joint, &["X", "Y"], 0, &[&[1]])
}

#[derive(Clone, Debug)]
pub struct ResolvabilitySetup {
    spec: SourceSpec,
    profile: PolarProfile,
    sets: IndexSets,
    recycled: BTreeSet<usize>,
    fresh: BTreeSet<usize>,
    channel: Dmc,
    refresh_recycled: bool,
}

impl ResolvabilitySetup {
    pub fn new(spec: SourceSpec, profile: PolarProfile, delta_v: f64, delta_h: f64) -> Result<Self> {
        let sets = index_sets(&profile, delta_v, delta_h)?;
        Self::from_sets(spec, profile, sets)
    }

    pub fn from_sets(spec: SourceSpec, profile: PolarProfile, sets: IndexSets) -> Result<Self> {
        if spec.group_count() != 1 || spec.joint().rank() != 2 {
            return Err(Error::Config("resolvability spec must be built by resolvability_spec".into()));
        }
        if sets.block_len != profile.block_len() || sets.q as usize != spec.q() {
            return Err(Error::Dimension("index sets do not match the profile".into()));
        }
        let channel = Dmc::from_joint(spec.joint(), 0, 1)?;
        let v_x = &sets.unconditioned.very_high;
        let recycled = sets.conditioned(&spec.group_label(0))?.very_high.clone();
        if !recycled.is_subset(v_x) {
            return Err(Error::Config("V_{X|Y} is not contained in V_X".into()));
        }
        let fresh = v_x.difference(&recycled).copied().collect();
        Ok(ResolvabilitySetup {
            spec,
            profile,
            sets,
            recycled,
            fresh,
            channel,
            refresh_recycled: false,
        })
    }

    /// Draw the `V_{X|Y}` randomness anew in every block instead of recycling it.
    pub fn with_refreshed_recycling(mut self, refresh: bool) -> Self {
        self.refresh_recycled = refresh;
        self
    }

    pub fn spec(&self) -> &SourceSpec {
        &self.spec
    }

    pub fn profile(&self) -> &PolarProfile {
        &self.profile
    }

    pub fn sets(&self) -> &IndexSets {
        &self.sets
    }

    pub fn block_len(&self) -> usize {
        self.sets.block_len
    }

    /// `V_{X|Y}`: positions fed by recycled randomness.
    pub fn recycled_set(&self) -> &BTreeSet<usize> {
        &self.recycled
    }

    /// `V_X \ V_{X|Y}`: positions fed by fresh randomness.
    pub fn fresh_set(&self) -> &BTreeSet<usize> {
        &self.fresh
    }

    pub fn channel(&self) -> &Dmc {
        &self.channel
    }

    pub fn refreshes_recycled(&self) -> bool {
        self.refresh_recycled
    }

    pub fn plan(&self, recycled: &[u32], fresh: &[u32]) -> Result<FrozenPlan> {
        let mut plan = FrozenPlan::new(self.spec.modulus(), self.block_len(), Rule::SampleNoSide)?;
        plan.freeze(&self.recycled, recycled)?;
        plan.freeze(&self.fresh, fresh)?;
        Ok(plan)
    }
}

/// Runs `k` blocks: `u` from the SC sampler, `x = u G_n^{-1}`, `y` from the channel.
pub fn resolvability_run<R: Rng + ?Sized>(
    setup: &ResolvabilitySetup,
    k: usize,
    rng: &mut R,
) -> Result<Transcript> {
    check_k(k)?;
    let q = setup.spec.q();
    let len = setup.block_len();
    let mut recycled = uniform_symbols(q, setup.recycled.len(), rng);
    let mut t = Transcript::new(SchemeKind::Resolvability, len, k, recycled.clone());
    for i in 0..k {
        let mut fresh = uniform_symbols(q, setup.fresh.len(), rng);
        if setup.refresh_recycled && i > 0 {
            recycled = uniform_symbols(q, setup.recycled.len(), rng);
        }
        let plan = setup.plan(&recycled, &fresh)?;
        let path = sc_sample(&setup.spec, None, &plan, rng)?;
        let noise_seed = rng.random::<u64>();
        let x = path.x.into_inner();
        let y = setup.channel.transmit(&x, &mut ChaCha8Rng::seed_from_u64(noise_seed))?;
        t.ledger.local_conditional += path.trace.len();
        if setup.refresh_recycled && i > 0 {
            // Refreshed recycled symbols are fresh randomness of this block.
            fresh.extend_from_slice(&recycled);
        }
        t.push(BlockRecord {
            fresh,
            trace: Default::default(),
            message: Vec::new(),
            x,
            u: path.u.into_inner(),
            v: None,
            y,
            noise_seed: Some(noise_seed),
        });
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::polar_inverse;
    use crate::polarize::exact_profile;

    fn setup(p: f64, crossover: f64, n: u32, dv: f64) -> ResolvabilitySetup {
        let px = crate::prob::Pmf::bernoulli(p).unwrap();
        let ch = vec![vec![1.0 - crossover, crossover], vec![crossover, 1.0 - crossover]];
        let joint = JointPmf::from_marginal_and_channel(&px, &ch).unwrap();
        let spec = resolvability_spec(joint).unwrap();
        let profile = exact_profile(&spec, n).unwrap();
        ResolvabilitySetup::new(spec, profile, dv, 0.05).unwrap()
    }

    #[test]
    fn recycled_randomness_is_identical_across_blocks() {
        let s = setup(0.3, 0.2, 2, 0.5);
        assert!(!s.recycled_set().is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = resolvability_run(&s, 5, &mut rng).unwrap();
        for b in &t.blocks {
            let recycled: Vec<u32> = s.recycled_set().iter().map(|&j| b.u[j]).collect();
            assert_eq!(recycled, t.recycled);
            let fresh: Vec<u32> = s.fresh_set().iter().map(|&j| b.u[j]).collect();
            assert_eq!(fresh, b.fresh);
            let u = crate::field::SymbolVector::from_raw(2, b.u.clone()).unwrap();
            assert_eq!(polar_inverse(&u).as_slice(), &b.x[..]);
        }
        assert_eq!(t.ledger.shared_recycled, s.recycled_set().len());
        assert_eq!(t.ledger.shared_fresh, 5 * s.fresh_set().len());
    }

    #[test]
    fn uniform_target_freezes_everything() {
        let s = setup(0.5, 0.1, 2, 0.1);
        assert_eq!(s.recycled_set().len() + s.fresh_set().len(), 4);
    }

    #[test]
    fn refreshed_recycling_differs() {
        let s = setup(0.3, 0.2, 2, 0.5).with_refreshed_recycling(true);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = resolvability_run(&s, 40, &mut rng).unwrap();
        let distinct: std::collections::BTreeSet<Vec<u32>> = t
            .blocks
            .iter()
            .map(|b| s.recycled_set().iter().map(|&j| b.u[j]).collect())
            .collect();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn k_zero_rejected() {
        let s = setup(0.3, 0.2, 1, 0.5);
        assert!(resolvability_run(&s, 0, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }
}
