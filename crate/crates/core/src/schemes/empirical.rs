//! Empirical coordination: node 1 observes `x ~ q_X^{⊗N}` and sends a message
//! so that node 2 outputs `y` whose joint type with `x` approaches `q_{XY}`.

use std::collections::BTreeSet;

use rand::Rng;

use super::transcript::{BlockRecord, SchemeKind, Transcript};
use super::{check_k, uniform_symbols};
use crate::error::{Error, Result};
use crate::field::SymbolVector;
use crate::polarize::{index_sets, IndexSets, PolarProfile, SideSequence, SourceSpec};
use crate::prob::JointPmf;
use crate::scsample::{replay_path, sc_sample, FrozenPlan, Rule, Trace};

/// Source spec for a target `q(x, y)` with `Y` polarized and `X` as side information.
pub fn empirical_spec(joint: JointPmf) -> Result<SourceSpec> {
    if joint.rank() != 2 {
        return Err(Error::Dimension("empirical coordination needs a joint over (X, Y)".into()));
    }
    SourceSpec::new(joint, &["X", "Y"], 1, &[&[0]])
}

#[derive(Clone, Debug)]
pub struct EmpiricalSetup {
    spec: SourceSpec,
    profile: PolarProfile,
    sets: IndexSets,
    common: BTreeSet<usize>,
    message: BTreeSet<usize>,
    low: BTreeSet<usize>,
    deterministic_low: bool,
}

impl EmpiricalSetup {
    pub fn new(spec: SourceSpec, profile: PolarProfile, delta_v: f64, delta_h: f64) -> Result<Self> {
        let sets = index_sets(&profile, delta_v, delta_h)?;
        Self::from_sets(spec, profile, sets)
    }

    pub fn from_sets(spec: SourceSpec, profile: PolarProfile, sets: IndexSets) -> Result<Self> {
        if spec.group_count() != 1 || spec.joint().rank() != 2 || spec.polarized_axis() != 1 {
            return Err(Error::Config("empirical spec must be built by empirical_spec".into()));
        }
        if sets.block_len != profile.block_len() || sets.q as usize != spec.q() {
            return Err(Error::Dimension("index sets do not match the profile".into()));
        }
        let high = &sets.unconditioned.high;
        let common = sets.conditioned(&spec.group_label(0))?.very_high.clone();
        if !common.is_subset(high) {
            return Err(Error::Config("V_{Y|X} is not contained in H_Y".into()));
        }
        let message = high.difference(&common).copied().collect();
        let low = (0..sets.block_len).filter(|j| !high.contains(j)).collect();
        Ok(EmpiricalSetup {
            spec,
            profile,
            sets,
            common,
            message,
            low,
            deterministic_low: false,
        })
    }

    /// Replace randomized draws on `H_Y^c` with most-likely decisions (no trace).
    pub fn with_deterministic_low(mut self, on: bool) -> Self {
        self.deterministic_low = on;
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

    /// `V_{Y|X}`: positions frozen to common randomness.
    pub fn common_set(&self) -> &BTreeSet<usize> {
        &self.common
    }

    /// `H_Y \ V_{Y|X}`: message positions.
    pub fn message_set(&self) -> &BTreeSet<usize> {
        &self.message
    }

    /// `H_Y^c`: positions drawn without side information.
    pub fn low_set(&self) -> &BTreeSet<usize> {
        &self.low
    }

    pub fn deterministic_low(&self) -> bool {
        self.deterministic_low
    }

    fn low_rule(&self) -> Rule {
        if self.deterministic_low {
            Rule::ArgmaxNoSide
        } else {
            Rule::SampleNoSide
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalEncoding {
    pub message: Vec<u32>,
    pub trace: Trace,
    pub u: SymbolVector,
    /// Output implied at the encoder.
    pub y: SymbolVector,
}

pub fn empirical_encode<R: Rng + ?Sized>(
    setup: &EmpiricalSetup,
    x: &[u32],
    common: &[u32],
    rng: &mut R,
) -> Result<EmpiricalEncoding> {
    if x.len() != setup.block_len() {
        return Err(Error::Dimension(format!(
            "x has length {}, block length is {}",
            x.len(),
            setup.block_len()
        )));
    }
    let mut plan = FrozenPlan::new(setup.spec.modulus(), setup.block_len(), Rule::SampleTrue)?;
    plan.freeze(&setup.common, common)?;
    plan.assign(&setup.low, setup.low_rule())?;
    let side = SideSequence::single(0, x.to_vec());
    let path = sc_sample(&setup.spec, Some(&side), &plan, rng)?;
    let message = setup.message.iter().map(|&j| path.u.as_slice()[j]).collect();
    Ok(EmpiricalEncoding {
        message,
        trace: path.trace.restrict(&setup.low),
        u: path.u,
        y: path.x,
    })
}

pub fn empirical_decode(
    setup: &EmpiricalSetup,
    message: &[u32],
    common: &[u32],
    trace: &Trace,
) -> Result<SymbolVector> {
    let mut plan = FrozenPlan::new(setup.spec.modulus(), setup.block_len(), setup.low_rule())?;
    plan.freeze(&setup.common, common)?;
    plan.freeze(&setup.message, message)?;
    replay_path(&setup.spec, None, &plan, trace).map(|(_, y)| y)
}

/// Runs `k` blocks with `x` drawn iid from the target's `X` marginal.
pub fn empirical_run<R: Rng + ?Sized>(setup: &EmpiricalSetup, k: usize, rng: &mut R) -> Result<Transcript> {
    check_k(k)?;
    let len = setup.block_len();
    let common = uniform_symbols(setup.spec.q(), setup.common.len(), rng);
    let mut t = Transcript::new(SchemeKind::Empirical, len, k, common.clone());
    for _ in 0..k {
        let x = setup.spec.sample_letters(len, rng).swap_remove(0);
        let enc = empirical_encode(setup, &x, &common, rng)?;
        let y = empirical_decode(setup, &enc.message, &common, &enc.trace)?;
        if y != enc.y {
            return Err(Error::Replay("decoder output differs from the encoder's".into()));
        }
        t.ledger.local_conditional += enc.message.len();
        t.push(BlockRecord {
            fresh: Vec::new(),
            trace: enc.trace,
            message: enc.message,
            x,
            u: enc.u.into_inner(),
            v: None,
            y: y.into_inner(),
            noise_seed: None,
        });
    }
    Ok(t)
}
