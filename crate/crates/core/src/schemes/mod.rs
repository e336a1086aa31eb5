//! End-to-end protocols over `k` blocks of length `N`: channel resolvability
//! with recycled randomness, empirical coordination, and strong coordination
//! with channel simulation.

pub mod dmc;
pub mod empirical;
pub mod rates;
pub mod resolvability;
pub mod strong;
pub mod transcript;

use rand::Rng;

pub use dmc::{dmc_transmit, Dmc};
pub use empirical::{empirical_decode, empirical_encode, empirical_run, EmpiricalSetup};
pub use rates::{rate_report, RateReport, RateRow};
pub use resolvability::{resolvability_run, ResolvabilitySetup};
pub use strong::{strong_decode, strong_encode, strong_run, StrongSetup};
pub use transcript::{BlockRecord, RandomnessLedger, SchemeKind, Transcript};

use crate::error::Result;

/// A configured protocol, ready to run.
#[derive(Clone, Debug)]
pub enum Scheme {
    Resolvability(ResolvabilitySetup),
    Empirical(EmpiricalSetup),
    Strong(StrongSetup),
}

impl Scheme {
    pub fn kind(&self) -> SchemeKind {
        match self {
            Scheme::Resolvability(_) => SchemeKind::Resolvability,
            Scheme::Empirical(_) => SchemeKind::Empirical,
            Scheme::Strong(_) => SchemeKind::Strong,
        }
    }

    pub fn block_len(&self) -> usize {
        match self {
            Scheme::Resolvability(s) => s.block_len(),
            Scheme::Empirical(s) => s.block_len(),
            Scheme::Strong(s) => s.block_len(),
        }
    }

    /// Runs `k` blocks.
    pub fn run<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Transcript> {
        match self {
            Scheme::Resolvability(s) => resolvability_run(s, k, rng),
            Scheme::Empirical(s) => empirical_run(s, k, rng),
            Scheme::Strong(s) => strong_run(s, k, rng),
        }
    }

    pub fn rates(&self, k: usize) -> Result<RateReport> {
        rate_report(self, k)
    }

    /// Per-index terms of the exact single-block divergence between the
    /// target and the induced law of the polarized pair, in bits:
    /// `log q - h` on positions frozen to uniform randomness, and the side
    /// information gain `h - h_side` on positions drawn without side
    /// information. `None` when low positions use deterministic decisions.
    pub fn divergence_terms(&self) -> Result<Option<Vec<(usize, f64)>>> {
        let mut terms = Vec::new();
        match self {
            Scheme::Resolvability(s) => {
                let p = s.profile();
                let lq = p.log_q();
                for &j in s.recycled_set().iter().chain(s.fresh_set()) {
                    terms.push((j, lq - p.h_unconditioned[j]));
                }
            }
            Scheme::Empirical(s) => {
                if s.deterministic_low() {
                    return Ok(None);
                }
                let p = s.profile();
                let lq = p.log_q();
                let hc = p.conditioned(&s.spec().group_label(0))?;
                for &j in s.common_set() {
                    terms.push((j, lq - hc[j]));
                }
                for &j in s.low_set() {
                    terms.push((j, p.h_unconditioned[j] - hc[j]));
                }
            }
            Scheme::Strong(s) => {
                let p = s.v_profile();
                let lq = p.log_q();
                let hc = p.conditioned("X")?;
                let part = s.partition();
                for &j in part.f2.iter().chain(&part.f3) {
                    terms.push((j, lq - hc[j]));
                }
                for &j in &part.f1 {
                    terms.push((j, p.h_unconditioned[j] - hc[j]));
                }
            }
        }
        terms.sort_by_key(|t| t.0);
        Ok(Some(terms))
    }
}

pub(crate) fn uniform_symbols<R: Rng + ?Sized>(q: usize, count: usize, rng: &mut R) -> Vec<u32> {
    (0..count).map(|_| rng.random_range(0..q as u32)).collect()
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return Err(crate::Error::Config("block count k must be at least 1".into()));
    }
    Ok(())
}
