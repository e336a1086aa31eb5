use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{joint_type, TypeHistogram};
use crate::scsample::Trace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Resolvability,
    Empirical,
    Strong,
}

impl SchemeKind {
    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Resolvability => "resolvability",
            SchemeKind::Empirical => "empirical",
            SchemeKind::Strong => "strong",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "resolvability" => Ok(SchemeKind::Resolvability),
            "empirical" => Ok(SchemeKind::Empirical),
            "strong" => Ok(SchemeKind::Strong),
            other => Err(Error::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Symbol counts per randomness source over a whole run.
///
/// Uniform symbols go to exactly one of the shared, trace or local-uniform
/// buckets. Draws from non-uniform conditionals that are not transmitted are
/// counted separately as `local_conditional`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomnessLedger {
    /// Recycled common randomness, drawn once.
    pub shared_recycled: usize,
    /// Fresh common randomness, summed over blocks.
    pub shared_fresh: usize,
    /// Transmitted draws (the randomized-rounding trace), summed over blocks.
    pub trace: usize,
    /// Uniform symbols drawn from a node's local source.
    pub local_uniform: usize,
    pub local_conditional: usize,
    /// Message symbols, summed over blocks.
    pub message: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    /// Fresh common randomness of this block.
    pub fresh: Vec<u32>,
    /// Transmitted draws.
    pub trace: Trace,
    pub message: Vec<u32>,
    /// First-node sequence (channel input or observed source).
    pub x: Vec<u32>,
    /// Polarized word drawn at the first node.
    pub u: Vec<u32>,
    /// Auxiliary sequence (strong coordination only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<Vec<u32>>,
    /// Second-node output.
    pub y: Vec<u32>,
    /// Seed of the channel noise or of the second node's local source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_seed: Option<u64>,
}

pub const TRANSCRIPT_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub version: u32,
    pub scheme: SchemeKind,
    pub block_len: usize,
    pub k: usize,
    /// Recycled common randomness, identical for every block.
    pub recycled: Vec<u32>,
    pub blocks: Vec<BlockRecord>,
    pub ledger: RandomnessLedger,
}

impl Transcript {
    pub(crate) fn new(scheme: SchemeKind, block_len: usize, k: usize, recycled: Vec<u32>) -> Self {
        let ledger = RandomnessLedger {
            shared_recycled: recycled.len(),
            ..Default::default()
        };
        Transcript {
            version: TRANSCRIPT_FORMAT_VERSION,
            scheme,
            block_len,
            k,
            recycled,
            blocks: Vec::with_capacity(k),
            ledger,
        }
    }

    pub(crate) fn push(&mut self, block: BlockRecord) {
        self.ledger.shared_fresh += block.fresh.len();
        self.ledger.trace += block.trace.len();
        self.ledger.message += block.message.len();
        self.blocks.push(block);
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: Transcript = serde_json::from_str(s)?;
        if t.version != TRANSCRIPT_FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported transcript version {}", t.version)));
        }
        Ok(t)
    }

    /// Concatenation of all blocks' `x`.
    pub fn x_all(&self) -> Vec<u32> {
        self.blocks.iter().flat_map(|b| b.x.iter().copied()).collect()
    }

    pub fn y_all(&self) -> Vec<u32> {
        self.blocks.iter().flat_map(|b| b.y.iter().copied()).collect()
    }

    /// Joint type of `(x, y)` over all `kN` positions.
    pub fn joint_type(&self, qx: usize, qy: usize) -> Result<TypeHistogram> {
        joint_type(&self.x_all(), &self.y_all(), qx, qy)
    }

    /// Symbols per position of each ledger bucket: `(message, shared, trace, local_uniform)`.
    pub fn ledger_rates(&self) -> (f64, f64, f64, f64) {
        let total = (self.k * self.block_len) as f64;
        let l = &self.ledger;
        (
            l.message as f64 / total,
            (l.shared_recycled + l.shared_fresh) as f64 / total,
            l.trace as f64 / total,
            l.local_uniform as f64 / total,
        )
    }
}
