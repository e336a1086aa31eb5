//! Finite-`N` rates from set cardinalities next to their limiting targets.
//!
//! Rates count symbols of the polarized alphabet per source position; targets
//! are the entropic limits in bits divided by `log2 q` so both share a unit.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Scheme, SchemeKind};
use crate::error::Result;
use crate::prob::mutual_information;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub name: String,
    /// Rate realized by the index sets at this `(N, k)`.
    pub finite: f64,
    /// Limit as `N -> infinity` at this `k`.
    pub target: f64,
    /// Alphabet size the symbol unit refers to.
    pub q: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub scheme: SchemeKind,
    pub block_len: usize,
    pub k: usize,
    pub rows: Vec<RateRow>,
}

impl RateReport {
    pub fn row(&self, name: &str) -> Option<&RateRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn finite(&self, name: &str) -> f64 {
        self.row(name).map_or(f64::NAN, |r| r.finite)
    }
}

pub const RANDOMNESS: &str = "randomness";
pub const RANDOMNESS_LIMIT: &str = "randomness-k-infinite";
pub const MESSAGE: &str = "message";
pub const COMMON_RANDOMNESS: &str = "common-randomness";
pub const TRACE_SYMBOLS: &str = "trace-symbols";
pub const TRACE_ENTROPY: &str = "trace-entropy";
pub const COMMUNICATION_FORMULA: &str = "communication-formula";
pub const COMMUNICATION: &str = "communication";
pub const COMMUNICATION_PLUS_COMMON_LIMIT: &str = "communication-plus-common-k-infinite";
pub const LOCAL: &str = "local";

fn diff(a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> usize {
    a.difference(b).count()
}

/// Rates of `scheme` run over `k` blocks.
pub fn rate_report(scheme: &Scheme, k: usize) -> Result<RateReport> {
    let kf = k as f64;
    let len = scheme.block_len();
    let nf = len as f64;
    let mut rows = Vec::new();
    let mut row = |name: &str, finite: f64, target: f64, q: usize| {
        rows.push(RateRow {
            name: name.into(),
            finite,
            target,
            q: q as u32,
        })
    };
    match scheme {
        Scheme::Resolvability(s) => {
            let q = s.spec().q();
            let lq = (q as f64).log2();
            let j = s.spec().joint();
            let h_x_given_y = j.conditional_entropy(&[0], &[1])?;
            let i_xy = mutual_information(j, &[0], &[1])?;
            let rec = s.recycled_set().len() as f64;
            let fresh = s.fresh_set().len() as f64;
            row(
                RANDOMNESS,
                (rec + kf * fresh) / (kf * nf),
                (i_xy + h_x_given_y / kf) / lq,
                q,
            );
            row(RANDOMNESS_LIMIT, fresh / nf, i_xy / lq, q);
        }
        Scheme::Empirical(s) => {
            let q = s.spec().q();
            let lq = (q as f64).log2();
            let j = s.spec().joint();
            let i_xy = mutual_information(j, &[0], &[1])?;
            let h_y_given_x = j.conditional_entropy(&[1], &[0])?;
            row(MESSAGE, s.message_set().len() as f64 / nf, i_xy / lq, q);
            row(
                COMMON_RANDOMNESS,
                s.common_set().len() as f64 / (kf * nf),
                h_y_given_x / (kf * lq),
                q,
            );
            row(TRACE_SYMBOLS, s.low_set().len() as f64 / nf, 0.0, q);
            let h = &s.profile().h_unconditioned;
            let trace_bits = s.low_set().iter().fold(0.0, |acc, &j| acc + h[j]);
            row(TRACE_ENTROPY, trace_bits / (nf * lq), 0.0, q);
        }
        Scheme::Strong(s) => {
            let qv = s.v_spec().q();
            let qy = s.y_spec().q();
            let lv = (qv as f64).log2();
            let ly = (qy as f64).log2();
            let j = s.v_spec().joint();
            let (x, v, y) = (0, 1, 2);
            let i_vx = mutual_information(j, &[v], &[x])?;
            let i_vy_given_x = j.conditional_entropy(&[v], &[x])? - j.conditional_entropy(&[v], &[x, y])?;
            let h_v_given_xy = j.conditional_entropy(&[v], &[x, y])?;
            let h_y_given_v = j.conditional_entropy(&[y], &[v])?;
            let sets = s.v_sets();
            let v_v = &sets.unconditioned.very_high;
            let v_vx = &sets.conditioned("X")?.very_high;
            let v_vxy = &sets.conditioned("X,Y")?.very_high;
            let p = s.partition();
            row(COMMUNICATION_FORMULA, diff(v_v, v_vx) as f64 / nf, i_vx / lv, qv);
            row(COMMUNICATION, p.f4.len() as f64 / nf, i_vx / lv, qv);
            row(
                COMMON_RANDOMNESS,
                (v_vxy.len() as f64 + kf * diff(v_vx, v_vxy) as f64) / (kf * nf),
                (i_vy_given_x + h_v_given_xy / kf) / lv,
                qv,
            );
            row(
                COMMUNICATION_PLUS_COMMON_LIMIT,
                diff(v_v, v_vxy) as f64 / nf,
                mutual_information(j, &[v], &[x, y])? / lv,
                qv,
            );
            row(TRACE_SYMBOLS, p.f1.len() as f64 / nf, 0.0, qv);
            row(LOCAL, s.local_set().len() as f64 / nf, h_y_given_v / ly, qy);
        }
    }
    Ok(RateReport {
        scheme: scheme.kind(),
        block_len: len,
        k,
        rows,
    })
}
