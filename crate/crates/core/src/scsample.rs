//! Successive-cancellation (SC) posteriors and randomized SC sampling.
//!
//! All posteriors are exact: likelihood vectors are combined through the
//! polar butterfly in the linear domain, renormalized per position at each
//! level.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Modulus, SymbolVector};
use crate::polarize::{SideSequence, SourceSpec};
use crate::prob::Pmf;

fn normalize(v: &mut [f64]) {
    let s: f64 = v.iter().sum();
    if s > 0.0 {
        v.iter_mut().for_each(|p| *p /= s);
    }
}

/// One SC pass over a batch of likelihood arrays that share a decision path.
///
/// Channel `c` holds `N * q` likelihoods. At each leaf the decision callback
/// receives the posterior of every channel and returns the symbol committed
/// for all of them.
pub(crate) struct Walk {
    q: usize,
    channels: Vec<Vec<f64>>,
}

impl Walk {
    pub(crate) fn new(q: usize, channels: Vec<Vec<f64>>) -> Self {
        Walk { q, channels }
    }

    /// Runs the pass and returns the x-domain word `x = u G_n^{-1}`.
    pub(crate) fn run<F>(&mut self, mut decide: F) -> Result<Vec<u32>>
    where
        F: FnMut(usize, &[Vec<f64>]) -> Result<u32>,
    {
        let len = self.channels[0].len() / self.q;
        let mut posts = vec![vec![0.0; self.q]; self.channels.len()];
        let channels = std::mem::take(&mut self.channels);
        walk(self.q, &channels, len, 0, &mut decide, &mut posts)
    }
}

fn walk<F>(
    q: usize,
    lik: &[Vec<f64>],
    len: usize,
    j0: usize,
    decide: &mut F,
    posts: &mut [Vec<f64>],
) -> Result<Vec<u32>>
where
    F: FnMut(usize, &[Vec<f64>]) -> Result<u32>,
{
    if len == 1 {
        for (post, l) in posts.iter_mut().zip(lik) {
            post.copy_from_slice(&l[..q]);
            normalize(post);
        }
        let s = decide(j0, posts)?;
        if s as usize >= q {
            return Err(Error::SymbolOutOfRange {
                symbol: s,
                modulus: q as u32,
            });
        }
        return Ok(vec![s]);
    }
    let h = len / 2;
    let mut child: Vec<Vec<f64>> = vec![vec![0.0; h * q]; lik.len()];
    for (out, l) in child.iter_mut().zip(lik) {
        for i in 0..h {
            let a = &l[i * q..(i + 1) * q];
            let b = &l[(i + h) * q..(i + h + 1) * q];
            let o = &mut out[i * q..(i + 1) * q];
            for s in 0..q {
                o[s] = (0..q).map(|t| a[(s + q - t) % q] * b[t]).sum();
            }
            normalize(o);
        }
    }
    let xs = walk(q, &child, h, j0, decide, posts)?;
    for (out, l) in child.iter_mut().zip(lik) {
        for i in 0..h {
            let a = &l[i * q..(i + 1) * q];
            let b = &l[(i + h) * q..(i + h + 1) * q];
            let o = &mut out[i * q..(i + 1) * q];
            let s = xs[i] as usize;
            for t in 0..q {
                o[t] = a[(s + q - t) % q] * b[t];
            }
            normalize(o);
        }
    }
    let xt = walk(q, &child, h, j0 + h, decide, posts)?;
    let mut x = Vec::with_capacity(len);
    x.extend((0..h).map(|i| (xs[i] + q as u32 - xt[i]) % q as u32));
    x.extend_from_slice(&xt);
    Ok(x)
}

/// How the SC sampler fills one index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "symbol", rename_all = "kebab-case")]
pub enum Rule {
    /// Use this symbol verbatim.
    Frozen(u32),
    /// Draw from the posterior given the prefix and the side sequence (or
    /// the prefix alone when no side sequence is supplied).
    SampleTrue,
    /// Draw from the posterior given the prefix only.
    SampleNoSide,
    /// Draw uniformly.
    SampleUniform,
    /// Most likely symbol given the prefix only; ties go to the smallest.
    ArgmaxNoSide,
}

impl Rule {
    fn is_random(self) -> bool {
        matches!(self, Rule::SampleTrue | Rule::SampleNoSide | Rule::SampleUniform)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrozenPlan {
    modulus: Modulus,
    rules: Vec<Rule>,
}

impl FrozenPlan {
    /// Plan of length `len` with every index set to `default`.
    pub fn new(modulus: Modulus, len: usize, default: Rule) -> Result<Self> {
        Self::from_rules(modulus, vec![default; len])
    }

    pub fn from_rules(modulus: Modulus, rules: Vec<Rule>) -> Result<Self> {
        if !rules.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(rules.len()));
        }
        for r in &rules {
            check_rule(modulus, *r)?;
        }
        Ok(FrozenPlan { modulus, rules })
    }

    pub fn set(&mut self, j: usize, rule: Rule) -> Result<()> {
        check_rule(self.modulus, rule)?;
        let len = self.rules.len();
        *self
            .rules
            .get_mut(j)
            .ok_or_else(|| Error::Dimension(format!("index {j} outside plan of length {len}")))? =
            rule;
        Ok(())
    }

    /// Applies `rule` to every index in `indices`.
    pub fn assign<'a>(&mut self, indices: impl IntoIterator<Item = &'a usize>, rule: Rule) -> Result<()> {
        for &j in indices {
            self.set(j, rule)?;
        }
        Ok(())
    }

    /// Freezes `indices` (in increasing order) to `values`.
    pub fn freeze(&mut self, indices: &BTreeSet<usize>, values: &[u32]) -> Result<()> {
        if indices.len() != values.len() {
            return Err(Error::Dimension(format!(
                "{} frozen indices but {} values",
                indices.len(),
                values.len()
            )));
        }
        for (&j, &v) in indices.iter().zip(values) {
            self.set(j, Rule::Frozen(v))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn rule(&self, j: usize) -> Rule {
        self.rules[j]
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }
}

fn check_rule(modulus: Modulus, rule: Rule) -> Result<()> {
    match rule {
        Rule::Frozen(v) if v >= modulus.get() => Err(Error::SymbolOutOfRange {
            symbol: v,
            modulus: modulus.get(),
        }),
        _ => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub index: usize,
    pub symbol: u32,
}

/// Symbols drawn at randomized indices, in index order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub entries: Vec<TraceEntry>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries whose index lies in `set`.
    pub fn restrict(&self, set: &BTreeSet<usize>) -> Trace {
        Trace {
            entries: self
                .entries
                .iter()
                .filter(|e| set.contains(&e.index))
                .copied()
                .collect(),
        }
    }

    pub fn symbols(&self) -> Vec<u32> {
        self.entries.iter().map(|e| e.symbol).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    pub u: SymbolVector,
    /// `x = u G_n^{-1}`.
    pub x: SymbolVector,
    /// Distribution each index was decided from (the true posterior for
    /// frozen indices, uniform for `SampleUniform`).
    pub posteriors: Vec<Vec<f64>>,
    pub trace: Trace,
}

fn channels_for(spec: &SourceSpec, side: Option<&SideSequence>, len: usize) -> Result<Vec<Vec<f64>>> {
    if !len.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(len));
    }
    let mut ch = vec![spec.likelihoods(None, len)?];
    if let Some(s) = side {
        ch.push(spec.likelihoods(Some(s), len)?);
    }
    Ok(ch)
}

fn check_plan(spec: &SourceSpec, plan: &FrozenPlan) -> Result<()> {
    if plan.modulus() != spec.modulus() {
        return Err(Error::Dimension(format!(
            "plan over GF({}) for a source over GF({})",
            plan.modulus().get(),
            spec.modulus().get()
        )));
    }
    Ok(())
}

fn argmax(p: &[f64]) -> u32 {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best as u32
}

fn draw<R: Rng + ?Sized>(p: &[f64], rng: &mut R, index: usize) -> Result<u32> {
    let last = p
        .iter()
        .rposition(|&v| v > 0.0)
        .ok_or(Error::ImpossiblePrefix { index })?;
    let r: f64 = rng.random();
    let mut cum = 0.0;
    for (i, &v) in p.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        cum += v;
        if r < cum {
            return Ok(i as u32);
        }
    }
    Ok(last as u32)
}

/// The designated posterior for `rule` at the current leaf.
fn designated<'a>(rule: Rule, posts: &'a [Vec<f64>], uniform: &'a [f64]) -> &'a [f64] {
    match rule {
        Rule::SampleUniform => uniform,
        Rule::SampleNoSide | Rule::ArgmaxNoSide => &posts[0],
        Rule::SampleTrue | Rule::Frozen(_) => posts.last().expect("at least one channel"),
    }
}

/// Exact `P(U^j = . | u^{1:j-1}[, side])`; `j` is 0-based and `prefix.len() == j`.
pub fn sc_posterior(
    spec: &SourceSpec,
    side: Option<&SideSequence>,
    prefix: &[u32],
    j: usize,
    len: usize,
) -> Result<Pmf> {
    if prefix.len() != j || j >= len {
        return Err(Error::Dimension(format!(
            "prefix of length {} for index {j} of {len}",
            prefix.len()
        )));
    }
    let q = spec.q();
    let mut result = None;
    Walk::new(q, channels_for(spec, side, len)?).run(|i, posts| {
        let p = posts.last().expect("at least one channel");
        if i < j {
            let s = prefix[i];
            if s as usize >= q {
                return Err(Error::SymbolOutOfRange {
                    symbol: s,
                    modulus: q as u32,
                });
            }
            if p[s as usize] <= 0.0 {
                return Err(Error::ImpossiblePrefix { index: i });
            }
            return Ok(s);
        }
        if i == j {
            if p.iter().all(|&v| v <= 0.0) {
                return Err(Error::ImpossiblePrefix { index: i });
            }
            result = Some(Pmf::from_weights(p)?);
        }
        Ok(argmax(p))
    })?;
    Ok(result.expect("walk visits every index"))
}

/// Walks `j = 0..N` applying `plan`, drawing randomized indices from `rng`.
pub fn sc_sample<R: Rng + ?Sized>(
    spec: &SourceSpec,
    side: Option<&SideSequence>,
    plan: &FrozenPlan,
    rng: &mut R,
) -> Result<SamplePath> {
    check_plan(spec, plan)?;
    let q = spec.q();
    let len = plan.len();
    let uniform = vec![1.0 / q as f64; q];
    let mut u = Vec::with_capacity(len);
    let mut posteriors = Vec::with_capacity(len);
    let mut trace = Trace::default();
    let x = Walk::new(q, channels_for(spec, side, len)?).run(|j, posts| {
        let rule = plan.rule(j);
        let p = designated(rule, posts, &uniform);
        let s = match rule {
            Rule::Frozen(v) => v,
            Rule::ArgmaxNoSide => {
                if p.iter().all(|&v| v <= 0.0) {
                    return Err(Error::ImpossiblePrefix { index: j });
                }
                argmax(p)
            }
            _ => draw(p, rng, j)?,
        };
        if rule.is_random() {
            trace.entries.push(TraceEntry { index: j, symbol: s });
        }
        posteriors.push(p.to_vec());
        u.push(s);
        Ok(s)
    })?;
    Ok(SamplePath {
        u: SymbolVector::new(spec.modulus(), u)?,
        x: SymbolVector::new(spec.modulus(), x)?,
        posteriors,
        trace,
    })
}

/// Reproduces the `u` of an [`sc_sample`] call from its trace.
pub fn replay(
    spec: &SourceSpec,
    side: Option<&SideSequence>,
    plan: &FrozenPlan,
    trace: &Trace,
) -> Result<SymbolVector> {
    replay_path(spec, side, plan, trace).map(|(u, _)| u)
}

/// Like [`replay`] but also returns `x = u G_n^{-1}`.
pub fn replay_path(
    spec: &SourceSpec,
    side: Option<&SideSequence>,
    plan: &FrozenPlan,
    trace: &Trace,
) -> Result<(SymbolVector, SymbolVector)> {
    check_plan(spec, plan)?;
    let q = spec.q();
    let len = plan.len();
    let uniform = vec![1.0 / q as f64; q];
    let mut entries = trace.entries.iter();
    let mut u = Vec::with_capacity(len);
    let x = Walk::new(q, channels_for(spec, side, len)?).run(|j, posts| {
        let rule = plan.rule(j);
        let p = designated(rule, posts, &uniform);
        let s = match rule {
            Rule::Frozen(v) => v,
            Rule::ArgmaxNoSide => argmax(p),
            _ => {
                let e = entries
                    .next()
                    .ok_or_else(|| Error::Replay(format!("trace ends before index {j}")))?;
                if e.index != j {
                    return Err(Error::Replay(format!(
                        "trace entry for index {} where index {j} was expected",
                        e.index
                    )));
                }
                if e.symbol as usize >= q || p[e.symbol as usize] <= 0.0 {
                    return Err(Error::Replay(format!(
                        "symbol {} at index {j} has zero probability",
                        e.symbol
                    )));
                }
                e.symbol
            }
        };
        u.push(s);
        Ok(s)
    })?;
    if let Some(e) = entries.next() {
        return Err(Error::Replay(format!(
            "unused trace entry for index {}",
            e.index
        )));
    }
    Ok((
        SymbolVector::new(spec.modulus(), u)?,
        SymbolVector::new(spec.modulus(), x)?,
    ))
}
