//! Polarized conditional-entropy profiles and the index sets built from them.
//!
//! Indices are 0-based in code and in every serialized artifact; index `j`
//! here is position `j + 1` in the usual 1-based notation.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{weighted::WeightedIndex, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{self, is_prime, Modulus};
use crate::prob::{plogp, JointPmf, Pmf};
use crate::scsample::Walk;

/// Default cap on `(q * q_side)^N` for [`exact_profile`].
pub const EXACT_BUDGET: u128 = 1 << 24;

const MARKOV_TOL: f64 = 1e-10;

/// Per-position values of the side-information axes of one group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideSequence {
    /// Axes of the joint, in the order of `values`.
    pub axes: Vec<usize>,
    /// `values[a][i]`: symbol of axis `axes[a]` at position `i`.
    pub values: Vec<Vec<u32>>,
}

impl SideSequence {
    pub fn new(axes: Vec<usize>, values: Vec<Vec<u32>>) -> Result<Self> {
        if axes.len() != values.len() {
            return Err(Error::Dimension("one sequence per side axis required".into()));
        }
        if values.windows(2).any(|w| w[0].len() != w[1].len()) {
            return Err(Error::Dimension("side sequences differ in length".into()));
        }
        Ok(SideSequence { axes, values })
    }

    pub fn single(axis: usize, values: Vec<u32>) -> Self {
        SideSequence {
            axes: vec![axis],
            values: vec![values],
        }
    }

    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Letter-level table `w[c][a] = q(polarized = a, side = c)` for one side group.
#[derive(Clone, Debug)]
struct SideTable {
    axes: Vec<usize>,
    sizes: Vec<usize>,
    combos: usize,
    weights: Vec<f64>,
}

impl SideTable {
    fn combo_index(&self, values: &[u32]) -> usize {
        values
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&v, &s)| acc * s + v as usize)
    }

    fn row(&self, combo: usize, q: usize) -> &[f64] {
        &self.weights[combo * q..(combo + 1) * q]
    }
}

/// A memoryless source with one polarized axis and declared side-information groups.
#[derive(Clone, Debug)]
pub struct SourceSpec {
    joint: JointPmf,
    names: Vec<String>,
    polarized: usize,
    modulus: Modulus,
    groups: Vec<SideTable>,
    marginal: Pmf,
    sampler: WeightedIndex<f64>,
    markov: Option<[usize; 3]>,
}

impl SourceSpec {
    /// `names` labels the joint's axes; `side_groups` lists axis groups whose
    /// sequences may be observed as side information.
    pub fn new(
        joint: JointPmf,
        names: &[&str],
        polarized: usize,
        side_groups: &[&[usize]],
    ) -> Result<Self> {
        if names.len() != joint.rank() {
            return Err(Error::Dimension(format!(
                "{} axis names for a rank-{} joint",
                names.len(),
                joint.rank()
            )));
        }
        if polarized >= joint.rank() {
            return Err(Error::Dimension(format!("no axis {polarized}")));
        }
        let qp = joint.shape()[polarized];
        let modulus = Modulus::new(qp as u32).map_err(|_| {
            Error::Config(format!(
                "polarized axis {} has size {qp}, which is not prime",
                names[polarized]
            ))
        })?;
        let mut groups = Vec::with_capacity(side_groups.len());
        for &g in side_groups {
            if g.is_empty() || g.contains(&polarized) || g.iter().any(|&a| a >= joint.rank()) {
                return Err(Error::Dimension(format!("invalid side group {g:?}")));
            }
            let mut axes: Vec<usize> = g.to_vec();
            axes.push(polarized);
            let m = joint.marginal(&axes)?;
            let sizes: Vec<usize> = g.iter().map(|&a| joint.shape()[a]).collect();
            let combos = sizes.iter().product();
            groups.push(SideTable {
                axes: g.to_vec(),
                sizes,
                combos,
                weights: m.probs().to_vec(),
            });
        }
        let marginal = joint.marginal_pmf(polarized)?;
        let sampler = WeightedIndex::new(joint.probs())
            .map_err(|e| Error::InvalidPmf(e.to_string()))?;
        Ok(SourceSpec {
            names: names.iter().map(|s| s.to_string()).collect(),
            joint,
            polarized,
            modulus,
            groups,
            marginal,
            sampler,
            markov: None,
        })
    }

    /// Declares and checks the factorization `q(x, v, y) = q(x, v) q(y | v)`.
    pub fn with_markov(mut self, x: usize, v: usize, y: usize) -> Result<Self> {
        let j = &self.joint;
        let xv = j.marginal(&[x, v])?;
        let vy = j.marginal(&[v, y])?;
        let vm = j.marginal_pmf(v)?;
        for flat in 0..j.probs().len() {
            let idx = j.unravel(flat);
            let (xi, vi, yi) = (idx[x], idx[v], idx[y]);
            let pv = vm.p(vi);
            let expected = if pv > 0.0 {
                xv.at(&[xi, vi]) * vy.at(&[vi, yi]) / pv
            } else {
                0.0
            };
            if (j.probs()[flat] - expected).abs() > MARKOV_TOL {
                return Err(Error::Config(format!(
                    "joint does not factor as {} -> {} -> {}",
                    self.names[x], self.names[v], self.names[y]
                )));
            }
        }
        self.markov = Some([x, v, y]);
        Ok(self)
    }

    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn polarized_axis(&self) -> usize {
        self.polarized
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn q(&self) -> usize {
        self.modulus.size()
    }

    pub fn markov(&self) -> Option<[usize; 3]> {
        self.markov
    }

    /// Marginal of the polarized axis.
    pub fn marginal(&self) -> &Pmf {
        &self.marginal
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn group_axes(&self, g: usize) -> &[usize] {
        &self.groups[g].axes
    }

    /// Label such as `"X"` or `"X,Y"` naming a side group.
    pub fn group_label(&self, g: usize) -> String {
        self.groups[g]
            .axes
            .iter()
            .map(|&a| self.names[a].as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn group_by_axes(&self, axes: &[usize]) -> Option<usize> {
        self.groups.iter().position(|g| g.axes == axes)
    }

    fn group_for(&self, side: &SideSequence) -> Result<usize> {
        self.group_by_axes(&side.axes).ok_or_else(|| {
            Error::Dimension(format!("side axes {:?} are not a declared group", side.axes))
        })
    }

    /// Per-position likelihood vectors, flattened `N x q`. With `side`, entry
    /// `(i, a)` is `q(a, side_i)`; without, the polarized marginal.
    pub fn likelihoods(&self, side: Option<&SideSequence>, len: usize) -> Result<Vec<f64>> {
        let q = self.q();
        match side {
            None => Ok(self.marginal.probs().repeat(len)),
            Some(s) => {
                if s.len() != len {
                    return Err(Error::Dimension(format!(
                        "side length {} != block length {len}",
                        s.len()
                    )));
                }
                let table = &self.groups[self.group_for(s)?];
                let mut out = Vec::with_capacity(len * q);
                let mut vals = vec![0u32; s.axes.len()];
                for i in 0..len {
                    for (a, seq) in s.values.iter().enumerate() {
                        let v = seq[i];
                        if v as usize >= table.sizes[a] {
                            return Err(Error::SymbolOutOfRange {
                                symbol: v,
                                modulus: table.sizes[a] as u32,
                            });
                        }
                        vals[a] = v;
                    }
                    out.extend_from_slice(table.row(table.combo_index(&vals), q));
                }
                Ok(out)
            }
        }
    }

    /// Draws `len` iid letters of the full joint; returns one sequence per axis.
    pub fn sample_letters<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::with_capacity(len); self.joint.rank()];
        for _ in 0..len {
            let idx = self.joint.unravel(self.sampler.sample(rng));
            for (seq, v) in out.iter_mut().zip(idx) {
                seq.push(v as u32);
            }
        }
        out
    }

    /// Side sequence for group `g` extracted from per-axis letters.
    pub fn side_from_letters(&self, g: usize, letters: &[Vec<u32>]) -> SideSequence {
        let axes = self.groups[g].axes.clone();
        let values = axes.iter().map(|&a| letters[a].clone()).collect();
        SideSequence { axes, values }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimationMethod {
    Exact,
    MonteCarlo,
}

/// Standard errors attached to a Monte Carlo profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileErrors {
    pub h_unconditioned: Vec<f64>,
    pub h_conditioned: BTreeMap<String, Vec<f64>>,
    /// Standard error of the per-sample sum over all indices.
    pub total_unconditioned: f64,
    pub total_conditioned: BTreeMap<String, f64>,
}

pub const PROFILE_FORMAT_VERSION: u32 = 1;

/// `h[j] = H(U^j | U^{1:j-1})` and its side-conditioned variants, in bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarProfile {
    pub version: u32,
    pub n: u32,
    pub q: u32,
    pub h_unconditioned: Vec<f64>,
    pub h_conditioned: BTreeMap<String, Vec<f64>>,
    pub method: EstimationMethod,
    pub samples: Option<u64>,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<ProfileErrors>,
}

impl PolarProfile {
    pub fn block_len(&self) -> usize {
        1 << self.n
    }

    pub fn log_q(&self) -> f64 {
        f64::from(self.q).log2()
    }

    pub fn conditioned(&self, label: &str) -> Result<&[f64]> {
        self.h_conditioned
            .get(label)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Config(format!("profile has no conditioning on {label}")))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let p: PolarProfile = serde_json::from_str(s)?;
        if p.version != PROFILE_FORMAT_VERSION {
            return Err(Error::Config(format!("unsupported profile version {}", p.version)));
        }
        Ok(p)
    }
}

fn states(q: usize, combos: usize, len: usize) -> u128 {
    ((q * combos) as u128).saturating_pow(len as u32)
}

/// Exact `H(U^j | U^{1:j-1}, S^{1:N})` for a letter table `w[c][a]`.
///
/// For every side sequence the law of `U = X G_n` is the pushforward of the
/// product measure through the butterfly; prefix marginals then give the
/// chain `H(U^{1:j}, S) - H(U^{1:j-1}, S)`.
fn exact_entropies(modulus: Modulus, n: u32, combos: usize, weights: &[f64]) -> Vec<f64> {
    let q = modulus.size();
    let len = 1usize << n;
    let u_states = q.pow(len as u32);
    // joint_prefix[j] = sum over (prefix of length j, s) of plogp(P)
    let mut prefix_ent = vec![0.0f64; len + 1];
    let mut dist = vec![0.0f64; u_states];
    let mut x = vec![0u32; len];
    let mut s = vec![0usize; len];
    let side_states = combos.pow(len as u32);
    for s_code in 0..side_states {
        let mut c = s_code;
        for si in s.iter_mut().rev() {
            *si = c % combos;
            c /= combos;
        }
        dist.iter_mut().for_each(|d| *d = 0.0);
        let mut any = false;
        for x_code in 0..u_states {
            let mut c = x_code;
            for xi in x.iter_mut().rev() {
                *xi = (c % q) as u32;
                c /= q;
            }
            let p: f64 = x
                .iter()
                .zip(&s)
                .map(|(&xi, &si)| weights[si * q + xi as usize])
                .product();
            if p == 0.0 {
                continue;
            }
            any = true;
            field::transform_in_place(modulus, &mut x);
            let u_code = x.iter().fold(0usize, |acc, &u| acc * q + u as usize);
            dist[u_code] += p;
        }
        if !any {
            continue;
        }
        let mut level: Vec<f64> = dist.clone();
        for j in (0..=len).rev() {
            prefix_ent[j] += level.iter().map(|&p| plogp(p)).sum::<f64>();
            if j > 0 {
                level = level.chunks(q).map(|c| c.iter().sum()).collect();
            }
        }
    }
    (1..=len)
        .map(|j| (prefix_ent[j] - prefix_ent[j - 1]).max(0.0))
        .collect()
}

/// Exact profile by enumeration; fails with a budget error when
/// `(q * q_side)^N` exceeds `budget`.
pub fn exact_profile_with_budget(spec: &SourceSpec, n: u32, budget: u128) -> Result<PolarProfile> {
    let len = 1usize << n;
    let q = spec.q();
    let worst = (0..spec.group_count())
        .map(|g| spec.groups[g].combos)
        .max()
        .unwrap_or(1);
    let needed = states(q, worst, len);
    if needed > budget {
        return Err(Error::Budget {
            needed,
            budget,
            hint: "use mc_profile for this block length",
        });
    }
    let h_unconditioned = exact_entropies(spec.modulus, n, 1, spec.marginal.probs());
    let mut h_conditioned = BTreeMap::new();
    for g in 0..spec.group_count() {
        let t = &spec.groups[g];
        h_conditioned.insert(
            spec.group_label(g),
            exact_entropies(spec.modulus, n, t.combos, &t.weights),
        );
    }
    Ok(PolarProfile {
        version: PROFILE_FORMAT_VERSION,
        n,
        q: q as u32,
        h_unconditioned,
        h_conditioned,
        method: EstimationMethod::Exact,
        samples: None,
        seed: None,
        std_errors: None,
    })
}

pub fn exact_profile(spec: &SourceSpec, n: u32) -> Result<PolarProfile> {
    exact_profile_with_budget(spec, n, EXACT_BUDGET)
}

const MC_CHUNK: u64 = 256;

#[derive(Clone)]
struct McAccumulator {
    sum: Vec<Vec<f64>>,
    sumsq: Vec<Vec<f64>>,
    total: Vec<f64>,
    totalsq: Vec<f64>,
}

impl McAccumulator {
    fn new(channels: usize, len: usize) -> Self {
        McAccumulator {
            sum: vec![vec![0.0; len]; channels],
            sumsq: vec![vec![0.0; len]; channels],
            total: vec![0.0; channels],
            totalsq: vec![0.0; channels],
        }
    }

    fn merge(mut self, other: &McAccumulator) -> Self {
        for c in 0..self.sum.len() {
            for j in 0..self.sum[c].len() {
                self.sum[c][j] += other.sum[c][j];
                self.sumsq[c][j] += other.sumsq[c][j];
            }
            self.total[c] += other.total[c];
            self.totalsq[c] += other.totalsq[c];
        }
        self
    }
}

/// RNG for chunk `index` of a seeded computation; independent of thread count.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Genie-aided Monte Carlo profile.
///
/// Each sample draws `(x, side)` iid from the joint, then walks the SC
/// recursion along the true `u = x G_n`, recording the entropy of every exact
/// posterior. The mean over samples is unbiased for `h[j]`.
pub fn mc_profile(spec: &SourceSpec, n: u32, samples: u64, seed: u64) -> Result<PolarProfile> {
    if samples == 0 {
        return Err(Error::Config("mc_profile needs at least one sample".into()));
    }
    let len = 1usize << n;
    let q = spec.q();
    let channels = 1 + spec.group_count();
    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<Result<McAccumulator>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut acc = McAccumulator::new(channels, len);
            let mut sample_h = vec![vec![0.0; len]; channels];
            for _ in 0..count {
                let letters = spec.sample_letters(len, &mut rng);
                let mut u_true = letters[spec.polarized].clone();
                field::transform_in_place(spec.modulus, &mut u_true);
                let mut liks = Vec::with_capacity(channels);
                liks.push(spec.likelihoods(None, len)?);
                for g in 0..spec.group_count() {
                    let side = spec.side_from_letters(g, &letters);
                    liks.push(spec.likelihoods(Some(&side), len)?);
                }
                let mut walk = Walk::new(q, liks);
                walk.run(|j, posts| {
                    for (c, post) in posts.iter().enumerate() {
                        sample_h[c][j] = post.iter().map(|&p| plogp(p)).sum();
                    }
                    Ok(u_true[j])
                })?;
                for c in 0..channels {
                    let mut t = 0.0;
                    for j in 0..len {
                        let h = sample_h[c][j];
                        acc.sum[c][j] += h;
                        acc.sumsq[c][j] += h * h;
                        t += h;
                    }
                    acc.total[c] += t;
                    acc.totalsq[c] += t * t;
                }
            }
            Ok(acc)
        })
        .collect();
    let mut acc = McAccumulator::new(channels, len);
    for p in partials {
        acc = acc.merge(&p?);
    }
    let m = samples as f64;
    let mean = |s: &[f64]| s.iter().map(|v| v / m).collect::<Vec<f64>>();
    let se = |s: f64, sq: f64| {
        if samples < 2 {
            return f64::NAN;
        }
        let mu = s / m;
        let var = ((sq / m - mu * mu) * m / (m - 1.0)).max(0.0);
        (var / m).sqrt()
    };
    let se_vec = |c: usize| {
        (0..len)
            .map(|j| se(acc.sum[c][j], acc.sumsq[c][j]))
            .collect::<Vec<f64>>()
    };
    let mut h_conditioned = BTreeMap::new();
    let mut se_conditioned = BTreeMap::new();
    let mut total_conditioned = BTreeMap::new();
    for g in 0..spec.group_count() {
        let label = spec.group_label(g);
        h_conditioned.insert(label.clone(), mean(&acc.sum[g + 1]));
        se_conditioned.insert(label.clone(), se_vec(g + 1));
        total_conditioned.insert(label, se(acc.total[g + 1], acc.totalsq[g + 1]));
    }
    Ok(PolarProfile {
        version: PROFILE_FORMAT_VERSION,
        n,
        q: q as u32,
        h_unconditioned: mean(&acc.sum[0]),
        h_conditioned,
        method: EstimationMethod::MonteCarlo,
        samples: Some(samples),
        seed: Some(seed),
        std_errors: Some(ProfileErrors {
            h_unconditioned: se_vec(0),
            h_conditioned: se_conditioned,
            total_unconditioned: se(acc.total[0], acc.totalsq[0]),
            total_conditioned,
        }),
    })
}

/// Threshold choice for the "very high" and "high" sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum Thresholds {
    /// Fixed `delta_v` / `delta_h` at every block length.
    Explicit { delta_v: f64, delta_h: f64 },
    /// `delta = 2^{-N^beta}` for both sets.
    Decaying { beta: f64 },
}

impl Thresholds {
    pub fn resolve(&self, block_len: usize) -> (f64, f64) {
        match *self {
            Thresholds::Explicit { delta_v, delta_h } => (delta_v, delta_h),
            Thresholds::Decaying { beta } => {
                let d = 2f64.powf(-(block_len as f64).powf(beta));
                (d, d)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Thresholds::Explicit { delta_v, delta_h } => {
                format!("explicit(delta_v={delta_v}, delta_h={delta_h})")
            }
            Thresholds::Decaying { beta } => format!("decaying(beta={beta})"),
        }
    }
}

/// `V` ("very high entropy") and `H` ("high entropy") sets for one conditioning.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetPair {
    pub very_high: BTreeSet<usize>,
    pub high: BTreeSet<usize>,
}

/// The strong-coordination partition of `[0, N)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    /// Low-entropy positions, drawn without side information.
    pub f1: BTreeSet<usize>,
    /// Positions frozen to recycled common randomness.
    pub f2: BTreeSet<usize>,
    /// Positions frozen to fresh common randomness.
    pub f3: BTreeSet<usize>,
    /// Message positions.
    pub f4: BTreeSet<usize>,
}

impl Partition {
    pub fn sizes(&self) -> [usize; 4] {
        [self.f1.len(), self.f2.len(), self.f3.len(), self.f4.len()]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexSets {
    pub block_len: usize,
    pub q: u32,
    pub delta_v: f64,
    pub delta_h: f64,
    pub unconditioned: SetPair,
    pub conditioned: BTreeMap<String, SetPair>,
    /// Indices whose membership was tightened so that more conditioning never
    /// enlarges a set. Always zero for exact profiles.
    pub clamped: usize,
}

fn label_axes(label: &str) -> BTreeSet<&str> {
    label.split(',').collect()
}

impl IndexSets {
    pub fn conditioned(&self, label: &str) -> Result<&SetPair> {
        self.conditioned
            .get(label)
            .ok_or_else(|| Error::Config(format!("index sets have no conditioning on {label}")))
    }

    /// Builds `F1 = H^c`, `F2 = V_{|XY}`, `F3 = V_{|X} \ V_{|XY}`, `F4 = H \ V_{|X}`
    /// and checks that it partitions `[0, N)`.
    pub fn partition(&self, side_x: &str, side_xy: &str) -> Result<Partition> {
        let h = &self.unconditioned.high;
        let vx = &self.conditioned(side_x)?.very_high;
        let vxy = &self.conditioned(side_xy)?.very_high;
        let all: BTreeSet<usize> = (0..self.block_len).collect();
        let p = Partition {
            f1: all.difference(h).copied().collect(),
            f2: vxy.clone(),
            f3: vx.difference(vxy).copied().collect(),
            f4: h.difference(vx).copied().collect(),
        };
        let total: usize = p.sizes().iter().sum();
        let union: BTreeSet<usize> = p
            .f1
            .iter()
            .chain(&p.f2)
            .chain(&p.f3)
            .chain(&p.f4)
            .copied()
            .collect();
        if total != self.block_len || union != all {
            return Err(Error::Config("F1..F4 do not partition the block".into()));
        }
        Ok(p)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// `V = {j : h[j] > log q - delta_v}` and `H = {j : h[j] > delta_h}` for every
/// conditioning in the profile.
pub fn index_sets(profile: &PolarProfile, delta_v: f64, delta_h: f64) -> Result<IndexSets> {
    let log_q = profile.log_q();
    for (name, d) in [("delta_v", delta_v), ("delta_h", delta_h)] {
        if !(d > 0.0 && d < log_q) {
            return Err(Error::Config(format!("{name} = {d} must lie in (0, log2 q = {log_q})")));
        }
    }
    if delta_v + delta_h >= log_q {
        return Err(Error::Config(format!(
            "delta_v + delta_h = {} >= log2 q = {log_q}: a very-high set could escape its high set",
            delta_v + delta_h
        )));
    }
    let len = profile.block_len();
    let sets_of = |h: &[f64]| SetPair {
        very_high: (0..len).filter(|&j| h[j] > log_q - delta_v).collect(),
        high: (0..len).filter(|&j| h[j] > delta_h).collect(),
    };
    let unconditioned = sets_of(&profile.h_unconditioned);
    let raw: BTreeMap<String, SetPair> = profile
        .h_conditioned
        .iter()
        .map(|(k, h)| (k.clone(), sets_of(h)))
        .collect();

    // More conditioning may only shrink a set: intersect with every coarser
    // conditioning (including none). Estimated profiles can violate this by noise.
    let mut conditioned = BTreeMap::new();
    let mut clamped = 0;
    for (label, pair) in &raw {
        let axes = label_axes(label);
        let mut vh = pair.very_high.clone();
        let mut hi = pair.high.clone();
        let coarser = std::iter::once(&unconditioned).chain(
            raw.iter()
                .filter(|(l, _)| *l != label && label_axes(l).is_subset(&axes))
                .map(|(_, p)| p),
        );
        for other in coarser {
            vh = vh.intersection(&other.very_high).copied().collect();
            hi = hi.intersection(&other.high).copied().collect();
        }
        clamped += pair.very_high.len() - vh.len() + pair.high.len() - hi.len();
        conditioned.insert(label.clone(), SetPair { very_high: vh, high: hi });
    }
    Ok(IndexSets {
        block_len: len,
        q: profile.q,
        delta_v,
        delta_h,
        unconditioned,
        conditioned,
        clamped,
    })
}

/// Least prime `>= m`.
pub fn smallest_prime_geq(m: u32) -> u32 {
    let mut c = m.max(2);
    while !is_prime(c) {
        c += 1;
    }
    c
}
