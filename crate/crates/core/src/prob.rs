//! Finite distributions and the information measures used throughout.
//!
//! All quantities are in bits. The variational distance is the plain L1
//! distance (no factor 1/2), and `D(p||q)` is `+inf` whenever `q(x) = 0 < p(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

fn check_entries(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidPmf("empty alphabet".into()));
    }
    if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidPmf(format!("entry {bad} is not a probability")));
    }
    let total = compensated_sum(probs);
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidPmf(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Neumaier-compensated sum; accurate for long probability tables.
pub fn compensated_sum(v: &[f64]) -> f64 {
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for &x in v {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

/// `-p log2 p` with `0 log 0 = 0`.
#[inline]
pub fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Entropy of an unnormalized nonnegative vector after normalization.
pub fn entropy_of_weights(w: &[f64]) -> f64 {
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    w.iter().map(|&x| plogp(x / total)).sum()
}

/// A probability mass function over `[0, q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_entries(&probs)?;
        Ok(Pmf { probs })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| *w < 0.0) {
            return Err(Error::InvalidPmf("weights must be nonnegative with positive sum".into()));
        }
        Ok(Pmf {
            probs: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(q: usize) -> Self {
        Pmf {
            probs: vec![1.0 / q as f64; q],
        }
    }

    pub fn point_mass(q: usize, at: usize) -> Self {
        let mut probs = vec![0.0; q];
        probs[at] = 1.0;
        Pmf { probs }
    }

    pub fn bernoulli(p1: f64) -> Result<Self> {
        Pmf::new(vec![1.0 - p1, p1])
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn p(&self, x: usize) -> f64 {
        self.probs[x]
    }

    /// `min_x q(x)`.
    pub fn min_mass(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

/// Shannon entropy in bits.
pub fn entropy(p: &Pmf) -> f64 {
    p.probs.iter().map(|&x| plogp(x)).sum()
}

/// Binary entropy function.
pub fn h2(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("alphabet sizes {a} and {b} differ")));
    }
    Ok(())
}

/// `D(p||q)` in bits over raw probability slices.
pub fn kl_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi > 0.0 {
            if qi <= 0.0 {
                return f64::INFINITY;
            }
            d += pi * (pi / qi).log2();
        }
    }
    // Rounding can push tiny divergences below zero.
    d.max(0.0)
}

/// `D(p||q)` in bits; `+inf` if `p` is not absolutely continuous w.r.t. `q`.
pub fn kl_divergence(p: &Pmf, q: &Pmf) -> Result<f64> {
    same_len(p.probs.len(), q.probs.len())?;
    Ok(kl_slices(&p.probs, &q.probs))
}

/// Unhalved L1 distance over raw slices.
pub fn l1_slices(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum()
}

/// `V(p, q) = sum |p - q|`, in `[0, 2]`.
pub fn variational_distance(p: &Pmf, q: &Pmf) -> Result<f64> {
    same_len(p.probs.len(), q.probs.len())?;
    Ok(l1_slices(&p.probs, &q.probs))
}

/// A joint distribution stored row-major over its axes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    shape: Vec<usize>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.contains(&0) {
            return Err(Error::Dimension("joint needs at least one nonempty axis".into()));
        }
        let size: usize = shape.iter().product();
        if size != probs.len() {
            return Err(Error::Dimension(format!(
                "shape {shape:?} holds {size} entries, got {}",
                probs.len()
            )));
        }
        check_entries(&probs)?;
        Ok(JointPmf { shape, probs })
    }

    /// Product `p_X(x) * p_{Y|X}(y|x)` laid out as a two-axis joint.
    pub fn from_marginal_and_channel(px: &Pmf, channel: &[Vec<f64>]) -> Result<Self> {
        if channel.len() != px.alphabet_size() {
            return Err(Error::Dimension("channel rows must match input alphabet".into()));
        }
        let qy = channel.first().map_or(0, Vec::len);
        let mut probs = Vec::with_capacity(px.alphabet_size() * qy);
        for (x, row) in channel.iter().enumerate() {
            if row.len() != qy {
                return Err(Error::Dimension("ragged channel matrix".into()));
            }
            probs.extend(row.iter().map(|w| px.p(x) * w));
        }
        JointPmf::new(vec![px.alphabet_size(), qy], probs)
    }

    /// Doubly symmetric binary source: uniform X, Y = X flipped w.p. `crossover`.
    pub fn dsbs(crossover: f64) -> Result<Self> {
        let a = (1.0 - crossover) / 2.0;
        let b = crossover / 2.0;
        JointPmf::new(vec![2, 2], vec![a, b, b, a])
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.shape.len()];
        for a in (0..self.shape.len().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.shape[a + 1];
        }
        strides
    }

    /// Multi-index of a flat position.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        let flat: usize = idx
            .iter()
            .zip(self.strides())
            .map(|(i, s)| i * s)
            .sum();
        self.probs[flat]
    }

    fn check_axes(&self, axes: &[usize]) -> Result<()> {
        for (i, &a) in axes.iter().enumerate() {
            if a >= self.shape.len() || axes[..i].contains(&a) {
                return Err(Error::Dimension(format!("invalid axis list {axes:?}")));
            }
        }
        Ok(())
    }

    /// Marginal over `axes`, kept in the order given.
    pub fn marginal(&self, axes: &[usize]) -> Result<JointPmf> {
        self.check_axes(axes)?;
        if axes.is_empty() {
            return JointPmf::new(vec![1], vec![1.0]);
        }
        let shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let mut out = vec![0.0; shape.iter().product()];
        let mut out_strides = vec![1; axes.len()];
        for a in (0..axes.len() - 1).rev() {
            out_strides[a] = out_strides[a + 1] * shape[a + 1];
        }
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let idx = self.unravel(flat);
            let o: usize = axes
                .iter()
                .zip(&out_strides)
                .map(|(&a, s)| idx[a] * s)
                .sum();
            out[o] += p;
        }
        Ok(JointPmf { shape, probs: out })
    }

    /// Single-axis marginal as a [`Pmf`].
    pub fn marginal_pmf(&self, axis: usize) -> Result<Pmf> {
        Ok(Pmf {
            probs: self.marginal(&[axis])?.probs,
        })
    }

    /// Flattens to a [`Pmf`] over the product alphabet.
    pub fn flatten(&self) -> Pmf {
        Pmf {
            probs: self.probs.clone(),
        }
    }

    /// Entropy of the marginal over `axes`.
    pub fn entropy_of(&self, axes: &[usize]) -> Result<f64> {
        Ok(self.marginal(axes)?.probs.iter().map(|&p| plogp(p)).sum())
    }

    /// `H(target | given)`.
    pub fn conditional_entropy(&self, target: &[usize], given: &[usize]) -> Result<f64> {
        let both: Vec<usize> = given.iter().chain(target).copied().collect();
        Ok(self.entropy_of(&both)? - self.entropy_of(given)?)
    }

    /// Product of the single-axis marginals.
    pub fn product_of_marginals(&self) -> Result<JointPmf> {
        let marginals: Vec<Pmf> = (0..self.rank())
            .map(|a| self.marginal_pmf(a))
            .collect::<Result<_>>()?;
        let probs = (0..self.probs.len())
            .map(|flat| {
                self.unravel(flat)
                    .iter()
                    .zip(&marginals)
                    .map(|(&i, m)| m.p(i))
                    .product()
            })
            .collect();
        Ok(JointPmf {
            shape: self.shape.clone(),
            probs,
        })
    }

    /// Whether every entry is strictly positive.
    pub fn full_support(&self) -> bool {
        self.probs.iter().all(|&p| p > 0.0)
    }
}

/// `I(A; B)` between two disjoint axis groups.
pub fn mutual_information(j: &JointPmf, a: &[usize], b: &[usize]) -> Result<f64> {
    if a.is_empty() || b.is_empty() || a.iter().any(|x| b.contains(x)) {
        return Err(Error::Dimension("partition groups must be nonempty and disjoint".into()));
    }
    let both: Vec<usize> = a.iter().chain(b).copied().collect();
    let mi = j.entropy_of(a)? + j.entropy_of(b)? - j.entropy_of(&both)?;
    Ok(mi.max(0.0))
}

/// `D(p||q)` between joints of equal shape.
pub fn kl_joint(p: &JointPmf, q: &JointPmf) -> Result<f64> {
    if p.shape != q.shape {
        return Err(Error::Dimension("joint shapes differ".into()));
    }
    Ok(kl_slices(&p.probs, &q.probs))
}

/// `V(p, q)` between joints of equal shape.
pub fn variational_distance_joint(p: &JointPmf, q: &JointPmf) -> Result<f64> {
    if p.shape != q.shape {
        return Err(Error::Dimension("joint shapes differ".into()));
    }
    Ok(l1_slices(&p.probs, &q.probs))
}

/// `E_{p_X}[ D(p_{Y|X} || q_{Y|X}) ]` for two-axis joints `(X, Y)`.
pub fn conditional_kl(p: &JointPmf, q: &JointPmf) -> Result<f64> {
    if p.shape != q.shape || p.rank() != 2 {
        return Err(Error::Dimension("conditional divergence needs equal (X, Y) joints".into()));
    }
    let (nx, ny) = (p.shape[0], p.shape[1]);
    let mut total = 0.0;
    for x in 0..nx {
        let prow = &p.probs[x * ny..(x + 1) * ny];
        let qrow = &q.probs[x * ny..(x + 1) * ny];
        let px: f64 = prow.iter().sum();
        if px <= 0.0 {
            continue;
        }
        let qx: f64 = qrow.iter().sum();
        if qx <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let pc: Vec<f64> = prow.iter().map(|v| v / px).collect();
        let qc: Vec<f64> = qrow.iter().map(|v| v / qx).collect();
        total += px * kl_slices(&pc, &qc);
    }
    Ok(total)
}

/// Joint histogram of a pair of equal-length sequences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeHistogram {
    qx: usize,
    qy: usize,
    counts: Vec<u64>,
    len: u64,
}

impl TypeHistogram {
    pub fn empty(qx: usize, qy: usize) -> Self {
        TypeHistogram {
            qx,
            qy,
            counts: vec![0; qx * qy],
            len: 0,
        }
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.len.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn freq(&self, x: usize, y: usize) -> f64 {
        self.counts[x * self.qy + y] as f64 / self.len.max(1) as f64
    }

    /// Adds another block's counts; the result is the type of the concatenation.
    pub fn absorb(&mut self, other: &TypeHistogram) -> Result<()> {
        if self.qx != other.qx || self.qy != other.qy {
            return Err(Error::Dimension("histogram alphabets differ".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.len += other.len;
        Ok(())
    }

    /// `V(target, T)`.
    pub fn distance_to(&self, target: &JointPmf) -> Result<f64> {
        if target.shape() != [self.qx, self.qy] {
            return Err(Error::Dimension("target shape does not match histogram".into()));
        }
        Ok(l1_slices(&self.frequencies(), target.probs()))
    }
}

/// `T(x, y) = (1/N) sum_i 1{(x_i, y_i) = (x, y)}`.
pub fn joint_type(x: &[u32], y: &[u32], qx: usize, qy: usize) -> Result<TypeHistogram> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "sequence lengths {} and {} differ",
            x.len(),
            y.len()
        )));
    }
    let mut t = TypeHistogram::empty(qx, qy);
    for (&a, &b) in x.iter().zip(y) {
        let (a, b) = (a as usize, b as usize);
        if a >= qx || b >= qy {
            return Err(Error::Dimension(format!("pair ({a}, {b}) outside alphabet")));
        }
        t.counts[a * qy + b] += 1;
    }
    t.len = x.len() as u64;
    Ok(t)
}

/// One line of a bound audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` when the relation does not apply to the given inputs.
    pub holds: Option<bool>,
    pub note: String,
}

impl BoundRow {
    pub fn inequality(name: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        BoundRow {
            name: name.into(),
            lhs,
            rhs,
            holds: Some(lhs <= rhs + slack),
            note: String::new(),
        }
    }

    pub fn skipped(name: &str, note: &str) -> Self {
        BoundRow {
            name: name.into(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            holds: None,
            note: note.into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    /// True when every applicable row holds.
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds != Some(false))
    }

    pub fn row(&self, name: &str) -> Option<&BoundRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

pub const SQRT_2LN2: f64 = 1.177_410_022_515_474_6;
const BOUND_SLACK: f64 = 1e-12;

/// `log2(1/mu) * sqrt(2 ln 2) * sqrt(d)` with `0 * inf = 0` handled explicitly.
fn mu_factor_times(mu: f64, root_terms: f64) -> f64 {
    let factor = (1.0 / mu).log2();
    if factor == 0.0 || root_terms == 0.0 {
        0.0
    } else {
        factor * SQRT_2LN2 * root_terms
    }
}

pub const SYMMETRY: &str = "symmetry";
pub const TRIANGLE: &str = "triangle";
pub const ENTROPY_DIFFERENCE: &str = "entropy-difference";
pub const INDEPENDENCE: &str = "independence-identity";

/// Evaluates both sides of the four divergence relations that apply to the
/// inputs: the symmetry bound `D(p||q) <= log(1/mu_q) sqrt(2 ln 2) sqrt(D(q||p))`,
/// the triangle-style bound through `r`, the entropy-difference bound, and the
/// independence identity `D(p_{1:k} || prod p_i) = sum_{i>=2} I(X_i; X_{1:i-1})`
/// on `joint`.
///
/// The entropy-difference bound is only evaluated when
/// `D = sqrt(2 ln 2) sqrt(min(D(p||q), D(q||p))) <= 1/e`.
pub fn divergence_bounds(
    p: &Pmf,
    q: &Pmf,
    r: Option<&Pmf>,
    joint: Option<&JointPmf>,
) -> Result<BoundReport> {
    same_len(p.alphabet_size(), q.alphabet_size())?;
    let mut rows = Vec::new();
    let d_pq = kl_slices(&p.probs, &q.probs);
    let d_qp = kl_slices(&q.probs, &p.probs);
    let mu_q = q.min_mass();

    if mu_q <= 0.0 {
        rows.push(BoundRow::skipped(SYMMETRY, "mu_q = 0"));
    } else {
        rows.push(BoundRow::inequality(
            SYMMETRY,
            d_pq,
            mu_factor_times(mu_q, d_qp.sqrt()),
            BOUND_SLACK,
        ));
    }

    match r {
        Some(r) if mu_q > 0.0 => {
            same_len(p.alphabet_size(), r.alphabet_size())?;
            let a = kl_slices(&p.probs, &r.probs).min(kl_slices(&r.probs, &p.probs));
            let b = kl_slices(&q.probs, &r.probs).min(kl_slices(&r.probs, &q.probs));
            rows.push(BoundRow::inequality(
                TRIANGLE,
                d_pq,
                mu_factor_times(mu_q, a.sqrt() + b.sqrt()),
                BOUND_SLACK,
            ));
        }
        Some(_) => rows.push(BoundRow::skipped(TRIANGLE, "mu_q = 0")),
        None => {}
    }

    let d = SQRT_2LN2 * d_pq.min(d_qp).sqrt();
    let dh = (entropy(q) - entropy(p)).abs();
    if d == 0.0 {
        rows.push(BoundRow::inequality(ENTROPY_DIFFERENCE, dh, 0.0, 1e-12));
    } else if d <= (-1.0f64).exp() {
        let rhs = d * (p.alphabet_size() as f64 / d).log2();
        rows.push(BoundRow::inequality(ENTROPY_DIFFERENCE, dh, rhs, BOUND_SLACK));
    } else {
        rows.push(BoundRow::skipped(ENTROPY_DIFFERENCE, "D above 1/e"));
    }

    if let Some(j) = joint {
        let lhs = kl_joint(j, &j.product_of_marginals()?)?;
        let mut rhs = 0.0;
        for i in 1..j.rank() {
            let prev: Vec<usize> = (0..i).collect();
            rhs += mutual_information(j, &[i], &prev)?;
        }
        rows.push(BoundRow {
            name: INDEPENDENCE.into(),
            lhs,
            rhs,
            holds: Some((lhs - rhs).abs() <= 1e-10),
            note: "equality".into(),
        });
    }

    Ok(BoundReport { rows })
}
