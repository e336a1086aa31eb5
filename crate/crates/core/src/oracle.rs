//! Brute-force ground truth for tiny block lengths.
//!
//! Nothing here touches the butterfly transform or the SC recursion: the
//! polar matrix is built explicitly as a Kronecker power, conditionals come
//! from prefix marginals of fully enumerated block laws, and induced laws
//! sum over every value of the frozen randomness with its exact weight.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{compensated_sum, kl_slices, l1_slices, plogp, JointPmf};

/// Default cap on the number of outcomes an enumeration may touch.
pub const ORACLE_BUDGET: u128 = 1 << 26;

/// `G_n` over GF(q) as an explicit `N x N` matrix.
pub fn kron_matrix(q: u32, n: u32) -> Vec<Vec<u32>> {
    let mut g = vec![vec![1u32]];
    for _ in 0..n {
        let m = g.len();
        let mut next = vec![vec![0u32; 2 * m]; 2 * m];
        for (bi, brow) in [[1u32, 0], [1, 1]].iter().enumerate() {
            for (bj, &b) in brow.iter().enumerate() {
                for i in 0..m {
                    for j in 0..m {
                        next[bi * m + i][bj * m + j] = (b * g[i][j]) % q;
                    }
                }
            }
        }
        g = next;
    }
    g
}

fn digits(mut code: usize, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for i in (0..len).rev() {
        d[i] = code % base;
        code /= base;
    }
    d
}

fn code_of(d: &[usize], base: usize) -> usize {
    d.iter().fold(0, |acc, &v| acc * base + v)
}

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        return Err(Error::Budget {
            needed,
            budget,
            hint: "reduce n or k for exact enumeration",
        });
    }
    Ok(())
}

fn pow(base: usize, e: usize) -> u128 {
    (base as u128).saturating_pow(e as u32)
}

fn prod(v: &[u128]) -> u128 {
    v.iter().fold(1u128, |a, &b| a.saturating_mul(b))
}

/// Law of `(U, S)` for one block, `U = X G_n` with `(X_i, S_i)` iid from a
/// letter table, stored as prefix marginals `P(u^{1:j}, s)`.
struct BlockModel {
    q: usize,
    len: usize,
    /// `prefix[s][j][c]` with `c` the base-q code of `u^{1:j}`.
    prefix: Vec<Vec<Vec<f64>>>,
    /// Same with the side sequence summed out.
    prefix_free: Vec<Vec<f64>>,
    /// `x` code for every `u` code.
    x_of_u: Vec<usize>,
}

impl BlockModel {
    /// `w[s * q + a] = P(side letter s, polarized letter a)`.
    fn new(q: usize, m: usize, n: u32, w: &[f64]) -> Self {
        let len = 1usize << n;
        let g = kron_matrix(q as u32, n);
        let states = q.pow(len as u32);
        let mut u_of_x = vec![0usize; states];
        let mut x_of_u = vec![0usize; states];
        for xc in 0..states {
            let x = digits(xc, q, len);
            let u: Vec<usize> = (0..len)
                .map(|j| (0..len).map(|i| x[i] * g[i][j] as usize).sum::<usize>() % q)
                .collect();
            let uc = code_of(&u, q);
            u_of_x[xc] = uc;
            x_of_u[uc] = xc;
        }
        let sides = m.pow(len as u32);
        let mut prefix = Vec::with_capacity(sides);
        let mut prefix_free: Vec<Vec<f64>> = (0..=len).map(|j| vec![0.0; q.pow(j as u32)]).collect();
        for sc in 0..sides {
            let s = digits(sc, m, len);
            let mut full = vec![0.0; states];
            for xc in 0..states {
                let x = digits(xc, q, len);
                let p: f64 = (0..len).map(|i| w[s[i] * q + x[i]]).product();
                full[u_of_x[xc]] += p;
            }
            let mut levels = vec![Vec::new(); len + 1];
            levels[len] = full;
            for j in (0..len).rev() {
                levels[j] = levels[j + 1].chunks(q).map(|c| c.iter().sum()).collect();
            }
            for (acc, l) in prefix_free.iter_mut().zip(&levels) {
                for (a, v) in acc.iter_mut().zip(l) {
                    *a += v;
                }
            }
            prefix.push(levels);
        }
        BlockModel {
            q,
            len,
            prefix,
            prefix_free,
            x_of_u,
        }
    }

    fn side_prob(&self, s: usize) -> f64 {
        self.prefix[s][0][0]
    }

    /// `P(u_j = a | u^{1:j-1} = c[, s])`.
    fn cond(&self, s: Option<usize>, j: usize, c: usize, a: usize) -> f64 {
        let t = match s {
            Some(s) => &self.prefix[s],
            None => &self.prefix_free,
        };
        let den = t[j][c];
        if den > 0.0 {
            t[j + 1][c * self.q + a] / den
        } else {
            0.0
        }
    }

    /// `H(U_j | U^{1:j-1}[, S])` for every `j`, from the prefix tables.
    fn entropies(&self, with_side: bool) -> Vec<f64> {
        let tables: Vec<&Vec<Vec<f64>>> = if with_side {
            self.prefix.iter().collect()
        } else {
            vec![&self.prefix_free]
        };
        let joint_h = |j: usize| -> f64 {
            tables.iter().map(|t| t[j].iter().map(|&p| plogp(p)).sum::<f64>()).sum()
        };
        (0..self.len).map(|j| joint_h(j + 1) - joint_h(j)).collect()
    }

    /// Law of `x` given side code `s` under a per-index rule list.
    fn induced_x(&self, rules: &[OracleRule], pinned: &[Option<usize>], s: usize) -> Vec<f64> {
        let q = self.q;
        let mut out = vec![0.0; self.x_of_u.len()];
        let mut stack = vec![(0usize, 0usize, 1.0f64)];
        while let Some((j, c, w)) = stack.pop() {
            if j == self.len {
                out[self.x_of_u[c]] += w;
                continue;
            }
            for a in 0..q {
                let f = match rules[j] {
                    OracleRule::Pinned => (pinned[j] == Some(a)) as u8 as f64,
                    OracleRule::Uniform => 1.0 / q as f64,
                    OracleRule::WithSide => self.cond(Some(s), j, c, a),
                    OracleRule::WithoutSide => self.cond(None, j, c, a),
                    OracleRule::ArgmaxWithoutSide => {
                        let best = (0..q)
                            .fold(0, |b, t| if self.cond(None, j, c, t) > self.cond(None, j, c, b) { t } else { b });
                        (a == best) as u8 as f64
                    }
                };
                if f > 0.0 {
                    stack.push((j + 1, c * q + a, w * f));
                }
            }
        }
        out
    }
}

/// Per-index rule as the oracle reads it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum OracleRule {
    /// Equal to a symbol of the recycled randomness.
    Pinned,
    /// Fresh uniform randomness (averaged out).
    Uniform,
    WithSide,
    WithoutSide,
    ArgmaxWithoutSide,
}

fn rules_from(len: usize, default: OracleRule, groups: &[(&BTreeSet<usize>, OracleRule)]) -> Result<Vec<OracleRule>> {
    let mut r = vec![default; len];
    for (set, rule) in groups {
        for &j in set.iter() {
            if j >= len {
                return Err(Error::Dimension(format!("index {j} outside block of length {len}")));
            }
            r[j] = *rule;
        }
    }
    Ok(r)
}

fn pinned_values(set: &BTreeSet<usize>, code: usize, q: usize, len: usize) -> Vec<Option<usize>> {
    let vals = digits(code, q, set.len());
    let mut out = vec![None; len];
    for (&j, v) in set.iter().zip(vals) {
        out[j] = Some(v);
    }
    out
}

/// `w[s * q + a]` for a two-axis marginal `(side, polarized)`.
fn letter_table(joint: &JointPmf, side: usize, polarized: usize) -> Result<Vec<f64>> {
    Ok(joint.marginal(&[side, polarized])?.probs().to_vec())
}

/// A protocol as the oracle sees it: a letter-level target plus index sets.
#[derive(Clone, Debug)]
pub enum OracleScheme {
    /// Joint over `(X, Y)`; `X` drawn through the polar sampler, `Y` from `q_{Y|X}`.
    Resolvability {
        joint: JointPmf,
        recycled: BTreeSet<usize>,
        fresh: BTreeSet<usize>,
        refresh_recycled: bool,
    },
    /// Joint over `(X, Y)`; `X` iid, `Y` through the polar sampler with side `X`.
    Empirical {
        joint: JointPmf,
        common: BTreeSet<usize>,
        message: BTreeSet<usize>,
        deterministic_low: bool,
    },
    /// Joint over `(X, V, Y)`; `V` sampled with side `X`, `Y` simulated from `V`.
    Strong {
        joint: JointPmf,
        f1: BTreeSet<usize>,
        f2: BTreeSet<usize>,
        f3: BTreeSet<usize>,
        f4: BTreeSet<usize>,
        local: BTreeSet<usize>,
    },
}

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub scheme: OracleScheme,
    pub n: u32,
    pub k: usize,
    pub budget: u128,
}

impl OracleConfig {
    pub fn new(scheme: OracleScheme, n: u32, k: usize) -> Self {
        OracleConfig {
            scheme,
            n,
            k,
            budget: ORACLE_BUDGET,
        }
    }
}

/// Exact joint law over named variables, each a whole block or a whole
/// randomness vector encoded as one base-q integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnumeratedLaw {
    names: Vec<String>,
    shape: Vec<usize>,
    probs: Vec<f64>,
    /// Axes holding the sequences of each block, in target-letter order.
    blocks: Vec<Vec<usize>>,
    /// Axis of the recycled randomness; the first block's copy when refreshed.
    recycled: Option<usize>,
    /// Letter alphabet of each block axis.
    letter_sizes: Vec<usize>,
    block_len: usize,
}

impl EnumeratedLaw {
    fn build(
        names: Vec<String>,
        shape: Vec<usize>,
        probs: Vec<f64>,
        blocks: Vec<Vec<usize>>,
        recycled: Option<usize>,
        letter_sizes: Vec<usize>,
        block_len: usize,
    ) -> Result<Self> {
        let total = compensated_sum(&probs);
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPmf(format!("enumerated weights sum to {total}")));
        }
        Ok(EnumeratedLaw {
            names,
            shape,
            probs,
            blocks,
            recycled,
            letter_sizes,
            block_len,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    /// Names of the sequence variables of block `i` (0-based).
    pub fn block_names(&self, i: usize) -> Vec<String> {
        self.blocks[i].iter().map(|&a| self.names[a].clone()).collect()
    }

    pub fn recycled_name(&self) -> Option<&str> {
        self.recycled.map(|a| self.names[a].as_str())
    }

    pub fn axis(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Dimension(format!("no variable named {name}")))
    }

    /// Marginal over the named variables, in the order given.
    pub fn marginal(&self, names: &[&str]) -> Result<JointPmf> {
        let axes: Vec<usize> = names.iter().map(|n| self.axis(n)).collect::<Result<_>>()?;
        let shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        if shape.is_empty() {
            return JointPmf::new(vec![1], vec![1.0]);
        }
        let mut strides = vec![1usize; self.shape.len()];
        for a in (0..self.shape.len() - 1).rev() {
            strides[a] = strides[a + 1] * self.shape[a + 1];
        }
        let mut out = vec![0.0; shape.iter().product()];
        for (flat, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let o = axes
                .iter()
                .fold(0, |acc, &a| acc * self.shape[a] + (flat / strides[a]) % self.shape[a]);
            out[o] += p;
        }
        let s = compensated_sum(&out);
        JointPmf::new(shape, out.iter().map(|v| v / s).collect())
    }

    pub fn entropy(&self, names: &[&str]) -> Result<f64> {
        Ok(self.marginal(names)?.probs().iter().map(|&p| plogp(p)).sum())
    }

    /// `I(A; B)` between two disjoint groups of named variables.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        let ab: Vec<&str> = a.iter().chain(b).copied().collect();
        Ok((self.entropy(a)? + self.entropy(b)? - self.entropy(&ab)?).max(0.0))
    }

    /// Law of block `i`'s sequences, flattened in the block's axis order.
    pub fn block_marginal(&self, i: usize) -> Result<JointPmf> {
        let names = self.block_names(i);
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        self.marginal(&refs)
    }

    /// `q^{⊗N}` laid out like [`Self::block_marginal`].
    pub fn iid_target(&self, target: &JointPmf) -> Result<JointPmf> {
        if target.shape() != self.letter_sizes.as_slice() {
            return Err(Error::Dimension(format!(
                "target letters {:?} do not match block variables {:?}",
                target.shape(),
                self.letter_sizes
            )));
        }
        iid_block_law(target, self.block_len)
    }
}

/// `q^{⊗N}` with each axis of `letters` widened to a whole block.
pub fn iid_block_law(letters: &JointPmf, block_len: usize) -> Result<JointPmf> {
    let sizes = letters.shape().to_vec();
    let shape: Vec<usize> = sizes.iter().map(|&s| s.pow(block_len as u32)).collect();
    let total: usize = shape.iter().product();
    let mut probs = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rest = flat;
        let mut codes = vec![0; shape.len()];
        for a in (0..shape.len()).rev() {
            codes[a] = rest % shape[a];
            rest /= shape[a];
        }
        let ds: Vec<Vec<usize>> = codes
            .iter()
            .zip(&sizes)
            .map(|(&c, &s)| digits(c, s, block_len))
            .collect();
        let p: f64 = (0..block_len)
            .map(|i| {
                let idx: Vec<usize> = ds.iter().map(|d| d[i]).collect();
                letters.at(&idx)
            })
            .product();
        probs.push(p);
    }
    JointPmf::new(shape, probs)
}

/// Outer product of `k` copies of per-block tables indexed by the recycled code.
fn chain(tables: &[Vec<f64>], k: usize, weight: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for t in tables {
        let mut acc = vec![weight];
        for _ in 0..k {
            let mut next = Vec::with_capacity(acc.len() * t.len());
            for &a in &acc {
                next.extend(t.iter().map(|&b| a * b));
            }
            acc = next;
        }
        out.extend(acc);
    }
    out
}

/// Exact law induced by a scheme over `k` blocks.
pub fn enumerate_induced(cfg: &OracleConfig) -> Result<EnumeratedLaw> {
    let n = cfg.n;
    let len = 1usize << n;
    let k = cfg.k;
    if k == 0 {
        return Err(Error::Config("block count k must be at least 1".into()));
    }
    match &cfg.scheme {
        OracleScheme::Resolvability {
            joint,
            recycled,
            fresh,
            refresh_recycled,
        } => {
            let (qx, qy) = (joint.shape()[0], joint.shape()[1]);
            let block = prod(&[pow(qx, len), pow(qy, len)]);
            let cbar = pow(qx, recycled.len());
            let needed = if *refresh_recycled {
                (cbar.saturating_mul(block)).saturating_pow(k as u32)
            } else {
                cbar.saturating_mul(block.saturating_pow(k as u32))
            };
            check_budget(needed.max(prod(&[pow(qx, len), pow(qx, len)])), cfg.budget)?;
            let px = joint.marginal(&[0])?.probs().to_vec();
            let model = BlockModel::new(qx, 1, n, &px);
            let rules = rules_from(
                len,
                OracleRule::WithoutSide,
                &[(recycled, OracleRule::Pinned), (fresh, OracleRule::Uniform)],
            )?;
            let w = letter_table(joint, 0, 1)?;
            let yx = pow(qy, len) as usize;
            let mut channel = vec![0.0; pow(qx, len) as usize * yx];
            for xc in 0..pow(qx, len) as usize {
                let x = digits(xc, qx, len);
                for yc in 0..yx {
                    let y = digits(yc, qy, len);
                    channel[xc * yx + yc] = (0..len)
                        .map(|i| w[x[i] * qy + y[i]] / px[x[i]])
                        .product();
                }
            }
            let tables: Vec<Vec<f64>> = (0..cbar as usize)
                .map(|c| {
                    let lx = model.induced_x(&rules, &pinned_values(recycled, c, qx, len), 0);
                    let mut t = Vec::with_capacity(lx.len() * yx);
                    for (xc, &p) in lx.iter().enumerate() {
                        t.extend(channel[xc * yx..(xc + 1) * yx].iter().map(|&c| p * c));
                    }
                    t
                })
                .collect();
            let cw = 1.0 / cbar as f64;
            let sizes = [pow(qx, len) as usize, yx];
            assemble(&["X", "Y"], &sizes, tables, cw, k, *refresh_recycled, "Cbar", vec![qx, qy], len)
        }
        OracleScheme::Empirical {
            joint,
            common,
            message,
            deterministic_low,
        } => {
            let (qx, qy) = (joint.shape()[0], joint.shape()[1]);
            let xs = pow(qx, len);
            let ys = pow(qy, len);
            let c1 = pow(qy, common.len());
            check_budget(
                c1.saturating_mul(prod(&[xs, ys]).saturating_pow(k as u32)).max(prod(&[xs, ys, ys])),
                cfg.budget,
            )?;
            let model = BlockModel::new(qy, qx, n, &letter_table(joint, 0, 1)?);
            let low_rule = if *deterministic_low {
                OracleRule::ArgmaxWithoutSide
            } else {
                OracleRule::WithoutSide
            };
            let rules = rules_from(
                len,
                low_rule,
                &[(common, OracleRule::Pinned), (message, OracleRule::WithSide)],
            )?;
            let tables: Vec<Vec<f64>> = (0..c1 as usize)
                .map(|c| {
                    let pin = pinned_values(common, c, qy, len);
                    let mut t = Vec::with_capacity((xs * ys) as usize);
                    for xc in 0..xs as usize {
                        let px = model.side_prob(xc);
                        t.extend(model.induced_x(&rules, &pin, xc).iter().map(|&p| px * p));
                    }
                    t
                })
                .collect();
            let sizes = [xs as usize, ys as usize];
            assemble(&["X", "Y"], &sizes, tables, 1.0 / c1 as f64, k, false, "C1", vec![qx, qy], len)
        }
        OracleScheme::Strong {
            joint,
            f1,
            f2,
            f3,
            f4,
            local,
        } => {
            let (qx, qv, qy) = (joint.shape()[0], joint.shape()[1], joint.shape()[2]);
            let (xs, vs, ys) = (pow(qx, len), pow(qv, len), pow(qy, len));
            let cbar = pow(qv, f2.len());
            let block = prod(&[xs, vs, ys]);
            check_budget(
                cbar.saturating_mul(block.saturating_pow(k as u32))
                    .max(prod(&[xs, vs, vs]))
                    .max(prod(&[vs, ys, ys])),
                cfg.budget,
            )?;
            let covered: usize = [f1, f2, f3, f4].iter().map(|s| s.len()).sum();
            let union: BTreeSet<usize> = f1.iter().chain(f2).chain(f3).chain(f4).copied().collect();
            if covered != len || union.len() != len {
                return Err(Error::Config("F1..F4 must partition the block".into()));
            }
            let v_model = BlockModel::new(qv, qx, n, &letter_table(joint, 0, 1)?);
            let y_model = BlockModel::new(qy, qv, n, &letter_table(joint, 1, 2)?);
            let v_rules = rules_from(
                len,
                OracleRule::WithoutSide,
                &[
                    (f2, OracleRule::Pinned),
                    (f3, OracleRule::Uniform),
                    (f4, OracleRule::WithSide),
                ],
            )?;
            let y_rules = rules_from(len, OracleRule::WithSide, &[(local, OracleRule::Uniform)])?;
            let no_pin = vec![None; len];
            let y_given_v: Vec<Vec<f64>> = (0..vs as usize)
                .map(|vc| y_model.induced_x(&y_rules, &no_pin, vc))
                .collect();
            let tables: Vec<Vec<f64>> = (0..cbar as usize)
                .map(|c| {
                    let pin = pinned_values(f2, c, qv, len);
                    let mut t = Vec::with_capacity(block as usize);
                    for xc in 0..xs as usize {
                        let px = v_model.side_prob(xc);
                        let lv = v_model.induced_x(&v_rules, &pin, xc);
                        for (vc, &pv) in lv.iter().enumerate() {
                            t.extend(y_given_v[vc].iter().map(|&py| px * pv * py));
                        }
                    }
                    t
                })
                .collect();
            let sizes = [xs as usize, vs as usize, ys as usize];
            assemble(
                &["X", "V", "Y"],
                &sizes,
                tables,
                1.0 / cbar as f64,
                k,
                false,
                "Cbar",
                vec![qx, qv, qy],
                len,
            )
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    vars: &[&str],
    sizes: &[usize],
    tables: Vec<Vec<f64>>,
    weight: f64,
    k: usize,
    refresh: bool,
    rec_name: &str,
    letter_sizes: Vec<usize>,
    len: usize,
) -> Result<EnumeratedLaw> {
    let mut names = Vec::new();
    let mut shape = Vec::new();
    let mut blocks = Vec::new();
    let probs = if refresh {
        // Each block carries its own copy of the randomness.
        let per_block: Vec<f64> = tables.iter().flat_map(|t| t.iter().map(|&p| p * weight)).collect();
        for i in 1..=k {
            names.push(format!("{rec_name}{i}"));
            shape.push(tables.len());
            let mut axes = Vec::new();
            for (v, &s) in vars.iter().zip(sizes) {
                axes.push(names.len());
                names.push(format!("{v}{i}"));
                shape.push(s);
            }
            blocks.push(axes);
        }
        chain(&[per_block], k, 1.0)
    } else {
        names.push(rec_name.to_string());
        shape.push(tables.len());
        for i in 1..=k {
            let mut axes = Vec::new();
            for (v, &s) in vars.iter().zip(sizes) {
                axes.push(names.len());
                names.push(format!("{v}{i}"));
                shape.push(s);
            }
            blocks.push(axes);
        }
        chain(&tables, k, weight)
    };
    EnumeratedLaw::build(names, shape, probs, blocks, Some(0), letter_sizes, len)
}

/// Exact metrics of an induced law against an iid target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactMetrics {
    /// `D(q^{⊗N} || p~)` on the first block, bits.
    pub kl_target_induced: f64,
    /// `D(p~ || q^{⊗N})` on the first block, bits.
    pub kl_induced_target: f64,
    /// `V(p~, q^{⊗N})` (L1) on the first block.
    pub vdist: f64,
    /// Per-block `V` for every block.
    pub vdist_per_block: Vec<f64>,
    /// `I(out_1; out_2)` between the last variables of the first two blocks.
    pub inter_block_mi: Option<f64>,
    /// `I(out_2; recycled)`.
    pub recycled_mi: Option<f64>,
    /// Divergences of single-variable block marginals, keyed by variable.
    pub marginal_kl: BTreeMap<String, f64>,
}

pub fn exact_metrics(law: &EnumeratedLaw, target: &JointPmf) -> Result<ExactMetrics> {
    let tgt = law.iid_target(target)?;
    let b0 = law.block_marginal(0)?;
    let mut vdist_per_block = Vec::new();
    for i in 0..law.block_count() {
        vdist_per_block.push(l1_slices(law.block_marginal(i)?.probs(), tgt.probs()));
    }
    let names0 = law.block_names(0);
    let mut marginal_kl = BTreeMap::new();
    for (a, name) in names0.iter().enumerate() {
        let p = law.marginal(&[name.as_str()])?;
        let q = tgt.marginal(&[a])?;
        marginal_kl.insert(name.clone(), kl_slices(q.probs(), p.probs()));
    }
    let (inter_block_mi, recycled_mi) = if law.block_count() >= 2 {
        let o1 = names0.last().expect("blocks hold variables").clone();
        let o2 = law.block_names(1).last().expect("blocks hold variables").clone();
        let mi = law.mutual_information(&[&o1], &[&o2])?;
        let rec = match law.recycled_name() {
            Some(r) => Some(law.mutual_information(&[&o2], &[r])?),
            None => None,
        };
        (Some(mi), rec)
    } else {
        (None, None)
    };
    Ok(ExactMetrics {
        kl_target_induced: kl_slices(tgt.probs(), b0.probs()),
        kl_induced_target: kl_slices(b0.probs(), tgt.probs()),
        vdist: vdist_per_block[0],
        vdist_per_block,
        inter_block_mi,
        recycled_mi,
        marginal_kl,
    })
}

/// `H(U_j | U^{1:j-1}[, side block])` for `U = X G_n`, by enumeration.
pub fn oracle_conditional_entropies(
    joint: &JointPmf,
    polarized: usize,
    side: &[usize],
    n: u32,
    budget: u128,
) -> Result<Vec<f64>> {
    let len = 1usize << n;
    let q = joint.shape()[polarized];
    let m: usize = side.iter().map(|&a| joint.shape()[a]).product();
    check_budget(pow(q * m, len), budget)?;
    let mut axes = side.to_vec();
    axes.push(polarized);
    let w = joint.marginal(&axes)?.probs().to_vec();
    let model = BlockModel::new(q, m, n, &w);
    Ok(model.entropies(!side.is_empty()))
}
