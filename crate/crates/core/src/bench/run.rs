use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, ProfileMethod};
use super::estimate::{estimate_vdist, exceedance, letter_pairs, Estimate, ExceedanceRow, MIN_VDIST_SAMPLES};
use crate::error::{Error, Result};
use crate::oracle::{enumerate_induced, exact_metrics, OracleConfig, OracleScheme, ORACLE_BUDGET};
use crate::polarize::{exact_profile, mc_profile, stream_rng, IndexSets, PolarProfile, SourceSpec};
use crate::prob::{kl_slices, BoundRow, JointPmf, SQRT_2LN2};
use crate::schemes::empirical::empirical_spec;
use crate::schemes::resolvability::resolvability_spec;
use crate::schemes::strong::strong_specs;
use crate::schemes::{EmpiricalSetup, RateReport, ResolvabilitySetup, Scheme, SchemeKind, StrongSetup};

pub const CSV_NAME: &str = "metrics.csv";
pub const SUMMARY_NAME: &str = "summary.json";
pub const SUMMARY_FORMAT_VERSION: u32 = 1;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "POLARCOV_THREADS";

/// One CSV row per trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub scheme: SchemeKind,
    #[serde(rename = "N")]
    pub block_len: usize,
    pub k: usize,
    pub seed: u64,
    pub rate_msg: f64,
    pub rate_shared: f64,
    pub rate_trace: f64,
    pub rate_local: f64,
    /// Exact per-block `V(p~_{XY}, q_{XY}^{⊗N})` when oracle-sized.
    pub v_dist: Option<f64>,
    /// Exact per-block `D(q_{XY}^{⊗N} || p~_{XY})` when oracle-sized.
    pub kl: Option<f64>,
    /// `V(q_XY, T)` for the joint type over all `kN` positions.
    pub histogram_dist: f64,
}

/// A named profile computed for one block length.
#[derive(Clone, Debug)]
pub struct NamedProfile {
    pub name: &'static str,
    pub spec: SourceSpec,
    pub profile: PolarProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Spread {
    fn of(v: &[f64]) -> Self {
        let m = v.len().max(1) as f64;
        let mean = v.iter().sum::<f64>() / m;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
        Spread {
            mean,
            std: var.sqrt(),
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Exact single-block quantities from the enumeration oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSummary {
    /// Divergence of the polarized pair's block law, bits.
    pub divergence: Estimate,
    /// The same divergence predicted from the profile; `None` when no identity applies.
    pub divergence_formula: Option<f64>,
    pub formula_matches: Option<bool>,
    /// `max` of the per-index divergence terms.
    pub delta_effective: Option<f64>,
    /// `V(p~_{XY}, q_{XY}^{⊗N})`.
    pub vdist_xy: Estimate,
    /// `D(q_{XY}^{⊗N} || p~_{XY})`.
    pub kl_xy: Estimate,
    pub inter_block_mi: Option<f64>,
    pub recycled_mi: Option<f64>,
}

/// Per-`(n, k)` aggregate of all trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub n: u32,
    pub block_len: usize,
    pub k: usize,
    pub trials: usize,
    pub delta_v: f64,
    pub delta_h: f64,
    pub set_sizes: BTreeMap<String, usize>,
    pub clamped: usize,
    pub profile_method: String,
    pub rates: RateReport,
    /// Mean ledger rates over trials: message, shared, trace, local.
    pub ledger_rates: [f64; 4],
    pub histogram_dist: Spread,
    pub exceedance: Vec<ExceedanceRow>,
    /// Plug-in distance between pooled `(x_i, y_i)` letters and `q_XY`.
    pub vdist_single_letter: Option<Estimate>,
    pub exact: Option<ExactSummary>,
    pub bounds: Vec<BoundRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub k: usize,
    pub block_lens: Vec<usize>,
    pub mean_histogram_dist: Vec<f64>,
    pub strictly_decreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: u32,
    pub created_unix: u64,
    pub scheme: SchemeKind,
    pub thresholds: String,
    pub config: ExperimentConfig,
    pub csv: String,
    pub artifacts: Vec<Artifact>,
    pub groups: Vec<MetricsReport>,
    pub trend: Vec<TrendRow>,
}

/// Result of a finished run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
}

/// Removes everything written so far unless disarmed.
struct OutputGuard {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    artifacts: Vec<Artifact>,
    armed: bool,
}

impl OutputGuard {
    fn new(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir)?;
        Ok(OutputGuard {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
            artifacts: Vec::new(),
            armed: true,
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8], artifact: bool) -> Result<PathBuf> {
        let path = self.dir.join(name);
        self.files.push(path.clone());
        fs::write(&path, bytes)?;
        if artifact {
            self.artifacts.push(Artifact {
                path: name.to_string(),
                sha256: hex::encode(Sha256::digest(bytes)),
            });
        }
        Ok(path)
    }

    fn finish(mut self) -> Vec<PathBuf> {
        self.armed = false;
        std::mem::take(&mut self.files)
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if !self.armed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

/// Worker pool sized by `POLARCOV_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Error::Config(format!("{THREADS_ENV}={v:?} is not a positive integer")))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn profile_for(cfg: &ExperimentConfig, spec: &SourceSpec, n: u32) -> Result<PolarProfile> {
    match cfg.profile_method {
        ProfileMethod::Exact => exact_profile(spec, n),
        ProfileMethod::MonteCarlo => mc_profile(spec, n, cfg.profile_samples, cfg.seed),
        ProfileMethod::Auto => match exact_profile(spec, n) {
            Err(Error::Budget { .. }) => mc_profile(spec, n, cfg.profile_samples, cfg.seed),
            r => r,
        },
    }
}

/// Profiles needed by the configured scheme at block length `2^n`.
pub fn profiles(cfg: &ExperimentConfig, joint: &JointPmf, n: u32) -> Result<Vec<NamedProfile>> {
    let specs: Vec<(&'static str, SourceSpec)> = match cfg.scheme {
        SchemeKind::Resolvability => vec![("x", resolvability_spec(joint.clone())?)],
        SchemeKind::Empirical => vec![("y", empirical_spec(joint.clone())?)],
        SchemeKind::Strong => {
            let (v, y) = strong_specs(joint.clone())?;
            vec![("v", v), ("y", y)]
        }
    };
    specs
        .into_iter()
        .map(|(name, spec)| {
            let profile = profile_for(cfg, &spec, n)?;
            Ok(NamedProfile { name, spec, profile })
        })
        .collect()
}

/// Builds the scheme from its profiles.
pub fn build_scheme(cfg: &ExperimentConfig, profiles: &[NamedProfile]) -> Result<Scheme> {
    let len = profiles[0].profile.block_len();
    let (dv, dh) = cfg.thresholds.resolve(len);
    let p0 = &profiles[0];
    Ok(match cfg.scheme {
        SchemeKind::Resolvability => Scheme::Resolvability(
            ResolvabilitySetup::new(p0.spec.clone(), p0.profile.clone(), dv, dh)?
                .with_refreshed_recycling(cfg.refresh_recycled),
        ),
        SchemeKind::Empirical => Scheme::Empirical(
            EmpiricalSetup::new(p0.spec.clone(), p0.profile.clone(), dv, dh)?
                .with_deterministic_low(cfg.deterministic_low),
        ),
        SchemeKind::Strong => {
            let p1 = &profiles[1];
            Scheme::Strong(StrongSetup::new(
                p0.spec.clone(),
                p1.spec.clone(),
                p0.profile.clone(),
                p1.profile.clone(),
                dv,
                dh,
            )?)
        }
    })
}

/// Index sets of a scheme, keyed by the profile they come from.
pub fn scheme_sets(scheme: &Scheme) -> Vec<(&'static str, &IndexSets)> {
    match scheme {
        Scheme::Resolvability(s) => vec![("x", s.sets())],
        Scheme::Empirical(s) => vec![("y", s.sets())],
        Scheme::Strong(s) => vec![("v", s.v_sets()), ("y", s.y_sets())],
    }
}

fn set_sizes(scheme: &Scheme) -> BTreeMap<String, usize> {
    let mut m = BTreeMap::new();
    match scheme {
        Scheme::Resolvability(s) => {
            m.insert("V_X|Y (recycled)".into(), s.recycled_set().len());
            m.insert("V_X minus V_X|Y (fresh)".into(), s.fresh_set().len());
        }
        Scheme::Empirical(s) => {
            m.insert("V_Y|X (common)".into(), s.common_set().len());
            m.insert("H_Y minus V_Y|X (message)".into(), s.message_set().len());
            m.insert("H_Y complement (trace)".into(), s.low_set().len());
        }
        Scheme::Strong(s) => {
            let [f1, f2, f3, f4] = s.partition().sizes();
            m.insert("F1 (trace)".into(), f1);
            m.insert("F2 (recycled)".into(), f2);
            m.insert("F3 (fresh)".into(), f3);
            m.insert("F4 (message)".into(), f4);
            m.insert("V_Y|V (local)".into(), s.local_set().len());
        }
    }
    m
}

fn clamped(scheme: &Scheme) -> usize {
    scheme_sets(scheme).iter().map(|(_, s)| s.clamped).sum()
}

/// The oracle's view of a configured scheme.
pub fn oracle_scheme_for(scheme: &Scheme) -> Result<OracleScheme> {
    Ok(match scheme {
        Scheme::Resolvability(s) => OracleScheme::Resolvability {
            joint: s.spec().joint().clone(),
            recycled: s.recycled_set().clone(),
            fresh: s.fresh_set().clone(),
            refresh_recycled: s.refreshes_recycled(),
        },
        Scheme::Empirical(s) => OracleScheme::Empirical {
            joint: s.spec().joint().clone(),
            common: s.common_set().clone(),
            message: s.message_set().clone(),
            deterministic_low: s.deterministic_low(),
        },
        Scheme::Strong(s) => {
            let p = s.partition();
            OracleScheme::Strong {
                joint: s.v_spec().joint().clone(),
                f1: p.f1.clone(),
                f2: p.f2.clone(),
                f3: p.f3.clone(),
                f4: p.f4.clone(),
                local: s.local_set().clone(),
            }
        }
    })
}

/// `(x, y)` letter joint the scheme coordinates or synthesizes.
pub fn xy_target(scheme: &Scheme) -> Result<JointPmf> {
    match scheme {
        Scheme::Resolvability(s) => Ok(s.spec().joint().clone()),
        Scheme::Empirical(s) => Ok(s.spec().joint().clone()),
        Scheme::Strong(s) => s.v_spec().joint().marginal(&[0, 2]),
    }
}

/// Exact single-block metrics; `k >= 2` adds inter-block dependence when it fits.
pub fn exact_summary(scheme: &Scheme, k: usize, budget: u128) -> Result<ExactSummary> {
    let n = scheme.block_len().trailing_zeros();
    let os = oracle_scheme_for(scheme)?;
    let law = enumerate_induced(&OracleConfig {
        scheme: os.clone(),
        n,
        k: 1,
        budget,
    })?;
    let xy = xy_target(scheme)?;
    let len = scheme.block_len();
    let block_xy = law.marginal(&["X1", "Y1"])?;
    let tgt_xy = crate::oracle::iid_block_law(&xy, len)?;
    let vdist = crate::prob::l1_slices(block_xy.probs(), tgt_xy.probs());
    let kl = kl_slices(tgt_xy.probs(), block_xy.probs());
    let (pair_names, pair_target): (Vec<&str>, JointPmf) = match scheme {
        Scheme::Resolvability(s) => (vec!["X1"], s.spec().joint().marginal(&[0])?),
        Scheme::Empirical(_) => (vec!["X1", "Y1"], xy.clone()),
        Scheme::Strong(s) => (vec!["X1", "V1"], s.v_spec().joint().marginal(&[0, 1])?),
    };
    let p = law.marginal(&pair_names)?;
    let t = crate::oracle::iid_block_law(&pair_target, len)?;
    let divergence = kl_slices(t.probs(), p.probs());
    let terms = scheme.divergence_terms()?;
    let formula = terms.as_ref().map(|t| t.iter().fold(0.0, |acc, (_, v)| acc + v));
    let delta_effective = terms
        .as_ref()
        .map(|t| t.iter().map(|(_, v)| *v).fold(0.0f64, f64::max));
    let (inter_block_mi, recycled_mi) = if k >= 2 {
        match enumerate_induced(&OracleConfig { scheme: os, n, k: 2, budget }) {
            Ok(law2) => {
                let m = exact_metrics(&law2, law2_target(scheme)?)?;
                (m.inter_block_mi, m.recycled_mi)
            }
            Err(Error::Budget { .. }) => (None, None),
            Err(e) => return Err(e),
        }
    } else {
        (None, None)
    };
    Ok(ExactSummary {
        divergence: Estimate::exact(divergence),
        divergence_formula: formula,
        formula_matches: formula.map(|f| (f - divergence).abs() <= 1e-9),
        delta_effective,
        vdist_xy: Estimate::exact(vdist),
        kl_xy: Estimate::exact(kl),
        inter_block_mi,
        recycled_mi,
    })
}

fn law2_target(scheme: &Scheme) -> Result<&JointPmf> {
    Ok(match scheme {
        Scheme::Resolvability(s) => s.spec().joint(),
        Scheme::Empirical(s) => s.spec().joint(),
        Scheme::Strong(s) => s.v_spec().joint(),
    })
}

/// Seed of trial `t`, derived from the master seed.
pub fn trial_seed(master: u64, t: usize) -> u64 {
    stream_rng(master, t as u64).random()
}

struct TrialOutcome {
    row: TrialRow,
    pairs: Vec<usize>,
}

fn run_trial(
    scheme: &Scheme,
    k: usize,
    seed: u64,
    xy: &JointPmf,
    exact: Option<&ExactSummary>,
) -> Result<TrialOutcome> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let t = scheme.run(k, &mut rng)?;
    let (qx, qy) = (xy.shape()[0], xy.shape()[1]);
    let hist = t.joint_type(qx, qy)?.distance_to(xy)?;
    let (rate_msg, rate_shared, rate_trace, rate_local) = t.ledger_rates();
    Ok(TrialOutcome {
        row: TrialRow {
            scheme: scheme.kind(),
            block_len: scheme.block_len(),
            k,
            seed,
            rate_msg,
            rate_shared,
            rate_trace,
            rate_local,
            v_dist: exact.map(|e| e.vdist_xy.value),
            kl: exact.map(|e| e.kl_xy.value),
            histogram_dist: hist,
        },
        pairs: letter_pairs(&t.x_all(), &t.y_all(), qy),
    })
}

fn bounds(scheme: &Scheme, xy: &JointPmf, exact: Option<&ExactSummary>, ex: &[ExceedanceRow]) -> Vec<BoundRow> {
    let mut rows = Vec::new();
    let len = scheme.block_len() as f64;
    if let Some(e) = exact {
        if let Some(d) = e.delta_effective {
            rows.push(BoundRow::inequality(
                "block divergence <= N * delta_effective",
                e.divergence.value,
                len * d,
                1e-9,
            ));
            if scheme.kind() == SchemeKind::Empirical {
                rows.push(BoundRow::inequality(
                    "block V(q, p~) <= sqrt(2 log 2) sqrt(N delta_effective)",
                    e.vdist_xy.value,
                    (2.0f64).sqrt() * (len * d).sqrt(),
                    1e-9,
                ));
            }
        }
        rows.push(BoundRow::inequality(
            "block V(q, p~) <= sqrt(2 ln 2) sqrt(D(q || p~))",
            e.vdist_xy.value,
            SQRT_2LN2 * e.kl_xy.value.sqrt(),
            1e-9,
        ));
        if let (Some(a), Some(b)) = (e.inter_block_mi, e.recycled_mi) {
            rows.push(BoundRow::inequality("I(Y1; Y2) <= I(Y2; recycled)", a, b, 1e-9));
        }
    }
    let _ = xy;
    for r in ex {
        rows.push(BoundRow::inequality(
            &format!("P[V(q, T) > {}] <= Hoeffding budget + 3 sigma", r.epsilon),
            r.observed,
            r.budget,
            r.slack,
        ));
    }
    rows
}

fn profile_file(name: &str, n: u32) -> String {
    format!("profile_{name}_n{n}.json")
}

fn sets_file(name: &str, n: u32) -> String {
    format!("sets_{name}_n{n}.json")
}

/// Runs every `(n, k)` group of the configuration and writes the CSV, the
/// summary, and the profiles and sets used.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let joint = cfg.validate()?;
    let pool = thread_pool()?;
    let mut out = OutputGuard::new(&cfg.output_dir)?;
    let (groups, rows) = pool.install(|| -> Result<_> {
        let mut groups = Vec::new();
        let mut rows = Vec::new();
        for &n in &cfg.n {
            let profs = profiles(cfg, &joint, n)?;
            for p in &profs {
                out.write(&profile_file(p.name, n), p.profile.to_json()?.as_bytes(), true)?;
            }
            let scheme = build_scheme(cfg, &profs)?;
            for (name, sets) in scheme_sets(&scheme) {
                out.write(&sets_file(name, n), sets.to_json()?.as_bytes(), true)?;
            }
            let xy = xy_target(&scheme)?;
            for &k in &cfg.k {
                let exact = if cfg.oracle {
                    match exact_summary(&scheme, k, ORACLE_BUDGET) {
                        Ok(e) => Some(e),
                        Err(Error::Budget { .. }) => None,
                        Err(e) => return Err(e),
                    }
                } else {
                    None
                };
                let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| run_trial(&scheme, k, trial_seed(cfg.seed, t), &xy, exact.as_ref()))
                    .collect::<Result<_>>()?;
                let dists: Vec<f64> = outcomes.iter().map(|o| o.row.histogram_dist).collect();
                let (qx, qy) = (xy.shape()[0], xy.shape()[1]);
                let ex: Vec<ExceedanceRow> = cfg
                    .epsilons
                    .iter()
                    .map(|&e| exceedance(&dists, e, qx, qy, scheme.block_len()))
                    .collect();
                let pairs: Vec<usize> = outcomes.iter().flat_map(|o| o.pairs.iter().copied()).collect();
                let min = cfg.vdist_min_samples.max(MIN_VDIST_SAMPLES);
                let vdist_single_letter = if pairs.len() >= min {
                    Some(estimate_vdist(&pairs, &xy, &mut stream_rng(cfg.seed, u64::MAX))?)
                } else {
                    None
                };
                let mut ledger = [0.0; 4];
                for o in &outcomes {
                    let r = &o.row;
                    for (acc, v) in ledger.iter_mut().zip([r.rate_msg, r.rate_shared, r.rate_trace, r.rate_local]) {
                        *acc += v / cfg.trials as f64;
                    }
                }
                let (dv, dh) = cfg.thresholds.resolve(scheme.block_len());
                groups.push(MetricsReport {
                    n,
                    block_len: scheme.block_len(),
                    k,
                    trials: cfg.trials,
                    delta_v: dv,
                    delta_h: dh,
                    set_sizes: set_sizes(&scheme),
                    clamped: clamped(&scheme),
                    profile_method: format!("{:?}", profs[0].profile.method),
                    rates: scheme.rates(k)?,
                    ledger_rates: ledger,
                    histogram_dist: Spread::of(&dists),
                    bounds: bounds(&scheme, &xy, exact.as_ref(), &ex),
                    exceedance: ex,
                    vdist_single_letter,
                    exact,
                });
                rows.extend(outcomes.into_iter().map(|o| o.row));
            }
        }
        Ok((groups, rows))
    })?;

    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &rows {
        w.serialize(r)?;
    }
    let csv_bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.write(CSV_NAME, &csv_bytes, true)?;

    let trend = cfg
        .k
        .iter()
        .map(|&k| {
            let mut g: Vec<&MetricsReport> = groups.iter().filter(|g| g.k == k).collect();
            g.sort_by_key(|g| g.block_len);
            let means: Vec<f64> = g.iter().map(|g| g.histogram_dist.mean).collect();
            TrendRow {
                k,
                block_lens: g.iter().map(|g| g.block_len).collect(),
                strictly_decreasing: means.windows(2).all(|w| w[1] < w[0]),
                mean_histogram_dist: means,
            }
        })
        .collect();
    let summary = Summary {
        version: SUMMARY_FORMAT_VERSION,
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        scheme: cfg.scheme,
        thresholds: cfg.thresholds.name(),
        config: cfg.clone(),
        csv: CSV_NAME.into(),
        artifacts: out.artifacts.clone(),
        groups,
        trend,
    };
    out.write(SUMMARY_NAME, serde_json::to_string_pretty(&summary)?.as_bytes(), false)?;
    Ok(RunOutput {
        summary,
        files: out.finish(),
    })
}

/// Writes only the profiles for every configured `n`.
pub fn write_profiles(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let joint = cfg.validate()?;
    let pool = thread_pool()?;
    let mut out = OutputGuard::new(&cfg.output_dir)?;
    pool.install(|| -> Result<()> {
        for &n in &cfg.n {
            for p in profiles(cfg, &joint, n)? {
                out.write(&profile_file(p.name, n), p.profile.to_json()?.as_bytes(), true)?;
            }
        }
        Ok(())
    })?;
    Ok(out.finish())
}

/// Writes profiles and index sets for every configured `n`.
pub fn write_sets(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let joint = cfg.validate()?;
    let pool = thread_pool()?;
    let mut out = OutputGuard::new(&cfg.output_dir)?;
    pool.install(|| -> Result<()> {
        for &n in &cfg.n {
            let profs = profiles(cfg, &joint, n)?;
            for p in &profs {
                out.write(&profile_file(p.name, n), p.profile.to_json()?.as_bytes(), true)?;
            }
            let scheme = build_scheme(cfg, &profs)?;
            for (name, sets) in scheme_sets(&scheme) {
                out.write(&sets_file(name, n), sets.to_json()?.as_bytes(), true)?;
            }
            if let Scheme::Strong(s) = &scheme {
                let part = serde_json::to_string_pretty(s.partition())?;
                out.write(&format!("partition_n{n}.json"), part.as_bytes(), true)?;
            }
        }
        Ok(())
    })?;
    Ok(out.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub n: u32,
    pub k: usize,
    pub exact: ExactSummary,
    pub bounds: Vec<BoundRow>,
}

/// Exact oracle evaluation for every `(n, k)`; fails when an identity or
/// bound does not hold, or with a budget error when enumeration is too large.
pub fn oracle_check(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let joint = cfg.validate()?;
    let pool = thread_pool()?;
    let mut out = OutputGuard::new(&cfg.output_dir)?;
    let checks = pool.install(|| -> Result<Vec<OracleCheck>> {
        let mut checks = Vec::new();
        for &n in &cfg.n {
            let profs = profiles(cfg, &joint, n)?;
            let scheme = build_scheme(cfg, &profs)?;
            let xy = xy_target(&scheme)?;
            for &k in &cfg.k {
                let exact = exact_summary(&scheme, k, ORACLE_BUDGET)?;
                let bounds = bounds(&scheme, &xy, Some(&exact), &[]);
                checks.push(OracleCheck { n, k, exact, bounds });
            }
        }
        Ok(checks)
    })?;
    out.write("oracle.json", serde_json::to_string_pretty(&checks)?.as_bytes(), true)?;
    for c in &checks {
        if c.exact.formula_matches == Some(false) {
            return Err(Error::Check(format!(
                "n = {}: exact divergence {} differs from the profile sum {:?}",
                c.n, c.exact.divergence.value, c.exact.divergence_formula
            )));
        }
        if let Some(b) = c.bounds.iter().find(|b| b.holds == Some(false)) {
            return Err(Error::Check(format!("n = {}, k = {}: {} fails", c.n, c.k, b.name)));
        }
    }
    Ok(out.finish())
}
