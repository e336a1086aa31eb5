use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::is_prime;
use crate::polarize::Thresholds;
use crate::prob::JointPmf;
use crate::schemes::SchemeKind;

/// How profiles are obtained for each block length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileMethod {
    /// Exact when within the enumeration budget, Monte Carlo otherwise.
    #[default]
    Auto,
    Exact,
    MonteCarlo,
}

fn default_trials() -> usize {
    1
}
fn default_k() -> Vec<usize> {
    vec![1]
}
fn default_profile_samples() -> u64 {
    20_000
}
fn default_vdist_samples() -> usize {
    1000
}
fn default_epsilons() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}
fn default_output() -> PathBuf {
    PathBuf::from("polarcov-out")
}

/// Experiment description as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scheme: SchemeKind,
    /// Nested probability arrays, or a path to a JSON file holding them.
    pub target: Value,
    pub n: Vec<u32>,
    #[serde(default = "default_k")]
    pub k: Vec<usize>,
    pub thresholds: Thresholds,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub profile_method: ProfileMethod,
    #[serde(default = "default_profile_samples")]
    pub profile_samples: u64,
    /// Minimum pooled letter pairs required for the plug-in distance estimate.
    #[serde(default = "default_vdist_samples")]
    pub vdist_min_samples: usize,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Evaluate exact metrics with the enumeration oracle when small enough.
    #[serde(default = "yes")]
    pub oracle: bool,
    #[serde(default)]
    pub refresh_recycled: bool,
    #[serde(default)]
    pub deterministic_low: bool,
    /// Directory relative file targets are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn yes() -> bool {
    true
}

/// Command-line overrides applied on top of a config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<u32>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub scheme: Option<SchemeKind>,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.n {
            self.n = vec![n];
        }
        if let Some(k) = o.k {
            self.k = vec![k];
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(p) = &o.out {
            self.output_dir = p.clone();
        }
        if let Some(s) = o.scheme {
            self.scheme = s;
        }
    }

    /// Parses the target joint.
    pub fn target_joint(&self) -> Result<JointPmf> {
        match &self.target {
            Value::String(p) => {
                let mut path = PathBuf::from(p);
                if path.is_relative() {
                    if let Some(b) = &self.base_dir {
                        path = b.join(path);
                    }
                }
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| Error::Config(format!("cannot read target {}: {e}", path.display())))?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("target {}: {e}", path.display())))?;
                nested_to_joint(&v)
            }
            v => nested_to_joint(v),
        }
    }

    /// Checks everything that can be checked before running.
    pub fn validate(&self) -> Result<JointPmf> {
        let joint = self.target_joint()?;
        let shape = joint.shape().to_vec();
        let need_rank = match self.scheme {
            SchemeKind::Resolvability | SchemeKind::Empirical => 2,
            SchemeKind::Strong => 3,
        };
        if shape.len() != need_rank {
            return Err(Error::Config(format!(
                "{} scheme needs a rank-{need_rank} target, got shape {shape:?}",
                self.scheme
            )));
        }
        let prime = |axis: usize, name: &str| -> Result<()> {
            let s = shape[axis] as u32;
            if !is_prime(s) {
                return Err(Error::Config(format!(
                    "{} scheme requires |{name}| to be a prime number, got |{name}| = {s}",
                    self.scheme
                )));
            }
            Ok(())
        };
        match self.scheme {
            SchemeKind::Resolvability => prime(0, "X")?,
            SchemeKind::Empirical => prime(1, "Y")?,
            SchemeKind::Strong => {
                prime(1, "V")?;
                prime(2, "Y")?;
            }
        }
        if self.n.is_empty() || self.n.iter().any(|&n| n > 20) {
            return Err(Error::Config("n list must be nonempty with every n <= 20".into()));
        }
        if self.k.is_empty() || self.k.contains(&0) {
            return Err(Error::Config("k list must be nonempty with every k >= 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.profile_samples == 0 {
            return Err(Error::Config("profile_samples must be at least 1".into()));
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::Config("epsilons must be positive".into()));
        }
        match self.thresholds {
            Thresholds::Decaying { beta } if !(beta > 0.0 && beta < 0.5) => {
                return Err(Error::Config(format!("beta = {beta} must lie in (0, 1/2)")));
            }
            _ => {}
        }
        Ok(joint)
    }
}

/// Reads nested arrays of numbers as a joint pmf.
pub fn nested_to_joint(v: &Value) -> Result<JointPmf> {
    fn walk(v: &Value, depth: usize, shape: &mut Vec<usize>, out: &mut Vec<f64>) -> Result<()> {
        match v {
            Value::Array(items) => {
                if items.is_empty() {
                    return Err(Error::Config("empty array in target".into()));
                }
                if shape.len() == depth {
                    shape.push(items.len());
                } else if shape[depth] != items.len() {
                    return Err(Error::Config("ragged nested arrays in target".into()));
                }
                for it in items {
                    walk(it, depth + 1, shape, out)?;
                }
                Ok(())
            }
            Value::Number(x) => {
                if shape.len() != depth {
                    return Err(Error::Config("ragged nested arrays in target".into()));
                }
                out.push(x.as_f64().ok_or_else(|| Error::Config("non-finite number".into()))?);
                Ok(())
            }
            _ => Err(Error::Config("target must be nested arrays of numbers".into())),
        }
    }
    let mut shape = Vec::new();
    let mut probs = Vec::new();
    walk(v, 0, &mut shape, &mut probs)?;
    if shape.is_empty() {
        return Err(Error::Config("target must be an array".into()));
    }
    JointPmf::new(shape, probs).map_err(|e| Error::Config(format!("target: {e}")))
}
