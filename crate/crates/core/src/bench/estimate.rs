use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{l1_slices, JointPmf};

pub const MIN_VDIST_SAMPLES: usize = 1000;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    Exact,
    PlugIn,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub method: EstimateMethod,
    /// 95% interval; equal to `value` for exact quantities.
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            method: EstimateMethod::Exact,
            ci_low: value,
            ci_high: value,
            samples: 0,
        }
    }

    pub fn ci_width(&self) -> f64 {
        self.ci_high - self.ci_low
    }
}

/// Multinomial draw by successive conditional binomials.
fn multinomial<R: Rng + ?Sized>(total: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut out = vec![0u64; probs.len()];
    let mut left = total;
    let mut mass = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= p {
            out[i] = left;
            break;
        }
        let c = if p <= 0.0 {
            0
        } else {
            Binomial::new(left, (p / mass).clamp(0.0, 1.0))
                .expect("probability clamped to [0, 1]")
                .sample(rng)
        };
        out[i] = c;
        left -= c;
        mass -= p;
    }
    out
}

fn freq(counts: &[u64], total: u64) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Plug-in `V(p_hat, target)` from samples given as flat indices into the
/// target's alphabet, with a 95% percentile-bootstrap interval.
pub fn estimate_vdist<R: Rng + ?Sized>(samples: &[usize], target: &JointPmf, rng: &mut R) -> Result<Estimate> {
    if samples.len() < MIN_VDIST_SAMPLES {
        return Err(Error::Config(format!(
            "plug-in distance needs at least {MIN_VDIST_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let cells = target.probs().len();
    let mut counts = vec![0u64; cells];
    for &s in samples {
        *counts.get_mut(s).ok_or_else(|| {
            Error::Dimension(format!("sample {s} outside an alphabet of {cells}"))
        })? += 1;
    }
    let total = samples.len() as u64;
    let p_hat = freq(&counts, total);
    let value = l1_slices(&p_hat, target.probs());
    let mut boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| l1_slices(&freq(&multinomial(total, &p_hat, rng), total), target.probs()))
        .collect();
    boot.sort_by(f64::total_cmp);
    let at = |q: f64| boot[((q * (boot.len() - 1) as f64).round()) as usize];
    Ok(Estimate {
        value,
        method: EstimateMethod::PlugIn,
        ci_low: at(0.025),
        ci_high: at(0.975),
        samples: samples.len(),
    })
}

/// Flat indices of `(x_i, y_i)` letter pairs.
pub fn letter_pairs(x: &[u32], y: &[u32], qy: usize) -> Vec<usize> {
    x.iter().zip(y).map(|(&a, &b)| a as usize * qy + b as usize).collect()
}

/// `2 |X| |Y| exp(-N eps^2 / (2 |X|^2 |Y|^2))`.
pub fn hoeffding_budget(qx: usize, qy: usize, block_len: usize, eps: f64) -> f64 {
    let m = (qx * qy) as f64;
    2.0 * m * (-(block_len as f64) * eps * eps / (2.0 * m * m)).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceRow {
    pub epsilon: f64,
    /// Fraction of trials whose joint type is farther than `epsilon`.
    pub observed: f64,
    pub trials: usize,
    pub budget: f64,
    /// Three binomial standard deviations at the (capped) budget.
    pub slack: f64,
    pub holds: bool,
}

pub fn exceedance(distances: &[f64], eps: f64, qx: usize, qy: usize, block_len: usize) -> ExceedanceRow {
    let trials = distances.len();
    let observed = distances.iter().filter(|&&d| d > eps).count() as f64 / trials.max(1) as f64;
    let budget = hoeffding_budget(qx, qy, block_len, eps);
    let p = budget.min(1.0);
    let slack = 3.0 * (p * (1.0 - p) / trials.max(1) as f64).sqrt();
    ExceedanceRow {
        epsilon: eps,
        observed,
        trials,
        budget,
        slack,
        holds: observed <= budget + slack,
    }
}
