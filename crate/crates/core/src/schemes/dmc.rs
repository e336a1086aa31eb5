use rand::Rng;
use rand_distr::{weighted::WeightedIndex, Distribution};

use crate::error::{Error, Result};
use crate::prob::{JointPmf, Pmf};

/// Discrete memoryless channel given by its transition rows `W(y | x)`.
#[derive(Clone, Debug)]
pub struct Dmc {
    rows: Vec<Pmf>,
    outputs: usize,
    samplers: Vec<WeightedIndex<f64>>,
}

impl Dmc {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let outputs = rows.first().map_or(0, Vec::len);
        if outputs == 0 {
            return Err(Error::Dimension("channel needs at least one input and output".into()));
        }
        let mut pmfs = Vec::with_capacity(rows.len());
        let mut samplers = Vec::with_capacity(rows.len());
        for (x, r) in rows.into_iter().enumerate() {
            if r.len() != outputs {
                return Err(Error::Dimension(format!("row {x} has {} outputs, expected {outputs}", r.len())));
            }
            let p = Pmf::new(r).map_err(|e| Error::InvalidPmf(format!("row {x}: {e}")))?;
            samplers.push(
                WeightedIndex::new(p.probs()).map_err(|e| Error::InvalidPmf(e.to_string()))?,
            );
            pmfs.push(p);
        }
        Ok(Dmc {
            rows: pmfs,
            outputs,
            samplers,
        })
    }

    pub fn identity(q: usize) -> Self {
        Dmc::new((0..q).map(|x| Pmf::point_mass(q, x).probs().to_vec()).collect())
            .expect("point masses are valid rows")
    }

    pub fn bsc(p: f64) -> Result<Self> {
        Dmc::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// `W(y | x) = q(x, y) / q(x)` from a two-axis joint; every input needs positive mass.
    pub fn from_joint(joint: &JointPmf, input: usize, output: usize) -> Result<Self> {
        let m = joint.marginal(&[input, output])?;
        let (qx, qy) = (m.shape()[0], m.shape()[1]);
        let mut rows = Vec::with_capacity(qx);
        for x in 0..qx {
            let row: Vec<f64> = (0..qy).map(|y| m.at(&[x, y])).collect();
            let mass: f64 = row.iter().sum();
            if mass <= 0.0 {
                return Err(Error::InvalidPmf(format!(
                    "input symbol {x} has zero probability, so its channel row is undefined"
                )));
            }
            rows.push(row.iter().map(|v| v / mass).collect());
        }
        Dmc::new(rows)
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x].p(y)
    }

    pub fn row(&self, x: usize) -> &Pmf {
        &self.rows[x]
    }

    pub fn transmit<R: Rng + ?Sized>(&self, x: &[u32], rng: &mut R) -> Result<Vec<u32>> {
        x.iter()
            .map(|&xi| {
                let s = self.samplers.get(xi as usize).ok_or(Error::SymbolOutOfRange {
                    symbol: xi,
                    modulus: self.inputs() as u32,
                })?;
                Ok(s.sample(rng) as u32)
            })
            .collect()
    }
}

/// Passes `x` through `ch` letter by letter.
pub fn dmc_transmit<R: Rng + ?Sized>(x: &[u32], ch: &Dmc, rng: &mut R) -> Result<Vec<u32>> {
    ch.transmit(x, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_and_extreme_bsc() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = vec![0, 2, 1, 1, 0];
        assert_eq!(dmc_transmit(&x, &Dmc::identity(3), &mut rng).unwrap(), x);
        let b = vec![0, 1, 1, 0];
        assert_eq!(Dmc::bsc(0.0).unwrap().transmit(&b, &mut rng).unwrap(), b);
        let flipped: Vec<u32> = b.iter().map(|v| 1 - v).collect();
        assert_eq!(Dmc::bsc(1.0).unwrap().transmit(&b, &mut rng).unwrap(), flipped);
    }

    #[test]
    fn bsc_flip_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = vec![0u32; 100_000];
        let y = Dmc::bsc(0.3).unwrap().transmit(&x, &mut rng).unwrap();
        let rate = y.iter().filter(|&&v| v == 1).count() as f64 / x.len() as f64;
        assert!((rate - 0.3).abs() < 0.01, "flip rate {rate}");
    }

    #[test]
    fn alphabet_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(
            Dmc::bsc(0.1).unwrap().transmit(&[0, 2], &mut rng),
            Err(Error::SymbolOutOfRange { .. })
        ));
        assert!(Dmc::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(Dmc::new(vec![vec![0.5, 0.6]]).is_err());
    }

    #[test]
    fn rows_from_joint() {
        let j = JointPmf::dsbs(0.2).unwrap();
        let ch = Dmc::from_joint(&j, 0, 1).unwrap();
        assert!((ch.prob(0, 1) - 0.2).abs() < 1e-12);
        let z = JointPmf::new(vec![2, 2], vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(Dmc::from_joint(&z, 0, 1).is_err());
    }
}
