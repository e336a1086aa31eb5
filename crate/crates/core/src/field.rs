//! Prime-field symbols and the source polarization transform.
//!
//! The transform is `u = x · G_n` where `G_n` is the n-fold Kronecker power
//! of the kernel `[[1, 0], [1, 1]]`, taken in natural index order with no
//! bit-reversal permutation. Every index set in this crate refers to that
//! ordering: splitting `x = (x_a, x_b)` into halves gives
//! `u = ((x_a + x_b) · G_{n-1}, x_b · G_{n-1})`, so the first half of `u`
//! depends on the sums and the second half on `x_b` alone.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic trial-division primality test; moduli here are small.
pub fn is_prime(m: u32) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= m {
        if m.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// A validated prime modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Modulus(u32);

impl Modulus {
    pub fn new(q: u32) -> Result<Self> {
        if is_prime(q) {
            Ok(Modulus(q))
        } else {
            Err(Error::NotPrime(q))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    pub fn size(self) -> usize {
        self.0 as usize
    }

    /// `log2(q)`, the entropy of a uniform symbol in bits.
    pub fn log2(self) -> f64 {
        f64::from(self.0).log2()
    }

    #[inline]
    pub fn add(self, a: u32, b: u32) -> u32 {
        (a + b) % self.0
    }

    #[inline]
    pub fn sub(self, a: u32, b: u32) -> u32 {
        (a + self.0 - b) % self.0
    }
}

impl TryFrom<u32> for Modulus {
    type Error = Error;
    fn try_from(q: u32) -> Result<Self> {
        Modulus::new(q)
    }
}

impl From<Modulus> for u32 {
    fn from(m: Modulus) -> u32 {
        m.0
    }
}

/// A single field element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Symbol {
    value: u32,
    modulus: Modulus,
}

impl Symbol {
    pub fn new(value: u32, modulus: Modulus) -> Result<Self> {
        if value >= modulus.get() {
            return Err(Error::SymbolOutOfRange {
                symbol: value,
                modulus: modulus.get(),
            });
        }
        Ok(Symbol { value, modulus })
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> Modulus {
        self.modulus
    }
}

/// A block of `N = 2^n` symbols over one prime field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolVector {
    modulus: Modulus,
    symbols: Vec<u32>,
}

impl SymbolVector {
    pub fn new(modulus: Modulus, symbols: Vec<u32>) -> Result<Self> {
        if !symbols.len().is_power_of_two() {
            return Err(Error::NotPowerOfTwo(symbols.len()));
        }
        if let Some(&bad) = symbols.iter().find(|&&s| s >= modulus.get()) {
            return Err(Error::SymbolOutOfRange {
                symbol: bad,
                modulus: modulus.get(),
            });
        }
        Ok(SymbolVector { modulus, symbols })
    }

    /// Convenience constructor validating the modulus as well.
    pub fn from_raw(q: u32, symbols: Vec<u32>) -> Result<Self> {
        SymbolVector::new(Modulus::new(q)?, symbols)
    }

    pub fn zeros(modulus: Modulus, len: usize) -> Result<Self> {
        SymbolVector::new(modulus, vec![0; len])
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `n` such that `len == 2^n`.
    pub fn order(&self) -> u32 {
        self.symbols.len().trailing_zeros()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.symbols
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.symbols
    }

    pub fn get(&self, i: usize) -> Symbol {
        Symbol {
            value: self.symbols[i],
            modulus: self.modulus,
        }
    }

    /// Componentwise sum mod q.
    pub fn add(&self, other: &SymbolVector) -> Result<SymbolVector> {
        if self.modulus != other.modulus || self.len() != other.len() {
            return Err(Error::Dimension(
                "vectors differ in modulus or length".into(),
            ));
        }
        let m = self.modulus;
        Ok(SymbolVector {
            modulus: m,
            symbols: self
                .symbols
                .iter()
                .zip(&other.symbols)
                .map(|(&a, &b)| m.add(a, b))
                .collect(),
        })
    }
}

/// In-place `x ← x · G_n` over `Z_q`. Length must be a power of two.
pub fn transform_in_place(q: Modulus, x: &mut [u32]) {
    debug_assert!(x.len().is_power_of_two());
    let len = x.len();
    let mut half = len / 2;
    while half >= 1 {
        for block in x.chunks_mut(2 * half) {
            let (a, b) = block.split_at_mut(half);
            for (ai, &bi) in a.iter_mut().zip(b.iter()) {
                *ai = q.add(*ai, bi);
            }
        }
        half /= 2;
    }
}

/// In-place `u ← u · G_n^{-1}`, using the inverse kernel `[[1, 0], [q-1, 1]]`.
pub fn inverse_in_place(q: Modulus, u: &mut [u32]) {
    debug_assert!(u.len().is_power_of_two());
    let len = u.len();
    let mut half = len / 2;
    while half >= 1 {
        for block in u.chunks_mut(2 * half) {
            let (a, b) = block.split_at_mut(half);
            for (ai, &bi) in a.iter_mut().zip(b.iter()) {
                *ai = q.sub(*ai, bi);
            }
        }
        half /= 2;
    }
}

/// `u = x · G_n`, computed with `n` butterfly passes.
pub fn polar_transform(x: &SymbolVector) -> SymbolVector {
    let mut symbols = x.symbols.clone();
    transform_in_place(x.modulus, &mut symbols);
    SymbolVector {
        modulus: x.modulus,
        symbols,
    }
}

/// The `x` with `polar_transform(x) == u`.
pub fn polar_inverse(u: &SymbolVector) -> SymbolVector {
    let mut symbols = u.symbols.clone();
    inverse_in_place(u.modulus, &mut symbols);
    SymbolVector {
        modulus: u.modulus,
        symbols,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(q: u32, s: &[u32]) -> SymbolVector {
        SymbolVector::from_raw(q, s.to_vec()).unwrap()
    }

    /// Explicit Kronecker power of the kernel, rows indexed by input position.
    fn kron_matrix(q: u32, n: u32) -> Vec<Vec<u32>> {
        let mut g = vec![vec![1u32]];
        for _ in 0..n {
            let m = g.len();
            let mut next = vec![vec![0u32; 2 * m]; 2 * m];
            for r in 0..m {
                for c in 0..m {
                    next[r][c] = g[r][c];
                    next[m + r][c] = g[r][c];
                    next[m + r][m + c] = g[r][c];
                }
            }
            g = next;
        }
        g.iter()
            .map(|row| row.iter().map(|&e| e % q).collect())
            .collect()
    }

    fn mat_mul(q: u32, x: &[u32], g: &[Vec<u32>]) -> Vec<u32> {
        (0..x.len())
            .map(|c| {
                x.iter()
                    .enumerate()
                    .fold(0, |acc, (r, &xr)| (acc + xr * g[r][c]) % q)
            })
            .collect()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(polar_transform(&v(2, &[0, 1])).as_slice(), &[1, 1]);
        assert_eq!(polar_transform(&v(3, &[2, 2])).as_slice(), &[1, 2]);
        assert_eq!(polar_transform(&v(2, &[0, 1, 1, 1])).as_slice(), &[1, 0, 0, 1]);
        assert_eq!(polar_inverse(&v(2, &[1, 1])).as_slice(), &[0, 1]);
    }

    #[test]
    fn matches_matrix_oracle() {
        let g = kron_matrix(2, 2);
        assert_eq!(mat_mul(2, &[0, 1, 1, 1], &g), vec![1, 0, 0, 1]);
        for q in [2u32, 3, 5] {
            for n in 0..=3 {
                let g = kron_matrix(q, n);
                let len = 1usize << n;
                for code in 0..(q as usize).pow(len as u32).min(4096) {
                    let mut c = code;
                    let x: Vec<u32> = (0..len)
                        .map(|_| {
                            let s = (c % q as usize) as u32;
                            c /= q as usize;
                            s
                        })
                        .collect();
                    let u = polar_transform(&v(q, &x));
                    assert_eq!(u.as_slice(), mat_mul(q, &x, &g).as_slice());
                }
            }
        }
    }

    #[test]
    fn inverse_q5_against_brute_force() {
        // Brute-force: search all x with x·G_3 = u.
        let q = 5u32;
        let g = kron_matrix(q, 3);
        let u = [3u32, 0, 0, 0, 0, 0, 0, 0];
        let x = polar_inverse(&v(q, &u));
        assert_eq!(mat_mul(q, x.as_slice(), &g), u.to_vec());
        let mut hits = 0;
        for code in 0..(q as usize).pow(8) {
            let mut c = code;
            let cand: Vec<u32> = (0..8)
                .map(|_| {
                    let s = (c % 5) as u32;
                    c /= 5;
                    s
                })
                .collect();
            if mat_mul(q, &cand, &g) == u {
                hits += 1;
                assert_eq!(cand.as_slice(), x.as_slice());
            }
        }
        assert_eq!(hits, 1);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            SymbolVector::from_raw(2, vec![0, 1, 0]),
            Err(Error::NotPowerOfTwo(3))
        ));
        assert!(matches!(
            SymbolVector::from_raw(4, vec![0, 1]),
            Err(Error::NotPrime(4))
        ));
        assert!(SymbolVector::from_raw(3, vec![0, 3]).is_err());
        assert!(Symbol::new(5, Modulus::new(5).unwrap()).is_err());
    }

    #[test]
    fn primality() {
        let primes: Vec<u32> = (0..40).filter(|&m| is_prime(m)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
    }

    fn vec_strategy() -> impl Strategy<Value = (u32, Vec<u32>, Vec<u32>)> {
        (prop::sample::select(vec![2u32, 3, 5, 7]), 0u32..=6).prop_flat_map(|(q, n)| {
            let len = 1usize << n;
            (
                Just(q),
                prop::collection::vec(0..q, len),
                prop::collection::vec(0..q, len),
            )
        })
    }

    proptest! {
        #[test]
        fn roundtrip((q, x, _y) in vec_strategy()) {
            let x = v(q, &x);
            prop_assert_eq!(polar_inverse(&polar_transform(&x)), x.clone());
            prop_assert_eq!(polar_transform(&polar_inverse(&x)), x);
        }

        #[test]
        fn linear((q, x, y) in vec_strategy()) {
            let (x, y) = (v(q, &x), v(q, &y));
            let lhs = polar_transform(&x.add(&y).unwrap());
            let rhs = polar_transform(&x).add(&polar_transform(&y)).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn binary_involution((_q, x, _y) in vec_strategy()) {
            let x: Vec<u32> = x.iter().map(|s| s % 2).collect();
            let x = v(2, &x);
            prop_assert_eq!(polar_transform(&polar_transform(&x)), x);
        }
    }
}
