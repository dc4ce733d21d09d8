//! Synthetic target distributions, stored sparsely as support → probability.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::MAX_ENUMERATED_VISIBLE;
use crate::{Error, Result};

const NORMALIZATION_TOL: f64 = 1e-12;

/// Target distribution `q` over `{0,1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDistribution {
    n: usize,
    support: BTreeMap<u64, f64>,
}

impl TargetDistribution {
    /// Validates length, positivity and normalization.
    pub fn new(n: usize, support: BTreeMap<u64, f64>) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::InvalidDistribution(format!(
                "unsupported bit length {n}"
            )));
        }
        let mut total = 0.0;
        for (&v, &p) in &support {
            if v >> n != 0 {
                return Err(Error::InvalidDistribution(format!(
                    "bitstring {v} does not fit in {n} bits"
                )));
            }
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} for {} must be positive",
                    format_bitstring(v, n)
                )));
            }
            total += p;
        }
        if support.is_empty() || (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { n, support })
    }

    /// Uniform distribution over distinct `states`.
    pub fn uniform(n: usize, states: impl IntoIterator<Item = u64>) -> Result<Self> {
        let states: Vec<u64> = states.into_iter().collect();
        let p = 1.0 / states.len() as f64;
        let mut support = BTreeMap::new();
        for v in states {
            if support.insert(v, p).is_some() {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate bitstring {}",
                    format_bitstring(v, n)
                )));
            }
        }
        Self::new(n, support)
    }

    /// Sparse view of a dense vector; zero entries are dropped.
    pub fn from_dense(n: usize, probs: &[f64]) -> Result<Self> {
        if probs.len() != 1usize << n {
            return Err(Error::ShapeMismatch {
                field: "probs".into(),
                expected: 1 << n,
                found: probs.len(),
            });
        }
        let support = probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(v, &p)| (v as u64, p))
            .collect();
        Self::new(n, support)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &BTreeMap<u64, f64> {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn prob(&self, v: u64) -> f64 {
        self.support.get(&v).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.support.iter().map(|(&v, &p)| (v, p))
    }

    pub fn total_mass(&self) -> f64 {
        self.support.values().sum()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1usize << self.n];
        for (v, p) in self.iter() {
            out[v as usize] = p;
        }
        out
    }
}

/// Renders `v` as `v_1 … v_n`.
pub fn format_bitstring(v: u64, n: usize) -> String {
    (0..n)
        .map(|i| {
            if (v >> (n - 1 - i)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Parses a `v_1 … v_n` string; returns the index and its length.
pub fn parse_bitstring(s: &str) -> Result<(u64, usize)> {
    if s.is_empty() || s.len() > 63 {
        return Err(Error::InvalidDistribution(format!("bad bitstring {s:?}")));
    }
    let mut v = 0u64;
    for c in s.chars() {
        v = (v << 1)
            | match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::InvalidDistribution(format!("bad bitstring {s:?}"))),
            };
    }
    Ok((v, s.len()))
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_ENUMERATED_VISIBLE {
        return Err(Error::TooManyVisible {
            n,
            limit: MAX_ENUMERATED_VISIBLE,
        });
    }
    Ok(())
}

fn require_even(name: &str, n: usize, min: usize) -> Result<()> {
    if !n.is_multiple_of(2) || n < min {
        return Err(Error::InvalidDataset(format!(
            "{name} requires an even n >= {min}, got {n}"
        )));
    }
    Ok(())
}

/// Uniform over even-parity bitstrings.
pub fn parity(n: usize) -> Result<TargetDistribution> {
    if n < 2 {
        return Err(Error::InvalidDataset(format!(
            "parity requires n >= 2, got {n}"
        )));
    }
    check_n(n)?;
    TargetDistribution::uniform(n, (0..1u64 << n).filter(|v| v.count_ones() % 2 == 0))
}

/// Uniform over bitstrings of Hamming weight `n/2`.
pub fn cardinality(n: usize) -> Result<TargetDistribution> {
    require_even("cardinality", n, 2)?;
    check_n(n)?;
    TargetDistribution::uniform(
        n,
        (0..1u64 << n).filter(|v| v.count_ones() as usize == n / 2),
    )
}

/// Single full row or single full column on a 2 × n/2 grid laid out row-major.
pub fn simplified_bas(n: usize) -> Result<TargetDistribution> {
    require_even("simplified-BAS", n, 4)?;
    check_n(n)?;
    let cols = n / 2;
    let bit = |row: usize, col: usize| 1u64 << (n - 1 - (row * cols + col));
    let mut states = Vec::with_capacity(2 + cols);
    for row in 0..2 {
        states.push((0..cols).fold(0, |acc, col| acc | bit(row, col)));
    }
    for col in 0..cols {
        states.push(bit(0, col) | bit(1, col));
    }
    TargetDistribution::uniform(n, states)
}

/// Uniform over `min(n², 2^n)` distinct bitstrings drawn without replacement.
pub fn random_poly_support(n: usize, seed: u64) -> Result<TargetDistribution> {
    if n < 2 {
        return Err(Error::InvalidDataset(format!(
            "random support requires n >= 2, got {n}"
        )));
    }
    check_n(n)?;
    let space = 1usize << n;
    let amount = (n * n).min(space);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let states = rand::seq::index::sample(&mut rng, space, amount)
        .into_iter()
        .map(|v| v as u64);
    TargetDistribution::uniform(n, states)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DatasetKind {
    Parity,
    Cardinality,
    SimplifiedBas,
    RandomPoly,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 4] = [
        DatasetKind::SimplifiedBas,
        DatasetKind::RandomPoly,
        DatasetKind::Cardinality,
        DatasetKind::Parity,
    ];

    pub const fn name(self) -> &'static str {
        match self {
            DatasetKind::Parity => "parity",
            DatasetKind::Cardinality => "cardinality",
            DatasetKind::SimplifiedBas => "bas",
            DatasetKind::RandomPoly => "poly",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "parity" => Some(DatasetKind::Parity),
            "cardinality" => Some(DatasetKind::Cardinality),
            "bas" | "simplified-bas" => Some(DatasetKind::SimplifiedBas),
            "poly" | "random-poly" => Some(DatasetKind::RandomPoly),
            _ => None,
        }
    }

    /// Whether the generated target depends on the seed.
    pub const fn is_seeded(self) -> bool {
        matches!(self, DatasetKind::RandomPoly)
    }

    /// Checks the size precondition without building the support.
    pub fn check(self, n: usize) -> Result<()> {
        match self {
            DatasetKind::Parity | DatasetKind::RandomPoly if n < 2 => Err(Error::InvalidDataset(
                format!("{} requires n >= 2, got {n}", self.name()),
            )),
            DatasetKind::Cardinality => require_even("cardinality", n, 2),
            DatasetKind::SimplifiedBas => require_even("simplified-BAS", n, 4),
            _ => Ok(()),
        }
        .and_then(|_| check_n(n))
    }

    pub fn generate(self, n: usize, seed: u64) -> Result<TargetDistribution> {
        match self {
            DatasetKind::Parity => parity(n),
            DatasetKind::Cardinality => cardinality(n),
            DatasetKind::SimplifiedBas => simplified_bas(n),
            DatasetKind::RandomPoly => random_poly_support(n, seed),
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(q: &TargetDistribution) -> Vec<String> {
        q.iter().map(|(v, _)| format_bitstring(v, q.n())).collect()
    }

    #[test]
    fn parity_examples() {
        let q = parity(2).unwrap();
        assert_eq!(strings(&q), ["00", "11"]);
        assert!(q.iter().all(|(_, p)| p == 0.5));
        let q = parity(4).unwrap();
        assert_eq!(q.len(), 8);
        assert!(q.iter().all(|(_, p)| p == 0.125));
        assert_eq!(parity(12).unwrap().len(), 2048);
        assert!(parity(1).is_err());
    }

    #[test]
    fn cardinality_examples() {
        let q = cardinality(4).unwrap();
        assert_eq!(q.len(), 6);
        assert!(q.iter().all(|(_, p)| (p - 1.0 / 6.0).abs() < 1e-15));
        assert_eq!(strings(&cardinality(2).unwrap()), ["01", "10"]);
        assert_eq!(cardinality(12).unwrap().len(), 924);
        assert!(cardinality(5).is_err());
    }

    #[test]
    fn bas_examples() {
        let q = simplified_bas(4).unwrap();
        let mut s = strings(&q);
        s.sort();
        assert_eq!(s, ["0011", "0101", "1010", "1100"]);
        assert!(q.iter().all(|(_, p)| p == 0.25));
        assert_eq!(simplified_bas(8).unwrap().len(), 6);
        for n in [4, 6, 8, 10, 12] {
            let q = simplified_bas(n).unwrap();
            assert_eq!(q.len(), 2 + n / 2);
            for (v, _) in q.iter() {
                let w = v.count_ones() as usize;
                assert!(w == n / 2 || w == 2, "{}", format_bitstring(v, n));
            }
        }
        assert!(simplified_bas(7).is_err());
        assert!(simplified_bas(2).is_err());
    }

    #[test]
    fn random_support_examples() {
        let q = random_poly_support(4, 3).unwrap();
        assert_eq!(q.len(), 16);
        assert!(q.iter().all(|(_, p)| p == 1.0 / 16.0));
        let a = random_poly_support(8, 42).unwrap();
        assert_eq!(a.len(), 64);
        assert_eq!(a, random_poly_support(8, 42).unwrap());
        assert_ne!(a, random_poly_support(8, 43).unwrap());
    }

    #[test]
    fn generators_are_normalized() {
        for n in [4, 6, 8, 10] {
            for kind in DatasetKind::ALL {
                let q = kind.generate(n, 7).unwrap();
                assert!((q.total_mass() - 1.0).abs() <= 1e-12);
                assert!(q.iter().all(|(v, p)| p > 0.0 && v < 1 << n));
            }
        }
    }

    #[test]
    fn support_sizes_follow_difficulty_order() {
        let n = 12;
        let sizes: Vec<usize> = DatasetKind::ALL
            .iter()
            .map(|k| k.generate(n, 1).unwrap().len())
            .collect();
        assert_eq!(sizes, [8, 144, 924, 2048]);
        assert!(sizes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn bitstring_roundtrip() {
        assert_eq!(format_bitstring(0b0011, 4), "0011");
        assert_eq!(parse_bitstring("0011").unwrap(), (3, 4));
        assert!(parse_bitstring("01a").is_err());
    }

    #[test]
    fn rejects_unnormalized() {
        let mut m = BTreeMap::new();
        m.insert(0u64, 0.4);
        assert!(TargetDistribution::new(1, m).is_err());
        assert!(TargetDistribution::uniform(2, [1, 1]).is_err());
    }
}
