use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    BruteSubset,
    BrutePermutation,
    MonteCarlo,
    VectorDp,
    Rounding,
    Engine,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::BruteSubset,
        Algorithm::BrutePermutation,
        Algorithm::MonteCarlo,
        Algorithm::VectorDp,
        Algorithm::Rounding,
        Algorithm::Engine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::BruteSubset => "brute-subset",
            Algorithm::BrutePermutation => "brute-permutation",
            Algorithm::MonteCarlo => "monte-carlo",
            Algorithm::VectorDp => "vector-dp",
            Algorithm::Rounding => "rounding",
            Algorithm::Engine => "engine",
        }
    }

    /// Whether the algorithm returns the exact Shapley value of the game it
    /// was given. Rounding is exact for the rounded game only.
    pub fn is_exact(self) -> bool {
        !matches!(self, Algorithm::MonteCarlo | Algorithm::Rounding)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown algorithm {s:?}")))
    }
}

/// Per-agent Shapley values with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyResult {
    pub values: Vec<BigRational>,
    pub algorithm: Algorithm,
    pub parameters: BTreeMap<String, String>,
}

impl ShapleyResult {
    pub fn new(values: Vec<BigRational>, algorithm: Algorithm) -> Self {
        ShapleyResult {
            values,
            algorithm,
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_parameter(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> BigRational {
        self.values
            .iter()
            .fold(BigRational::zero(), |acc, v| acc + v)
    }

    /// Largest per-agent absolute difference; `None` on length mismatch.
    pub fn max_abs_diff(&self, other: &ShapleyResult) -> Option<BigRational> {
        if self.len() != other.len() {
            return None;
        }
        Some(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| num_traits::abs(a - b))
                .fold(BigRational::zero(), |m, d| if d > m { d } else { m }),
        )
    }
}
