//! Sparse layered subset counting.
//!
//! A [`CountTable`] holds, for every reachable state and every cardinality
//! `s`, how many subsets of the agents processed so far have that size and
//! end in that state. Adding an agent forks every subset into "skip" (state
//! unchanged) and "take" (state updated, size + 1).

use std::collections::HashMap;
use std::hash::Hash;
use std::ops::AddAssign;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::CoefficientTable;

/// Default cap on stored `(cardinality, state)` keys per layer.
pub const DEFAULT_STATE_BUDGET: usize = 10_000_000;

/// Subset counter. Fixed-width counters are only used when every possible
/// count (at most `2^(n-1)`) fits.
pub trait Count: Clone + Zero + One + for<'a> AddAssign<&'a Self> + Send + Sync {
    /// Largest layer count whose totals are guaranteed to fit.
    const MAX_LAYERS: usize;

    fn to_bigint(&self) -> BigInt;
}

impl Count for u64 {
    const MAX_LAYERS: usize = 63;

    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Count for u128 {
    const MAX_LAYERS: usize = 127;

    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl Count for BigUint {
    const MAX_LAYERS: usize = usize::MAX;

    fn to_bigint(&self) -> BigInt {
        BigInt::from(self.clone())
    }
}

/// Counts of subsets grouped by `(cardinality, state)`.
#[derive(Debug, Clone)]
pub struct CountTable<S, C = BigUint> {
    layer: usize,
    states: Vec<S>,
    index: HashMap<S, usize>,
    /// `by_size[s][k]` counts subsets of size `s` ending in state `k`.
    by_size: Vec<Vec<C>>,
    budget: usize,
}

impl<S: Clone + Eq + Hash, C: Count> CountTable<S, C> {
    /// Layer 0: only the empty subset, in `initial`. `max_layers` bounds how
    /// many agents will be pushed.
    pub fn new(initial: S, max_layers: usize, budget: usize) -> Result<Self> {
        if max_layers > C::MAX_LAYERS {
            return Err(Error::Precondition(format!(
                "counter type holds at most {} layers, {max_layers} requested",
                C::MAX_LAYERS
            )));
        }
        let mut by_size = vec![vec![C::zero()]; max_layers + 1];
        by_size[0][0] = C::one();
        let mut index = HashMap::new();
        index.insert(initial.clone(), 0);
        Ok(CountTable {
            layer: 0,
            states: vec![initial],
            index,
            by_size,
            budget,
        })
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    fn intern(&mut self, s: S) -> usize {
        if let Some(&k) = self.index.get(&s) {
            return k;
        }
        let k = self.states.len();
        self.index.insert(s.clone(), k);
        self.states.push(s);
        for row in &mut self.by_size {
            row.push(C::zero());
        }
        k
    }

    /// Adds one agent whose inclusion maps a state through `update`.
    pub fn push_agent(&mut self, update: impl Fn(&S) -> S) -> Result<()> {
        if self.layer + 1 >= self.by_size.len() {
            return Err(Error::Precondition("count table is full".into()));
        }
        let old = self.states.len();
        let targets: Vec<usize> = (0..old)
            .map(|u| {
                let t = update(&self.states[u]);
                self.intern(t)
            })
            .collect();
        // Descending sizes: row s is read before anything is written into it.
        for s in (0..=self.layer).rev() {
            let (lo, hi) = self.by_size.split_at_mut(s + 1);
            let (src, dst) = (&lo[s], &mut hi[0]);
            for (u, &t) in targets.iter().enumerate() {
                if !src[u].is_zero() {
                    dst[t] += &src[u];
                }
            }
        }
        self.layer += 1;
        self.enforce_budget()
    }

    /// Passes every subset through `map` without forking (an agent that is
    /// forced in or out). States that collide are merged.
    pub fn relabel(&mut self, map: impl Fn(&S) -> S) -> Result<()> {
        let mut out = CountTable::<S, C> {
            layer: self.layer,
            states: Vec::new(),
            index: HashMap::new(),
            by_size: vec![Vec::new(); self.by_size.len()],
            budget: self.budget,
        };
        let targets: Vec<usize> = self.states.iter().map(|st| out.intern(map(st))).collect();
        for (row, new_row) in self.by_size.iter().zip(out.by_size.iter_mut()) {
            for (u, &t) in targets.iter().enumerate() {
                if !row[u].is_zero() {
                    new_row[t] += &row[u];
                }
            }
        }
        *self = out;
        Ok(())
    }

    fn enforce_budget(&self) -> Result<()> {
        let upper = self.states.len().saturating_mul(self.layer + 1);
        if upper <= self.budget {
            return Ok(());
        }
        let keys = self.distinct_keys();
        if keys > self.budget {
            return Err(Error::Capacity {
                what: "distinct (cardinality, state) keys",
                limit: self.budget,
                reached: keys,
                layer: Some(self.layer),
            });
        }
        Ok(())
    }

    /// Number of stored `(cardinality, state)` keys with a nonzero count.
    pub fn distinct_keys(&self) -> usize {
        self.by_size[..=self.layer]
            .iter()
            .map(|row| row.iter().filter(|c| !c.is_zero()).count())
            .sum()
    }

    pub fn get(&self, cardinality: usize, state: &S) -> C {
        match self.index.get(state) {
            Some(&k) if cardinality <= self.layer => self.by_size[cardinality][k].clone(),
            _ => C::zero(),
        }
    }

    /// Per-cardinality counts of the `k`-th stored state, over `0..=layer`.
    pub fn counts_of(&self, k: usize) -> Vec<C> {
        self.by_size[..=self.layer]
            .iter()
            .map(|row| row[k].clone())
            .collect()
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    /// Nonzero entries as `(cardinality, state, count)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &S, &C)> + '_ {
        self.by_size[..=self.layer]
            .iter()
            .enumerate()
            .flat_map(move |(s, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(move |(k, c)| (s, &self.states[k], c))
            })
    }

    /// Sum of all counts; `2^layer` when every subset is accounted for.
    pub fn total(&self) -> BigInt {
        self.by_size.iter().flatten().map(Count::to_bigint).sum()
    }

    /// Adds per-cardinality counts of the states accepted by `key` into
    /// buckets chosen by that key. Summing counts of one layer at a fixed
    /// cardinality never exceeds a binomial coefficient, so buckets cannot
    /// overflow the counter type.
    pub fn bucket<K: Eq + Hash>(&self, key: impl Fn(&S) -> Option<K>) -> HashMap<K, Vec<C>> {
        let keys: Vec<Option<K>> = self.states.iter().map(key).collect();
        let mut out: HashMap<K, Vec<C>> = HashMap::new();
        for (k, b) in keys.into_iter().enumerate() {
            let Some(b) = b else { continue };
            let acc = out
                .entry(b)
                .or_insert_with(|| vec![C::zero(); self.layer + 1]);
            for (s, a) in acc.iter_mut().enumerate() {
                *a += &self.by_size[s][k];
            }
        }
        out
    }
}

/// Shapley combination over bucketed counts: every bucket contributes
/// `value(key) * sum_s coefficient(s) * count[s]`.
pub fn weighted_sum<K, C: Count>(
    buckets: &HashMap<K, Vec<C>>,
    coefficients: &CoefficientTable,
    value: impl Fn(&K) -> BigRational,
) -> BigRational {
    buckets
        .iter()
        .map(|(k, counts)| {
            let v = value(k);
            if v.is_zero() {
                return BigRational::zero();
            }
            let per_size: Vec<BigInt> = counts.iter().map(Count::to_bigint).collect();
            v * coefficients.weigh(&per_size)
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

/// Picks the narrowest counter that holds `layers` layers and runs `$body`
/// with the type alias `$c` bound to it.
macro_rules! with_counter {
    ($layers:expr, $c:ident => $body:expr) => {{
        let layers: usize = $layers;
        if layers <= <u64 as $crate::table::Count>::MAX_LAYERS {
            type $c = u64;
            $body
        } else if layers <= <u128 as $crate::table::Count>::MAX_LAYERS {
            type $c = u128;
            $body
        } else {
            type $c = num_bigint::BigUint;
            $body
        }
    }};
}
pub(crate) use with_counter;
