//! Knapsack budgeted games: agents with integer (length, weight) pairs and a
//! bin size; a coalition is worth the best knapsack packing of its members.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::game::{Coalition, ValueFunction};
use crate::rational::int;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Agent {
    pub length: u64,
    pub weight: u64,
}

/// A validated knapsack game. Every length satisfies `0 < length <= bin`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameInstance {
    agents: Vec<Agent>,
    bin: u64,
}

impl GameInstance {
    pub fn new(agents: Vec<Agent>, bin: u64) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::InvalidInstance("no agents".into()));
        }
        if bin == 0 {
            return Err(Error::InvalidInstance("bin size must be positive".into()));
        }
        if let Some((k, a)) = agents
            .iter()
            .enumerate()
            .find(|(_, a)| a.length == 0 || a.length > bin)
        {
            return Err(Error::InvalidInstance(format!(
                "agent {} has length {} outside 1..={bin}",
                k + 1,
                a.length
            )));
        }
        Ok(GameInstance { agents, bin })
    }

    /// Convenience constructor from `(length, weight)` pairs.
    pub fn from_pairs(pairs: &[(u64, u64)], bin: u64) -> Result<Self> {
        GameInstance::new(
            pairs
                .iter()
                .map(|&(length, weight)| Agent { length, weight })
                .collect(),
            bin,
        )
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn agent(&self, index: usize) -> Agent {
        self.agents[index]
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn bin(&self) -> u64 {
        self.bin
    }

    /// Same lengths and bin, new weights.
    pub fn with_weights(&self, weights: &[u64]) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::Precondition("weight count mismatch".into()));
        }
        GameInstance::new(
            self.agents
                .iter()
                .zip(weights)
                .map(|(a, &weight)| Agent { weight, ..*a })
                .collect(),
            self.bin,
        )
    }

    /// `ceil(bin * max_i w_i / l_i)`, an upper bound on `v(N)`.
    pub fn w_max(&self) -> u64 {
        let bin = self.bin as u128;
        self.agents
            .iter()
            .map(|a| (bin * a.weight as u128).div_ceil(a.length as u128))
            .max()
            .unwrap_or(0) as u64
    }

    pub fn total_length(&self, s: &Coalition) -> u64 {
        s.iter().map(|i| self.agents[i].length).sum()
    }

    pub fn total_weight(&self, s: &Coalition) -> u64 {
        s.iter().map(|i| self.agents[i].weight).sum()
    }

    /// Optimal packing value of the members of `s`, by the rolling
    /// capacity DP `c(b) = max(c(b), c(b - l) + w)`.
    pub fn knapsack_value(&self, s: &Coalition) -> u64 {
        self.value_vector(s).optimum()
    }

    /// Optimal packing value at every capacity `0..=bin`.
    pub fn value_vector(&self, s: &Coalition) -> ValueVector {
        let mut v = ValueVector::zero(self.bin);
        for i in s.iter() {
            let a = self.agents[i];
            v.absorb(a.length, a.weight);
        }
        v
    }
}

impl ValueFunction for GameInstance {
    fn agent_count(&self) -> usize {
        self.len()
    }

    fn value(&self, coalition: &Coalition) -> BigRational {
        int(self.knapsack_value(coalition))
    }
}

/// Best achievable weight at each capacity `0..=bin`, indexed by capacity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValueVector(Vec<u64>);

impl ValueVector {
    pub fn zero(bin: u64) -> Self {
        ValueVector(vec![0; bin as usize + 1])
    }

    pub fn from_coords(coords: Vec<u64>) -> Self {
        ValueVector(coords)
    }

    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn bin(&self) -> u64 {
        self.0.len() as u64 - 1
    }

    pub fn at(&self, capacity: u64) -> u64 {
        self.0[capacity as usize]
    }

    /// Value at full capacity.
    pub fn optimum(&self) -> u64 {
        *self
            .0
            .last()
            .expect("value vector has at least one coordinate")
    }

    /// In-place single-item update, high capacities first so every
    /// coordinate reads the pre-update vector.
    pub(crate) fn absorb(&mut self, length: u64, weight: u64) {
        let l = length as usize;
        for b in (l..self.0.len()).rev() {
            let cand = self.0[b - l] + weight;
            if cand > self.0[b] {
                self.0[b] = cand;
            }
        }
    }

    /// Coordinate 0 is zero, coordinates are nondecreasing, all are at most `bound`.
    pub fn is_well_formed(&self, bound: u64) -> bool {
        self.0.first() == Some(&0)
            && self.0.windows(2).all(|w| w[0] <= w[1])
            && self.0.iter().all(|&c| c <= bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Best packing by trying every sub-coalition.
    fn brute_value(inst: &GameInstance, s: &Coalition, capacity: u64) -> u64 {
        let members: Vec<usize> = s.iter().collect();
        (0u64..1 << members.len())
            .filter_map(|mask| {
                let chosen = members
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1);
                let (l, w) = chosen.fold((0, 0), |(l, w), (_, &i)| {
                    (l + inst.agent(i).length, w + inst.agent(i).weight)
                });
                (l <= capacity).then_some(w)
            })
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn value_examples() {
        let a = GameInstance::from_pairs(&[(1, 2), (1, 1)], 1).unwrap();
        assert_eq!(a.knapsack_value(&Coalition::empty(2)), 0);
        assert_eq!(a.knapsack_value(&Coalition::full(2)), 2);
        let b = GameInstance::from_pairs(&[(2, 3), (1, 1)], 2).unwrap();
        assert_eq!(b.knapsack_value(&Coalition::full(2)), 3);
    }

    #[test]
    fn value_vector_examples() {
        let a = GameInstance::from_pairs(&[(1, 2), (2, 3)], 2).unwrap();
        assert_eq!(a.value_vector(&Coalition::empty(2)).coords(), &[0, 0, 0]);
        assert_eq!(
            a.value_vector(&Coalition::from_indices(2, [0])).coords(),
            &[0, 2, 2]
        );
        assert_eq!(a.value_vector(&Coalition::full(2)).coords(), &[0, 2, 3]);
    }

    #[test]
    fn w_max_examples() {
        assert_eq!(
            GameInstance::from_pairs(&[(1, 2), (1, 1)], 1)
                .unwrap()
                .w_max(),
            2
        );
        assert_eq!(
            GameInstance::from_pairs(&[(2, 3), (1, 1)], 2)
                .unwrap()
                .w_max(),
            3
        );
        assert_eq!(GameInstance::from_pairs(&[(3, 2)], 3).unwrap().w_max(), 2);
        assert_eq!(GameInstance::from_pairs(&[(2, 1)], 3).unwrap().w_max(), 2);
    }

    #[test]
    fn rejects_degenerate_lengths() {
        let err = GameInstance::from_pairs(&[(1, 1), (3, 1)], 2).unwrap_err();
        assert!(err.to_string().contains("agent 2"), "{err}");
        assert!(GameInstance::from_pairs(&[(0, 1)], 2).is_err());
        assert!(GameInstance::from_pairs(&[], 2).is_err());
        assert!(GameInstance::from_pairs(&[(1, 1)], 0).is_err());
    }

    fn instance() -> impl Strategy<Value = GameInstance> {
        (1u64..=6).prop_flat_map(|bin| {
            proptest::collection::vec((1..=bin, 0u64..=9), 1..=12)
                .prop_map(move |pairs| GameInstance::from_pairs(&pairs, bin).unwrap())
        })
    }

    proptest! {
        #[test]
        fn dp_matches_enumeration(inst in instance(), mask in any::<u64>()) {
            let n = inst.len();
            let s = Coalition::from_mask(n, mask & ((1 << n) - 1));
            let vv = inst.value_vector(&s);
            for b in 0..=inst.bin() {
                prop_assert_eq!(vv.at(b), brute_value(&inst, &s, b));
            }
            prop_assert_eq!(vv.optimum(), inst.knapsack_value(&s));
            prop_assert!(vv.is_well_formed(inst.w_max()));
            prop_assert!(inst.w_max() >= inst.knapsack_value(&Coalition::full(n)));
        }

        #[test]
        fn monotone_in_coalition(inst in instance(), a in any::<u64>(), b in any::<u64>()) {
            let n = inst.len();
            let small = Coalition::from_mask(n, a & b & ((1 << n) - 1));
            let big = Coalition::from_mask(n, a & ((1 << n) - 1));
            prop_assert!(inst.knapsack_value(&small) <= inst.knapsack_value(&big));
        }

        #[test]
        fn unit_lengths_with_room_are_additive(ws in proptest::collection::vec(0u64..20, 1..10), mask in any::<u64>()) {
            let n = ws.len();
            let pairs: Vec<_> = ws.iter().map(|&w| (1, w)).collect();
            let inst = GameInstance::from_pairs(&pairs, n as u64).unwrap();
            let s = Coalition::from_mask(n, mask & ((1 << n) - 1));
            prop_assert_eq!(inst.knapsack_value(&s), inst.total_weight(&s));
        }
    }
}
