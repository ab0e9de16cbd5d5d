//! Agents, coalitions and the value-function contract shared by every algorithm.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};

/// A 1-based agent label, `1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(usize);

impl AgentId {
    /// Builds an id from its 1-based label.
    pub fn new(label: usize) -> Result<Self> {
        if label == 0 {
            return Err(Error::Precondition("agent labels start at 1".into()));
        }
        Ok(AgentId(label))
    }

    /// Builds an id from a 0-based position.
    pub fn from_index(index: usize) -> Self {
        AgentId(index + 1)
    }

    /// 1-based label.
    pub fn label(self) -> usize {
        self.0
    }

    /// 0-based position.
    pub fn index(self) -> usize {
        self.0 - 1
    }

    pub fn check(self, n: usize) -> Result<Self> {
        if self.0 > n {
            Err(Error::Precondition(format!(
                "agent {} out of range 1..={n}",
                self.0
            )))
        } else {
            Ok(self)
        }
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A subset of agents stored as a bitset over 0-based agent positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Coalition {
    words: Vec<u64>,
    size: usize,
}

impl Coalition {
    pub fn empty(n: usize) -> Self {
        Coalition {
            words: vec![0; n.div_ceil(64).max(1)],
            size: 0,
        }
    }

    pub fn full(n: usize) -> Self {
        let mut c = Coalition::empty(n);
        for i in 0..n {
            c.insert(i);
        }
        c
    }

    /// Coalition from the low `n` bits of `mask`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut c = Coalition::empty(n);
        c.words[0] = mask;
        c.size = mask.count_ones() as usize;
        c
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut c = Coalition::empty(n);
        for i in indices {
            c.insert(i);
        }
        c
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| w & (1u64 << (i % 64)) != 0)
    }

    pub fn insert(&mut self, i: usize) -> bool {
        if i / 64 >= self.words.len() {
            self.words.resize(i / 64 + 1, 0);
        }
        let bit = 1u64 << (i % 64);
        let fresh = self.words[i / 64] & bit == 0;
        if fresh {
            self.words[i / 64] |= bit;
            self.size += 1;
        }
        fresh
    }

    pub fn remove(&mut self, i: usize) -> bool {
        let Some(w) = self.words.get_mut(i / 64) else {
            return false;
        };
        let bit = 1u64 << (i % 64);
        let present = *w & bit != 0;
        if present {
            *w &= !bit;
            self.size -= 1;
        }
        present
    }

    pub fn toggle(&mut self, i: usize) {
        if !self.remove(i) {
            self.insert(i);
        }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// Members as 0-based positions, ascending.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// Members with 1-based labels in `a..=b` (the slice `X_{a,b}`).
    pub fn range(&self, a: usize, b: usize) -> Coalition {
        let mut out = Coalition::empty(self.words.len() * 64);
        for i in self.iter().filter(|&i| i + 1 >= a && i < b) {
            out.insert(i);
        }
        out
    }

    pub fn is_subset_of(&self, other: &Coalition) -> bool {
        self.iter().all(|i| other.contains(i))
    }

    /// Highest member position plus one; 0 when empty.
    pub fn span(&self) -> usize {
        self.iter().last().map_or(0, |i| i + 1)
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

/// Characteristic function of a cooperative game.
///
/// Implementations must return zero on the empty coalition.
pub trait ValueFunction: Sync {
    fn agent_count(&self) -> usize;

    fn value(&self, coalition: &Coalition) -> BigRational;
}

impl<V: ValueFunction + ?Sized> ValueFunction for &V {
    fn agent_count(&self) -> usize {
        (**self).agent_count()
    }

    fn value(&self, coalition: &Coalition) -> BigRational {
        (**self).value(coalition)
    }
}

/// Pointwise sum `v + w` of two games over the same agent set.
pub struct SumGame<A, B> {
    pub left: A,
    pub right: B,
}

impl<A: ValueFunction, B: ValueFunction> SumGame<A, B> {
    pub fn new(left: A, right: B) -> Result<Self> {
        if left.agent_count() != right.agent_count() {
            return Err(Error::Precondition(format!(
                "games have {} and {} agents",
                left.agent_count(),
                right.agent_count()
            )));
        }
        Ok(SumGame { left, right })
    }
}

impl<A: ValueFunction, B: ValueFunction> ValueFunction for SumGame<A, B> {
    fn agent_count(&self) -> usize {
        self.left.agent_count()
    }

    fn value(&self, coalition: &Coalition) -> BigRational {
        self.left.value(coalition) + self.right.value(coalition)
    }
}

/// A game given by an explicit closure; mostly for tests and constructed games.
pub struct FnGame<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&Coalition) -> BigRational + Sync> FnGame<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnGame { n, f }
    }
}

impl<F: Fn(&Coalition) -> BigRational + Sync> ValueFunction for FnGame<F> {
    fn agent_count(&self) -> usize {
        self.n
    }

    fn value(&self, coalition: &Coalition) -> BigRational {
        if coalition.is_empty() {
            return BigRational::zero();
        }
        (self.f)(coalition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coalition_tracks_size() {
        let mut c = Coalition::empty(70);
        assert!(c.insert(3));
        assert!(c.insert(68));
        assert!(!c.insert(3));
        assert_eq!(c.len(), 2);
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![3, 68]);
        c.toggle(3);
        assert_eq!(c.len(), 1);
        assert!(!c.contains(3));
        assert_eq!(c.span(), 69);
    }

    #[test]
    fn range_uses_one_based_labels() {
        let c = Coalition::from_indices(6, [0, 2, 3, 5]);
        let r = c.range(2, 4);
        assert_eq!(r.iter().collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(c.to_string(), "{1,3,4,6}");
    }

    #[test]
    fn agent_ids_are_one_based() {
        assert!(AgentId::new(0).is_err());
        let a = AgentId::new(3).unwrap();
        assert_eq!(a.index(), 2);
        assert!(a.check(2).is_err());
        assert!(a.check(3).is_ok());
    }
}
