//! Enumeration-based checks of the four Shapley axioms.

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::game::{AgentId, Coalition, SumGame, ValueFunction};
use crate::shapley::ShapleyResult;

/// Default largest game the enumeration checks accept.
pub const DEFAULT_AXIOM_CAP: usize = 20;

fn check_len<V: ValueFunction>(v: &V, result: &ShapleyResult) -> Result<()> {
    if result.len() != v.agent_count() {
        return Err(Error::Precondition(format!(
            "result has {} values for {} agents",
            result.len(),
            v.agent_count()
        )));
    }
    Ok(())
}

fn enumeration_guard(n: usize, cap: usize) -> Result<()> {
    if n > cap || n > 63 {
        return Err(Error::cap("agents for axiom enumeration", cap.min(63), n));
    }
    Ok(())
}

/// Sum of the values equals `v(N)` exactly.
pub fn check_efficiency<V: ValueFunction>(v: &V, result: &ShapleyResult) -> bool {
    result.len() == v.agent_count() && result.total() == v.value(&Coalition::full(v.agent_count()))
}

/// Calls `f` with every coalition of `N \ excluded`.
fn for_each_subset_without(
    n: usize,
    excluded: &[usize],
    mut f: impl FnMut(&Coalition) -> bool,
) -> bool {
    let others: Vec<usize> = (0..n).filter(|k| !excluded.contains(k)).collect();
    for mask in 0u64..(1u64 << others.len()) {
        let s = Coalition::from_indices(
            n,
            others
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &k)| k),
        );
        if !f(&s) {
            return false;
        }
    }
    true
}

fn with(s: &Coalition, i: usize) -> Coalition {
    let mut t = s.clone();
    t.insert(i);
    t
}

pub fn are_interchangeable<V: ValueFunction>(v: &V, i: AgentId, j: AgentId) -> bool {
    let (a, b) = (i.index(), j.index());
    for_each_subset_without(v.agent_count(), &[a, b], |s| {
        v.value(&with(s, a)) == v.value(&with(s, b))
    })
}

pub fn is_null_player<V: ValueFunction>(v: &V, i: AgentId) -> bool {
    let a = i.index();
    for_each_subset_without(v.agent_count(), &[a], |s| {
        v.value(&with(s, a)) == v.value(s)
    })
}

/// True when `i` and `j` are not interchangeable, or when they are and
/// receive equal values.
pub fn check_symmetry_pair<V: ValueFunction>(
    v: &V,
    i: AgentId,
    j: AgentId,
    result: &ShapleyResult,
    cap: usize,
) -> Result<bool> {
    let n = v.agent_count();
    check_len(v, result)?;
    i.check(n)?;
    j.check(n)?;
    if i == j {
        return Err(Error::Precondition(
            "symmetry needs two distinct agents".into(),
        ));
    }
    enumeration_guard(n, cap)?;
    if !are_interchangeable(v, i, j) {
        return Ok(true);
    }
    Ok(result.values[i.index()] == result.values[j.index()])
}

/// True when `i` is not a null player, or when it is and its value is zero.
pub fn check_null_player<V: ValueFunction>(
    v: &V,
    i: AgentId,
    result: &ShapleyResult,
    cap: usize,
) -> Result<bool> {
    let n = v.agent_count();
    check_len(v, result)?;
    i.check(n)?;
    enumeration_guard(n, cap)?;
    if !is_null_player(v, i) {
        return Ok(true);
    }
    Ok(num_traits::Zero::is_zero(&result.values[i.index()]))
}

/// `phi(v) + phi(w) = phi(v + w)` agent by agent, where the sum game's
/// values are supplied by the caller (computed by any exact algorithm).
pub fn check_linearity<V: ValueFunction, W: ValueFunction>(
    v: &V,
    w: &W,
    phi_v: &ShapleyResult,
    phi_w: &ShapleyResult,
    phi_sum: &ShapleyResult,
) -> Result<bool> {
    let sum = SumGame::new(v, w)?;
    check_len(&sum, phi_v)?;
    check_len(&sum, phi_w)?;
    check_len(&sum, phi_sum)?;
    Ok(phi_v
        .values
        .iter()
        .zip(&phi_w.values)
        .zip(&phi_sum.values)
        .all(|((a, b), c)| &(a + b) == c))
}

/// Per-agent symmetry and null-player outcomes for a whole result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub efficiency: bool,
    /// `(i, j, interchangeable, passed)` for every pair `i < j`.
    pub symmetry: Vec<(AgentId, AgentId, bool, bool)>,
    /// `(i, null, passed)`.
    pub null_player: Vec<(AgentId, bool, bool)>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.efficiency && self.symmetry.iter().all(|t| t.3) && self.null_player.iter().all(|t| t.2)
    }
}

pub fn axiom_report<V: ValueFunction>(
    v: &V,
    result: &ShapleyResult,
    cap: usize,
) -> Result<AxiomReport> {
    let n = v.agent_count();
    check_len(v, result)?;
    enumeration_guard(n, cap)?;
    let mut symmetry = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (i, j) = (AgentId::from_index(a), AgentId::from_index(b));
            let inter = are_interchangeable(v, i, j);
            let pass = !inter || result.values[a] == result.values[b];
            symmetry.push((i, j, inter, pass));
        }
    }
    let null_player = (0..n)
        .map(|a| {
            let i = AgentId::from_index(a);
            let null = is_null_player(v, i);
            let zero: &BigRational = &result.values[a];
            (i, null, !null || num_traits::Zero::is_zero(zero))
        })
        .collect();
    Ok(AxiomReport {
        efficiency: check_efficiency(v, result),
        symmetry,
        null_player,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knapsack::GameInstance;
    use crate::oracle::shapley_brute_subsets;
    use crate::rational::int;
    use crate::shapley::Algorithm;

    fn id(k: usize) -> AgentId {
        AgentId::new(k).unwrap()
    }

    fn exact(g: &GameInstance) -> ShapleyResult {
        let values = (1..=g.len())
            .map(|k| shapley_brute_subsets(g, id(k)).unwrap())
            .collect();
        ShapleyResult::new(values, Algorithm::BruteSubset)
    }

    fn forged(values: &[i64]) -> ShapleyResult {
        ShapleyResult::new(
            values.iter().map(|&x| int(x)).collect(),
            Algorithm::BruteSubset,
        )
    }

    #[test]
    fn symmetry_examples() {
        let sym = GameInstance::from_pairs(&[(1, 5), (1, 5)], 1).unwrap();
        assert!(are_interchangeable(&sym, id(1), id(2)));
        assert!(check_symmetry_pair(&sym, id(1), id(2), &exact(&sym), 20).unwrap());
        assert!(!check_symmetry_pair(&sym, id(1), id(2), &forged(&[3, 2]), 20).unwrap());
        let skew = GameInstance::from_pairs(&[(1, 5), (1, 3)], 1).unwrap();
        assert!(!are_interchangeable(&skew, id(1), id(2)));
        assert!(check_symmetry_pair(&skew, id(1), id(2), &forged(&[0, 5]), 20).unwrap());
        assert!(check_symmetry_pair(&sym, id(1), id(1), &exact(&sym), 20).is_err());
    }

    #[test]
    fn null_player_examples() {
        let g = GameInstance::from_pairs(&[(1, 0), (1, 4)], 2).unwrap();
        assert!(is_null_player(&g, id(1)));
        assert!(!is_null_player(&g, id(2)));
        assert!(check_null_player(&g, id(1), &exact(&g), 20).unwrap());
        assert!(!check_null_player(&g, id(1), &forged(&[1, 3]), 20).unwrap());
        assert!(check_null_player(&g, id(3), &exact(&g), 20).is_err());
    }

    #[test]
    fn efficiency_and_additive_examples() {
        let g = GameInstance::from_pairs(&[(1, 3), (1, 4)], 2).unwrap();
        assert!(check_efficiency(&g, &forged(&[3, 4])));
        assert!(!check_efficiency(&g, &forged(&[3, 3])));
        assert!(!check_efficiency(&g, &forged(&[7])));
        let single = GameInstance::from_pairs(&[(2, 9)], 3).unwrap();
        let r = exact(&single);
        assert_eq!(r.values, vec![int(9)]);
        assert!(axiom_report(&single, &r, 20).unwrap().all_pass());
    }

    #[test]
    fn linearity_and_report() {
        let v = GameInstance::from_pairs(&[(1, 2), (2, 3), (1, 1)], 2).unwrap();
        let w = v.with_weights(&[5, 0, 2]).unwrap();
        let sum = SumGame::new(&v, &w).unwrap();
        let phi_sum = ShapleyResult::new(
            (1..=3)
                .map(|k| shapley_brute_subsets(&sum, id(k)).unwrap())
                .collect(),
            Algorithm::BruteSubset,
        );
        assert!(check_linearity(&v, &w, &exact(&v), &exact(&w), &phi_sum).unwrap());
        assert!(!check_linearity(&v, &w, &exact(&v), &exact(&v), &phi_sum).unwrap());
        let report = axiom_report(&w, &exact(&w), 20).unwrap();
        assert!(report.all_pass());
        assert_eq!(report.symmetry.len(), 3);
        assert!(report.null_player.iter().any(|t| t.1));
    }

    #[test]
    fn enumeration_cap() {
        let g = GameInstance::from_pairs(&[(1, 1); 5], 5).unwrap();
        let r = forged(&[1; 5]);
        assert!(matches!(
            axiom_report(&g, &r, 4),
            Err(Error::Capacity { .. })
        ));
        assert!(check_symmetry_pair(&g, id(1), id(2), &r, 4).is_err());
    }
}
