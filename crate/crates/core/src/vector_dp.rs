//! Exact Shapley values for knapsack games.
//!
//! Coalitions not containing agent `i` are grouped by their size and their
//! value vector (the optimal packing at every capacity). Agent `i`'s marginal
//! contribution depends only on the vector, so the Shapley sum runs over
//! groups instead of subsets. Group sizes are counted by pushing agents one
//! at a time through a sparse [`CountTable`].

use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::Result;
use crate::game::AgentId;
use crate::knapsack::{GameInstance, ValueVector};
use crate::rational::{int, CoefficientTable};
use crate::table::{weighted_sum, with_counter, Count, CountTable, DEFAULT_STATE_BUDGET};

/// Value vector of `S ∪ {agent}` from the vector of `S`:
/// `v(b) = max(u(b), u(b - l) + w)` for `b >= l`, unchanged below `l`.
pub fn update_vector(u: &ValueVector, length: u64, weight: u64) -> ValueVector {
    let mut v = u.clone();
    v.absorb(length, weight);
    v
}

/// Agent's marginal contribution to any coalition whose value vector is `v`:
/// `max(v(bin - l) + w - v(bin), 0)`.
pub fn marginal_from_vector(v: &ValueVector, length: u64, weight: u64) -> u64 {
    let bin = v.bin();
    (v.at(bin - length) + weight).saturating_sub(v.at(bin))
}

/// Counts subsets of `N \ {excluded}` by `(size, value vector)`.
pub fn build_count_table<C: Count>(
    inst: &GameInstance,
    excluded: AgentId,
    budget: usize,
) -> Result<CountTable<ValueVector, C>> {
    let n = inst.len();
    excluded.check(n)?;
    let order: Vec<usize> = (0..n).filter(|&k| k != excluded.index()).collect();
    build_count_table_in_order(inst, &order, budget)
}

/// Same as [`build_count_table`] over an explicit agent sequence (0-based).
pub fn build_count_table_in_order<C: Count>(
    inst: &GameInstance,
    agents: &[usize],
    budget: usize,
) -> Result<CountTable<ValueVector, C>> {
    let mut table = CountTable::new(ValueVector::zero(inst.bin()), agents.len(), budget)?;
    for &j in agents {
        let a = inst.agent(j);
        table.push_agent(|u| update_vector(u, a.length, a.weight))?;
    }
    Ok(table)
}

pub(crate) fn combine<C: Count>(
    table: &CountTable<ValueVector, C>,
    n: usize,
    length: u64,
    weight: u64,
) -> BigRational {
    let buckets = table.bucket(|v| Some(marginal_from_vector(v, length, weight)));
    weighted_sum(&buckets, &CoefficientTable::new(n), |&m| int(m))
}

pub fn shapley_exact_dp(inst: &GameInstance, i: AgentId) -> Result<BigRational> {
    shapley_exact_dp_with_budget(inst, i, DEFAULT_STATE_BUDGET)
}

pub fn shapley_exact_dp_with_budget(
    inst: &GameInstance,
    i: AgentId,
    budget: usize,
) -> Result<BigRational> {
    let n = inst.len();
    i.check(n)?;
    let a = inst.agent(i.index());
    with_counter!(n - 1, C => {
        let table = build_count_table::<C>(inst, i, budget)?;
        Ok(combine(&table, n, a.length, a.weight))
    })
}

/// Every agent's value, computed in parallel.
pub fn shapley_exact_dp_all(inst: &GameInstance, budget: usize) -> Result<Vec<BigRational>> {
    (0..inst.len())
        .into_par_iter()
        .map(|k| shapley_exact_dp_with_budget(inst, AgentId::from_index(k), budget))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::game::Coalition;
    use crate::oracle::shapley_brute_subsets;
    use crate::rational::ratio;
    use num_bigint::{BigInt, BigUint};
    use proptest::prelude::*;

    fn vv(c: &[u64]) -> ValueVector {
        ValueVector::from_coords(c.to_vec())
    }

    #[test]
    fn update_examples() {
        assert_eq!(update_vector(&vv(&[0, 0, 0]), 1, 2), vv(&[0, 2, 2]));
        // items (1,2),(2,3) at capacity 2: item 2 alone beats item 1 alone
        assert_eq!(update_vector(&vv(&[0, 2, 2]), 2, 3), vv(&[0, 2, 3]));
        assert_eq!(update_vector(&vv(&[0, 5]), 1, 0), vv(&[0, 5]));
        let inst = GameInstance::from_pairs(&[(1, 2), (2, 3)], 2).unwrap();
        assert_eq!(
            update_vector(&vv(&[0, 2, 2]), 2, 3),
            inst.value_vector(&Coalition::full(2))
        );
    }

    #[test]
    fn marginal_examples() {
        assert_eq!(marginal_from_vector(&vv(&[0, 0]), 1, 5), 5);
        assert_eq!(marginal_from_vector(&vv(&[0, 2]), 1, 1), 0);
        assert_eq!(marginal_from_vector(&vv(&[0, 2, 3]), 1, 2), 1);
        // matching instance: S = {(1,2),(2,3)}, i = (1,2); v(S ∪ i) = 4, v(S) = 3
        let inst = GameInstance::from_pairs(&[(1, 2), (2, 3), (1, 2)], 2).unwrap();
        let s = Coalition::from_indices(3, [0, 1]);
        let t = Coalition::full(3);
        assert_eq!(inst.knapsack_value(&t) - inst.knapsack_value(&s), 1);
    }

    fn entries(t: &CountTable<ValueVector, BigUint>) -> Vec<(usize, Vec<u64>, u64)> {
        let mut e: Vec<_> = t
            .entries()
            .map(|(s, v, c)| (s, v.coords().to_vec(), u64::try_from(c).unwrap()))
            .collect();
        e.sort();
        e
    }

    #[test]
    fn count_table_examples() {
        let inst = GameInstance::from_pairs(&[(1, 2), (1, 1)], 1).unwrap();
        let t = build_count_table::<BigUint>(&inst, AgentId::new(2).unwrap(), DEFAULT_STATE_BUDGET)
            .unwrap();
        assert_eq!(entries(&t), vec![(0, vec![0, 0], 1), (1, vec![0, 2], 1)]);
        let t = build_count_table::<BigUint>(&inst, AgentId::new(1).unwrap(), DEFAULT_STATE_BUDGET)
            .unwrap();
        assert_eq!(entries(&t), vec![(0, vec![0, 0], 1), (1, vec![0, 1], 1)]);
        let single = GameInstance::from_pairs(&[(2, 7)], 3).unwrap();
        let t =
            build_count_table::<BigUint>(&single, AgentId::new(1).unwrap(), DEFAULT_STATE_BUDGET)
                .unwrap();
        assert_eq!(entries(&t), vec![(0, vec![0, 0, 0, 0], 1)]);
    }

    #[test]
    fn exact_examples() {
        let inst = GameInstance::from_pairs(&[(1, 2), (1, 1)], 1).unwrap();
        assert_eq!(
            shapley_exact_dp(&inst, AgentId::new(1).unwrap()).unwrap(),
            ratio(3, 2)
        );
        let additive = GameInstance::from_pairs(&[(1, 1), (1, 2), (1, 3), (1, 4)], 4).unwrap();
        assert_eq!(
            shapley_exact_dp(&additive, AgentId::new(3).unwrap()).unwrap(),
            int(3)
        );
        let with_null = GameInstance::from_pairs(&[(1, 4), (2, 0), (1, 3)], 2).unwrap();
        assert_eq!(
            shapley_exact_dp(&with_null, AgentId::new(2).unwrap()).unwrap(),
            int(0)
        );
    }

    #[test]
    fn capacity_error_instead_of_blowup() {
        let pairs: Vec<_> = (0..30)
            .map(|k| (1 + k % 5, 1 + (k * 7919) % 1000))
            .collect();
        let inst = GameInstance::from_pairs(&pairs, 5).unwrap();
        match shapley_exact_dp_with_budget(&inst, AgentId::new(1).unwrap(), 1000) {
            Err(Error::Capacity { layer: Some(_), .. }) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    fn instance() -> impl Strategy<Value = GameInstance> {
        (1u64..=3).prop_flat_map(|bin| {
            proptest::collection::vec((1..=bin, 0u64..=4), 1..=9)
                .prop_map(move |p| GameInstance::from_pairs(&p, bin).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn matches_brute_force(inst in instance()) {
            for k in 0..inst.len() {
                let i = AgentId::from_index(k);
                prop_assert_eq!(shapley_exact_dp(&inst, i).unwrap(), shapley_brute_subsets(&inst, i).unwrap());
            }
        }

        #[test]
        fn table_invariants(inst in instance(), pick in any::<prop::sample::Index>()) {
            let i = AgentId::from_index(pick.index(inst.len()));
            let order: Vec<usize> = (0..inst.len()).filter(|&k| k != i.index()).collect();
            let mut table = CountTable::<ValueVector, u64>::new(ValueVector::zero(inst.bin()), order.len(), DEFAULT_STATE_BUDGET).unwrap();
            for (j, &k) in order.iter().enumerate() {
                let a = inst.agent(k);
                table.push_agent(|u| update_vector(u, a.length, a.weight)).unwrap();
                prop_assert_eq!(table.total(), BigInt::from(1u64 << (j + 1)));
                prop_assert!(table.states().iter().all(|v| v.is_well_formed(inst.w_max())));
            }
        }

        #[test]
        fn processing_order_is_irrelevant(inst in instance(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let n = inst.len();
            let i = AgentId::from_index(seed as usize % n);
            let mut order: Vec<usize> = (0..n).filter(|&k| k != i.index()).collect();
            let forward = build_count_table_in_order::<u64>(&inst, &order, DEFAULT_STATE_BUDGET).unwrap();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled = build_count_table_in_order::<u64>(&inst, &order, DEFAULT_STATE_BUDGET).unwrap();
            let a = inst.agent(i.index());
            prop_assert_eq!(combine(&forward, n, a.length, a.weight), combine(&shuffled, n, a.length, a.weight));
        }

        #[test]
        fn efficiency(inst in instance()) {
            let total: BigRational = shapley_exact_dp_all(&inst, DEFAULT_STATE_BUDGET).unwrap().into_iter().sum();
            prop_assert_eq!(total, int(inst.knapsack_value(&Coalition::full(inst.len()))));
        }
    }
}
