//! Ground-truth Shapley values by enumeration, plus a seeded Monte Carlo
//! baseline. Every fast algorithm in the crate is checked against these.

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{AgentId, Coalition, ValueFunction};
use crate::rational::{factorial, CoefficientTable};

pub const DEFAULT_SUBSET_CAP: usize = 20;
pub const DEFAULT_PERMUTATION_CAP: usize = 10;

/// Name of the permutation generator, recorded in result provenance.
pub const SAMPLER_RNG: &str = "chacha8 (rand_chacha 0.3), stream = chunk index";

/// Samples per independently seeded chunk. Fixed so the estimate does not
/// depend on how chunks are spread over threads.
const CHUNK: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    samples: usize,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(samples: usize, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::Precondition(
                "sample count must be at least 1".into(),
            ));
        }
        Ok(SamplerConfig { samples, seed })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }
}

fn marginal<V: ValueFunction>(v: &V, s: &mut Coalition, i: usize) -> BigRational {
    let without = v.value(s);
    s.insert(i);
    let with = v.value(s);
    s.remove(i);
    with - without
}

/// Weighted sum of marginal contributions over every `S ⊆ N \ {i}`.
///
/// Subsets are visited in Gray-code order so each step toggles one agent.
pub fn shapley_brute_subsets<V: ValueFunction>(v: &V, i: AgentId) -> Result<BigRational> {
    shapley_brute_subsets_capped(v, i, DEFAULT_SUBSET_CAP)
}

pub fn shapley_brute_subsets_capped<V: ValueFunction>(
    v: &V,
    i: AgentId,
    cap: usize,
) -> Result<BigRational> {
    let n = v.agent_count();
    i.check(n)?;
    if n > cap.min(63) {
        return Err(Error::cap("agents for subset enumeration", cap.min(63), n));
    }
    let target = i.index();
    let others: Vec<usize> = (0..n).filter(|&k| k != target).collect();
    let mut per_size = vec![BigRational::zero(); n];
    let mut s = Coalition::empty(n);
    per_size[0] += marginal(v, &mut s, target);
    for step in 1u64..(1u64 << others.len()) {
        // the bit flipped between consecutive Gray codes
        s.toggle(others[step.trailing_zeros() as usize]);
        let m = marginal(v, &mut s, target);
        per_size[s.len()] += m;
    }
    Ok(CoefficientTable::new(n).weigh_rational(&per_size))
}

/// Average marginal contribution over all `n!` orderings.
pub fn shapley_brute_permutations<V: ValueFunction>(v: &V, i: AgentId) -> Result<BigRational> {
    shapley_brute_permutations_capped(v, i, DEFAULT_PERMUTATION_CAP)
}

pub fn shapley_brute_permutations_capped<V: ValueFunction>(
    v: &V,
    i: AgentId,
    cap: usize,
) -> Result<BigRational> {
    let n = v.agent_count();
    i.check(n)?;
    if n > cap {
        return Err(Error::cap("agents for permutation enumeration", cap, n));
    }
    let target = i.index();
    let mut total = BigRational::zero();
    for order in (0..n).permutations(n) {
        let mut s = Coalition::from_indices(n, order.iter().copied().take_while(|&k| k != target));
        total += marginal(v, &mut s, target);
    }
    Ok(total / BigRational::from_integer(BigInt::from(factorial(n))))
}

/// Mean marginal contribution of `i` over uniformly drawn orderings.
///
/// The sample budget is cut into fixed-size chunks; chunk `c` draws from
/// ChaCha8 seeded with `cfg.seed` on stream `c`. The result is a function of
/// `(seed, samples)` alone.
pub fn shapley_monte_carlo<V: ValueFunction>(
    v: &V,
    i: AgentId,
    cfg: &SamplerConfig,
) -> Result<BigRational> {
    let n = v.agent_count();
    i.check(n)?;
    let target = i.index();
    let chunks = cfg.samples.div_ceil(CHUNK);
    let total = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(cfg.samples - c * CHUNK);
            let mut order: Vec<usize> = (0..n).collect();
            let mut sum = BigRational::zero();
            for _ in 0..count {
                order.shuffle(&mut rng);
                let mut s =
                    Coalition::from_indices(n, order.iter().copied().take_while(|&k| k != target));
                sum += marginal(v, &mut s, target);
            }
            sum
        })
        .reduce(BigRational::zero, |a, b| a + b);
    Ok(total / BigRational::from_integer(cfg.samples.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::FnGame;
    use crate::knapsack::GameInstance;
    use crate::rational::{int, ratio, to_f64};
    use proptest::prelude::*;

    fn id(k: usize) -> AgentId {
        AgentId::new(k).unwrap()
    }

    #[test]
    fn two_agent_knapsack() {
        // v({1}) = 2, v({2}) = 1, v({1,2}) = 2:
        // phi_1 = (2 + (2 - 1)) / 2 = 3/2, phi_2 = (1 + 0) / 2 = 1/2.
        let g = GameInstance::from_pairs(&[(1, 2), (1, 1)], 1).unwrap();
        assert_eq!(shapley_brute_subsets(&g, id(1)).unwrap(), ratio(3, 2));
        assert_eq!(shapley_brute_subsets(&g, id(2)).unwrap(), ratio(1, 2));
        assert_eq!(shapley_brute_permutations(&g, id(1)).unwrap(), ratio(3, 2));
    }

    #[test]
    fn additive_regime_gives_weights() {
        let ws = [4u64, 0, 7, 1, 3];
        let pairs: Vec<_> = ws.iter().map(|&w| (1, w)).collect();
        let g = GameInstance::from_pairs(&pairs, ws.len() as u64).unwrap();
        for (k, &w) in ws.iter().enumerate() {
            assert_eq!(
                shapley_brute_subsets(&g, AgentId::from_index(k)).unwrap(),
                int(w)
            );
            let mc = shapley_monte_carlo(
                &g,
                AgentId::from_index(k),
                &SamplerConfig::new(50, 9).unwrap(),
            )
            .unwrap();
            assert_eq!(mc, int(w));
        }
    }

    #[test]
    fn single_agent_and_symmetric_majority() {
        let one = FnGame::new(1, |_: &Coalition| int(5));
        assert_eq!(shapley_brute_permutations(&one, id(1)).unwrap(), int(5));
        let wmg = FnGame::new(3, |s: &Coalition| int((s.len() >= 2) as i64));
        assert_eq!(
            shapley_brute_permutations(&wmg, id(1)).unwrap(),
            ratio(1, 3)
        );
    }

    #[test]
    fn caps_are_enforced() {
        let big = FnGame::new(21, |s: &Coalition| int(s.len() as i64));
        assert!(matches!(
            shapley_brute_subsets(&big, id(1)),
            Err(Error::Capacity { .. })
        ));
        let mid = FnGame::new(11, |s: &Coalition| int(s.len() as i64));
        assert!(matches!(
            shapley_brute_permutations(&mid, id(1)),
            Err(Error::Capacity { .. })
        ));
        assert!(shapley_brute_subsets(&mid, id(12)).is_err());
        assert!(SamplerConfig::new(0, 1).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let g = GameInstance::from_pairs(&[(1, 2), (1, 1)], 1).unwrap();
        let cfg = SamplerConfig::new(10_000, 42).unwrap();
        let a = shapley_monte_carlo(&g, id(1), &cfg).unwrap();
        let b = shapley_monte_carlo(&g, id(1), &cfg).unwrap();
        assert_eq!(a, b);
        assert!((to_f64(&a) - 1.5).abs() < 0.1, "{a}");
    }

    fn knapsack() -> impl Strategy<Value = GameInstance> {
        (1u64..=4).prop_flat_map(|bin| {
            proptest::collection::vec((1..=bin, 0u64..=6), 1..=7)
                .prop_map(move |p| GameInstance::from_pairs(&p, bin).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn subsets_equal_permutations(g in knapsack()) {
            let mut total = BigRational::zero();
            for k in 0..g.len() {
                let a = shapley_brute_subsets(&g, AgentId::from_index(k)).unwrap();
                let b = shapley_brute_permutations(&g, AgentId::from_index(k)).unwrap();
                prop_assert_eq!(&a, &b);
                total += a;
            }
            prop_assert_eq!(total, int(g.knapsack_value(&Coalition::full(g.len()))));
        }
    }
}
