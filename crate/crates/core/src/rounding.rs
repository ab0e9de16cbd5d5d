//! Additive approximation by rounding weights down.
//!
//! With `k = ε·w_max / bin` and `w'_i = ⌊w_i / k⌋`, the game
//! `v'(S) = k · knapsack(S; w')` satisfies `v(S) - ε·w_max <= v'(S) <= v(S)`,
//! so its exact Shapley values are within `ε·w_max` of the originals. The
//! rounded game has weights at most `⌊bin/ε⌋`, which bounds the number of
//! value vectors the exact DP can meet.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{AgentId, Coalition, ValueFunction};
use crate::knapsack::GameInstance;
use crate::rational::int;
use crate::table::DEFAULT_STATE_BUDGET;
use crate::vector_dp::shapley_exact_dp_with_budget;

#[derive(Debug, Clone)]
pub struct RoundedInstance {
    base: GameInstance,
    epsilon: BigRational,
    scale: BigRational,
    rounded: GameInstance,
    fallback: bool,
}

/// Rounds `inst` for accuracy `eps`. When `k <= 1` rounding cannot shrink the
/// state space and the instance is flagged as a fallback to the exact game.
pub fn round_instance(inst: &GameInstance, eps: &BigRational) -> Result<RoundedInstance> {
    if !eps.is_positive() {
        return Err(Error::Precondition(format!(
            "epsilon must be positive, got {eps}"
        )));
    }
    let scale = eps * int(inst.w_max()) / int(inst.bin());
    let fallback = scale <= BigRational::one();
    let weights: Vec<u64> = if scale.is_zero() {
        inst.agents().iter().map(|a| a.weight).collect()
    } else {
        inst.agents()
            .iter()
            .map(|a| {
                // ⌊w / k⌋ = ⌊w·den / num⌋
                let q = (BigInt::from(a.weight) * scale.denom()).div_floor(scale.numer());
                q.to_u64().expect("rounded weight fits in u64")
            })
            .collect()
    };
    let rounded = inst.with_weights(&weights)?;
    Ok(RoundedInstance {
        base: inst.clone(),
        epsilon: eps.clone(),
        scale,
        rounded,
        fallback,
    })
}

impl RoundedInstance {
    pub fn base(&self) -> &GameInstance {
        &self.base
    }

    pub fn epsilon(&self) -> &BigRational {
        &self.epsilon
    }

    /// The rounding unit `k`.
    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    pub fn rounded_weights(&self) -> Vec<u64> {
        self.rounded.agents().iter().map(|a| a.weight).collect()
    }

    /// Game with the same lengths and the rounded weights.
    pub fn rounded_game(&self) -> &GameInstance {
        &self.rounded
    }

    pub fn is_fallback(&self) -> bool {
        self.fallback
    }

    /// `ε·w_max`, the guaranteed additive error.
    pub fn error_bound(&self) -> BigRational {
        &self.epsilon * int(self.base.w_max())
    }

    /// `k` times the optimum under rounded weights; the exact value when
    /// this instance is a fallback.
    pub fn rounded_value(&self, s: &Coalition) -> BigRational {
        if self.fallback {
            int(self.base.knapsack_value(s))
        } else {
            &self.scale * int(self.rounded.knapsack_value(s))
        }
    }

    pub fn shapley(&self, i: AgentId, budget: usize) -> Result<BigRational> {
        if self.fallback {
            shapley_exact_dp_with_budget(&self.base, i, budget)
        } else {
            Ok(&self.scale * shapley_exact_dp_with_budget(&self.rounded, i, budget)?)
        }
    }
}

impl ValueFunction for RoundedInstance {
    fn agent_count(&self) -> usize {
        self.base.len()
    }

    fn value(&self, coalition: &Coalition) -> BigRational {
        self.rounded_value(coalition)
    }
}

/// Shapley value of agent `i` within `ε·w_max` of the exact value.
pub fn shapley_approx(inst: &GameInstance, i: AgentId, eps: &BigRational) -> Result<BigRational> {
    round_instance(inst, eps)?.shapley(i, DEFAULT_STATE_BUDGET)
}

pub fn shapley_approx_all(
    inst: &GameInstance,
    eps: &BigRational,
    budget: usize,
) -> Result<Vec<BigRational>> {
    let r = round_instance(inst, eps)?;
    (0..inst.len())
        .into_par_iter()
        .map(|k| r.shapley(AgentId::from_index(k), budget))
        .collect()
}

/// True iff `v'(S) <= v(S) <= v'(S) + alpha` for every coalition.
pub fn check_additive_gap<V: ValueFunction, W: ValueFunction>(
    v: &V,
    v_prime: &W,
    alpha: &BigRational,
    cap: usize,
) -> Result<bool> {
    let n = v.agent_count();
    if v_prime.agent_count() != n {
        return Err(Error::Precondition(
            "games have different agent counts".into(),
        ));
    }
    if n > cap.min(63) {
        return Err(Error::cap("agents for gap enumeration", cap.min(63), n));
    }
    Ok((0u64..1 << n).all(|mask| {
        let s = Coalition::from_mask(n, mask);
        let (a, b) = (v.value(&s), v_prime.value(&s));
        b <= a && a <= b + alpha
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::DEFAULT_AXIOM_CAP;
    use crate::game::FnGame;
    use crate::oracle::shapley_brute_subsets;
    use crate::rational::ratio;
    use crate::vector_dp::shapley_exact_dp;

    fn id(k: usize) -> AgentId {
        AgentId::new(k).unwrap()
    }

    #[test]
    fn rounding_examples() {
        let inst = GameInstance::from_pairs(&[(1, 10), (1, 7)], 1).unwrap();
        let r = round_instance(&inst, &ratio(1, 2)).unwrap();
        assert_eq!(r.scale(), &int(5));
        assert_eq!(r.rounded_weights(), vec![2, 1]);
        assert!(!r.is_fallback());

        let inst = GameInstance::from_pairs(&[(1, 4), (1, 4)], 1).unwrap();
        let r = round_instance(&inst, &int(1)).unwrap();
        assert_eq!(r.scale(), &int(4));
        assert_eq!(r.rounded_weights(), vec![1, 1]);

        let inst = GameInstance::from_pairs(&[(1, 4), (1, 3)], 1).unwrap();
        let r = round_instance(&inst, &int(2)).unwrap();
        assert_eq!(r.rounded_weights(), vec![0, 0]);
        assert_eq!(r.rounded_value(&Coalition::full(2)), int(0));

        assert!(round_instance(&inst, &int(0)).is_err());
        assert!(round_instance(&inst, &ratio(-1, 2)).is_err());
    }

    #[test]
    fn rounded_value_examples() {
        let inst = GameInstance::from_pairs(&[(1, 10), (1, 7)], 1).unwrap();
        let r = round_instance(&inst, &ratio(1, 2)).unwrap();
        assert_eq!(r.rounded_value(&Coalition::empty(2)), int(0));
        assert_eq!(r.rounded_value(&Coalition::full(2)), int(10));
        let s2 = Coalition::from_indices(2, [1]);
        assert_eq!(r.rounded_value(&s2), int(5));
        let v = int(inst.knapsack_value(&s2));
        assert!(v.clone() - r.error_bound() <= int(5) && int(5) <= v);
    }

    #[test]
    fn approx_examples() {
        let inst = GameInstance::from_pairs(&[(1, 10), (1, 7)], 1).unwrap();
        let exact = shapley_brute_subsets(&inst, id(1)).unwrap();
        let approx = shapley_approx(&inst, id(1), &ratio(1, 2)).unwrap();
        assert!(num_traits::abs(approx - exact) <= int(5));

        // w_max = 2, bin = 1, eps = 1/2 -> k = 1: fallback
        let small = GameInstance::from_pairs(&[(1, 2), (1, 1)], 1).unwrap();
        let r = round_instance(&small, &ratio(1, 2)).unwrap();
        assert!(r.is_fallback());
        for k in 1..=2 {
            assert_eq!(
                shapley_approx(&small, id(k), &ratio(1, 2)).unwrap(),
                shapley_exact_dp(&small, id(k)).unwrap()
            );
        }

        let collapsed = GameInstance::from_pairs(&[(1, 4), (1, 3)], 1).unwrap();
        for k in 1..=2 {
            assert_eq!(shapley_approx(&collapsed, id(k), &int(2)).unwrap(), int(0));
        }
    }

    #[test]
    fn gap_examples() {
        let inst = GameInstance::from_pairs(&[(1, 10), (2, 7), (1, 3)], 2).unwrap();
        assert!(check_additive_gap(&inst, &inst, &int(0), DEFAULT_AXIOM_CAP).unwrap());
        let r = round_instance(&inst, &ratio(1, 2)).unwrap();
        assert!(check_additive_gap(&inst, &r, &r.error_bound(), DEFAULT_AXIOM_CAP).unwrap());
        let plus_one = FnGame::new(3, |s: &Coalition| int(inst.knapsack_value(s) + 1));
        for alpha in [0, 1, 100] {
            assert!(!check_additive_gap(&inst, &plus_one, &int(alpha), DEFAULT_AXIOM_CAP).unwrap());
        }
    }
}
