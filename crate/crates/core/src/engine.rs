//! Generic Shapley engines over algorithmic decompositions.
//!
//! A [`Decomposition`] computes `v(S)` by starting from an initial state,
//! folding every member of `S` into it with `update`, and reading the value
//! off the final state with `finish`. When the set of reachable states is
//! small, coalitions can be counted per `(size, state)` instead of being
//! enumerated, and agent `i`'s marginal contribution is a function of the
//! state alone.
//!
//! Two modes exist. Order-agnostic decompositions may fold agents in any
//! order, so `i` is folded in last. Order-specific ones must fold agents in a
//! fixed global order; the engine then tracks the pair of states reached by
//! `S` and by `S ∪ {i}` side by side, inserting `i` at its position.
//!
//! [`PerElementDecomposition`] is the weighted-set variant: `v(S)` is the
//! total weight of the elements selected by `S`, and each element has its
//! own small decomposition deciding whether it is selected.
//!
//! Every engine treats the empty coalition as worth zero, whatever the
//! decomposition's initial state would report.

use std::hash::Hash;

use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{AgentId, Coalition};
use crate::rational::{int, CoefficientTable};
use crate::table::{weighted_sum, with_counter, Count, CountTable, DEFAULT_STATE_BUDGET};

/// Setup / update / final factoring of a value algorithm. Setup data lives in
/// the implementing type; [`setup`](Self::setup) returns the initial state.
pub trait Decomposition: Sync {
    type State: Clone + Eq + Hash + Send + Sync;

    fn agent_count(&self) -> usize;

    fn setup(&self) -> Self::State;

    /// Folds 0-based `agent` into `state`. Must be deterministic.
    fn update(&self, agent: usize, state: &Self::State) -> Self::State;

    fn finish(&self, state: &Self::State) -> BigRational;
}

/// One decomposition per element of a weighted ground set; `finish` is a
/// membership test. Instantiations must track whatever the membership test
/// needs, including whether the element's own agent is present when that
/// matters; the engine cannot check this.
pub trait PerElementDecomposition: Sync {
    type State: Clone + Eq + Hash + Send + Sync;

    fn agent_count(&self) -> usize;

    fn element_count(&self) -> usize;

    fn weight(&self, element: usize) -> BigRational;

    fn setup(&self, element: usize) -> Self::State;

    fn update(&self, element: usize, agent: usize, state: &Self::State) -> Self::State;

    fn selected(&self, element: usize, state: &Self::State) -> bool;
}

/// States reached by `S` and by `S ∪ {i}` under an ordered fold.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StatePair<S> {
    pub without_i: S,
    pub with_i: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    /// Cap on distinct `(size, state)` keys per layer.
    pub state_budget: usize,
    /// Random coalitions tried by the order-agnosticism check; 0 disables it.
    pub agnostic_trials: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            state_budget: DEFAULT_STATE_BUDGET,
            agnostic_trials: 16,
        }
    }
}

const CHECK_SEED: u64 = 0x005e_ed0f_0de2;

fn validate_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n
        || !order
            .iter()
            .all(|&k| k < n && !std::mem::replace(&mut seen[k], true))
    {
        return Err(Error::Precondition(format!(
            "order is not a permutation of the {n} agents"
        )));
    }
    Ok(())
}

/// Members of `s` in fold order: ascending, or by position in `order`.
fn fold_sequence(s: &Coalition, order: Option<&[usize]>) -> Vec<usize> {
    match order {
        None => s.iter().collect(),
        Some(o) => o.iter().copied().filter(|&k| s.contains(k)).collect(),
    }
}

/// Runs the decomposition on an explicit coalition.
pub fn evaluate<D: Decomposition>(
    d: &D,
    s: &Coalition,
    order: Option<&[usize]>,
) -> Result<BigRational> {
    if let Some(o) = order {
        validate_order(o, d.agent_count())?;
    }
    if s.is_empty() {
        return Ok(BigRational::zero());
    }
    let state = fold_sequence(s, order)
        .into_iter()
        .fold(d.setup(), |x, k| d.update(k, &x));
    Ok(d.finish(&state))
}

/// Runs every element's decomposition on an explicit coalition; returns the
/// selected elements and their total weight.
pub fn evaluate_per_element<P: PerElementDecomposition>(
    p: &P,
    s: &Coalition,
    order: Option<&[usize]>,
) -> Result<(Vec<usize>, BigRational)> {
    if let Some(o) = order {
        validate_order(o, p.agent_count())?;
    }
    if s.is_empty() {
        return Ok((Vec::new(), BigRational::zero()));
    }
    let seq = fold_sequence(s, order);
    let chosen: Vec<usize> = (0..p.element_count())
        .filter(|&e| {
            let st = seq.iter().fold(p.setup(e), |x, &k| p.update(e, k, &x));
            p.selected(e, &st)
        })
        .collect();
    let total = chosen
        .iter()
        .fold(BigRational::zero(), |acc, &e| acc + p.weight(e));
    Ok((chosen, total))
}

/// Folds random coalitions in two orders and compares the final states.
fn agnostic_witness<S: Eq>(
    n: usize,
    trials: usize,
    setup: impl Fn() -> S,
    update: impl Fn(usize, &S) -> S,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(CHECK_SEED);
    for _ in 0..trials {
        let mut members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if members.len() < 2 {
            continue;
        }
        let forward = members.clone();
        members.shuffle(&mut rng);
        if members == forward {
            members.reverse();
        }
        let a = forward.iter().fold(setup(), |x, &k| update(k, &x));
        let b = members.iter().fold(setup(), |x, &k| update(k, &x));
        if a != b {
            return Some((forward, members));
        }
    }
    None
}

fn witness_error(element: Option<usize>, (a, b): (Vec<usize>, Vec<usize>)) -> Error {
    let label = |v: &[usize]| {
        v.iter()
            .map(|k| (k + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    Error::Contract(format!(
        "decomposition{} is not order-agnostic: folding ({}) and ({}) end in different states",
        element
            .map(|e| format!(" element {}", e + 1))
            .unwrap_or_default(),
        label(&a),
        label(&b)
    ))
}

/// Spot-checks that folding order does not change the final state.
pub fn check_order_agnostic<D: Decomposition>(d: &D, trials: usize) -> Result<()> {
    match agnostic_witness(d.agent_count(), trials, || d.setup(), |k, x| d.update(k, x)) {
        None => Ok(()),
        Some(w) => Err(witness_error(None, w)),
    }
}

pub fn check_order_agnostic_per_element<P: PerElementDecomposition>(
    p: &P,
    trials: usize,
) -> Result<()> {
    for e in 0..p.element_count() {
        if let Some(w) = agnostic_witness(
            p.agent_count(),
            trials,
            || p.setup(e),
            |k, x| p.update(e, k, x),
        ) {
            return Err(witness_error(Some(e), w));
        }
    }
    Ok(())
}

fn agnostic_table<S, C>(
    n: usize,
    i: usize,
    budget: usize,
    init: S,
    update: impl Fn(usize, &S) -> S,
) -> Result<CountTable<S, C>>
where
    S: Clone + Eq + Hash,
    C: Count,
{
    let mut table = CountTable::new(init, n - 1, budget)?;
    for j in (0..n).filter(|&j| j != i) {
        table.push_agent(|x| update(j, x))?;
    }
    Ok(table)
}

fn ordered_table<S, C>(
    order: &[usize],
    i: usize,
    budget: usize,
    init: S,
    update: impl Fn(usize, &S) -> S,
) -> Result<CountTable<StatePair<S>, C>>
where
    S: Clone + Eq + Hash,
    C: Count,
{
    let pair = StatePair {
        without_i: init.clone(),
        with_i: init,
    };
    let mut table = CountTable::new(pair, order.len() - 1, budget)?;
    for &j in order {
        if j == i {
            table.relabel(|p| StatePair {
                without_i: p.without_i.clone(),
                with_i: update(i, &p.with_i),
            })?;
        } else {
            table.push_agent(|p| StatePair {
                without_i: update(j, &p.without_i),
                with_i: update(j, &p.with_i),
            })?;
        }
    }
    Ok(table)
}

fn check_agent(n: usize, i: AgentId) -> Result<usize> {
    if n == 0 {
        return Err(Error::Precondition("game has no agents".into()));
    }
    Ok(i.check(n)?.index())
}

/// Order-agnostic engine: counts `S ⊆ N \ {i}` by `(|S|, state)` and folds
/// `i` in last to get each group's marginal contribution.
pub fn shapley_via_decomposition<D: Decomposition>(
    d: &D,
    i: AgentId,
    cfg: &EngineConfig,
) -> Result<BigRational> {
    check_order_agnostic(d, cfg.agnostic_trials)?;
    agnostic_unchecked(d, i, cfg)
}

fn agnostic_unchecked<D: Decomposition>(
    d: &D,
    i: AgentId,
    cfg: &EngineConfig,
) -> Result<BigRational> {
    let n = d.agent_count();
    let target = check_agent(n, i)?;
    let init = d.setup();
    let empty_correction = d.finish(&init) / int(n as u64);
    let phi = with_counter!(n - 1, C => {
        let table: CountTable<D::State, C> =
            agnostic_table(n, target, cfg.state_budget, init, |j, x| d.update(j, x))?;
        let buckets = table.bucket(|x| Some(d.finish(&d.update(target, x)) - d.finish(x)));
        weighted_sum(&buckets, &CoefficientTable::new(n), |m| m.clone())
    });
    Ok(phi + empty_correction)
}

/// Order-specific engine: folds agents in `order` (0-based positions),
/// tracking the states of `S` and `S ∪ {i}` together.
pub fn shapley_via_decomposition_ordered<D: Decomposition>(
    d: &D,
    order: &[usize],
    i: AgentId,
    cfg: &EngineConfig,
) -> Result<BigRational> {
    let n = d.agent_count();
    let target = check_agent(n, i)?;
    validate_order(order, n)?;
    let init = d.setup();
    let empty_correction = d.finish(&init) / int(n as u64);
    let phi = with_counter!(n - 1, C => {
        let table: CountTable<StatePair<D::State>, C> =
            ordered_table(order, target, cfg.state_budget, init, |j, x| d.update(j, x))?;
        let buckets = table.bucket(|p| Some(d.finish(&p.with_i) - d.finish(&p.without_i)));
        weighted_sum(&buckets, &CoefficientTable::new(n), |m| m.clone())
    });
    Ok(phi + empty_correction)
}

fn element_contribution<P: PerElementDecomposition>(
    p: &P,
    e: usize,
    target: usize,
    order: Option<&[usize]>,
    cfg: &EngineConfig,
    coefficients: &CoefficientTable,
) -> Result<BigRational> {
    let w = p.weight(e);
    if w.is_zero() {
        return Ok(BigRational::zero());
    }
    let n = p.agent_count();
    let init = p.setup(e);
    // the empty coalition selects nothing
    let empty_correction = if p.selected(e, &init) {
        coefficients.coefficient(0)
    } else {
        BigRational::zero()
    };
    // c_+ - c_- folded per group: +1 selected only with i, -1 only without
    let delta = |with: bool, without: bool| match (with, without) {
        (true, false) => Some(1i8),
        (false, true) => Some(-1i8),
        _ => None,
    };
    let share = with_counter!(n - 1, C => {
        match order {
            None => {
                let table: CountTable<P::State, C> =
                    agnostic_table(n, target, cfg.state_budget, init, |j, x| p.update(e, j, x))?;
                let buckets = table.bucket(|x| delta(p.selected(e, &p.update(e, target, x)), p.selected(e, x)));
                weighted_sum(&buckets, coefficients, |&d| int(d))
            }
            Some(order) => {
                let table: CountTable<StatePair<P::State>, C> =
                    ordered_table(order, target, cfg.state_budget, init, |j, x| p.update(e, j, x))?;
                let buckets = table.bucket(|q| delta(p.selected(e, &q.with_i), p.selected(e, &q.without_i)));
                weighted_sum(&buckets, coefficients, |&d| int(d))
            }
        }
    });
    Ok((share + empty_correction) * w)
}

/// Per-element engine: sums each element's weight times the signed,
/// coefficient-weighted count of coalitions whose selection of that element
/// flips when `i` joins. `order` selects the order-specific mode.
pub fn shapley_via_per_element<P: PerElementDecomposition>(
    p: &P,
    i: AgentId,
    order: Option<&[usize]>,
    cfg: &EngineConfig,
) -> Result<BigRational> {
    if order.is_none() {
        check_order_agnostic_per_element(p, cfg.agnostic_trials)?;
    }
    per_element_unchecked(p, i, order, cfg)
}

fn per_element_unchecked<P: PerElementDecomposition>(
    p: &P,
    i: AgentId,
    order: Option<&[usize]>,
    cfg: &EngineConfig,
) -> Result<BigRational> {
    let n = p.agent_count();
    let target = check_agent(n, i)?;
    if let Some(o) = order {
        validate_order(o, n)?;
    }
    let coefficients = CoefficientTable::new(n);
    (0..p.element_count())
        .into_par_iter()
        .map(|e| element_contribution(p, e, target, order, cfg, &coefficients))
        .try_reduce(BigRational::zero, |a, b| Ok(a + b))
}

/// Every agent's value through the order-agnostic engine.
pub fn shapley_via_decomposition_all<D: Decomposition>(
    d: &D,
    cfg: &EngineConfig,
) -> Result<Vec<BigRational>> {
    check_order_agnostic(d, cfg.agnostic_trials)?;
    (0..d.agent_count())
        .into_par_iter()
        .map(|k| agnostic_unchecked(d, AgentId::from_index(k), cfg))
        .collect()
}

pub fn shapley_via_decomposition_ordered_all<D: Decomposition>(
    d: &D,
    order: &[usize],
    cfg: &EngineConfig,
) -> Result<Vec<BigRational>> {
    (0..d.agent_count())
        .into_par_iter()
        .map(|k| shapley_via_decomposition_ordered(d, order, AgentId::from_index(k), cfg))
        .collect()
}

pub fn shapley_via_per_element_all<P: PerElementDecomposition>(
    p: &P,
    order: Option<&[usize]>,
    cfg: &EngineConfig,
) -> Result<Vec<BigRational>> {
    if order.is_none() {
        check_order_agnostic_per_element(p, cfg.agnostic_trials)?;
    }
    (0..p.agent_count())
        .into_par_iter()
        .map(|k| per_element_unchecked(p, AgentId::from_index(k), order, cfg))
        .collect()
}

/// Adapts a decomposition to [`ValueFunction`](crate::game::ValueFunction)
/// by direct execution.
pub struct DecomposedGame<'a, D> {
    pub decomposition: &'a D,
    pub order: Option<&'a [usize]>,
}

impl<D: Decomposition> crate::game::ValueFunction for DecomposedGame<'_, D> {
    fn agent_count(&self) -> usize {
        self.decomposition.agent_count()
    }

    fn value(&self, coalition: &Coalition) -> BigRational {
        evaluate(self.decomposition, coalition, self.order)
            .expect("order validated at construction")
    }
}

/// Adapts a per-element decomposition to a value function by direct execution.
pub struct PerElementGame<'a, P> {
    pub decomposition: &'a P,
    pub order: Option<&'a [usize]>,
}

impl<P: PerElementDecomposition> crate::game::ValueFunction for PerElementGame<'_, P> {
    fn agent_count(&self) -> usize {
        self.decomposition.agent_count()
    }

    fn value(&self, coalition: &Coalition) -> BigRational {
        evaluate_per_element(self.decomposition, coalition, self.order)
            .expect("order validated at construction")
            .1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    /// Weight sum capped at a quota; value 1 once the quota is met.
    struct Majority {
        quota: u64,
        weights: Vec<u64>,
    }

    impl Decomposition for Majority {
        type State = u64;
        fn agent_count(&self) -> usize {
            self.weights.len()
        }
        fn setup(&self) -> u64 {
            0
        }
        fn update(&self, agent: usize, s: &u64) -> u64 {
            (s + self.weights[agent]).min(self.quota)
        }
        fn finish(&self, s: &u64) -> BigRational {
            int((*s == self.quota) as u64)
        }
    }

    /// Remembers the last agent folded: depends on order.
    struct LastAgent(usize);

    impl Decomposition for LastAgent {
        type State = Option<usize>;
        fn agent_count(&self) -> usize {
            self.0
        }
        fn setup(&self) -> Option<usize> {
            None
        }
        fn update(&self, agent: usize, _: &Option<usize>) -> Option<usize> {
            Some(agent)
        }
        fn finish(&self, s: &Option<usize>) -> BigRational {
            int(s.map_or(0, |a| a as u64))
        }
    }

    fn id(k: usize) -> AgentId {
        AgentId::new(k).unwrap()
    }

    #[test]
    fn majority_examples() {
        let cfg = EngineConfig::default();
        let sym = Majority {
            quota: 2,
            weights: vec![1, 1, 1],
        };
        assert_eq!(
            shapley_via_decomposition(&sym, id(1), &cfg).unwrap(),
            ratio(1, 3)
        );
        let skew = Majority {
            quota: 3,
            weights: vec![2, 1, 1],
        };
        assert_eq!(
            shapley_via_decomposition(&skew, id(1), &cfg).unwrap(),
            ratio(2, 3)
        );
        assert_eq!(
            shapley_via_decomposition(&skew, id(2), &cfg).unwrap(),
            ratio(1, 6)
        );
        for k in 1..=3 {
            assert_eq!(
                shapley_via_decomposition_ordered(&skew, &[2, 0, 1], id(k), &cfg).unwrap(),
                shapley_via_decomposition(&skew, id(k), &cfg).unwrap()
            );
        }
    }

    #[test]
    fn single_agent() {
        let cfg = EngineConfig::default();
        let d = Majority {
            quota: 5,
            weights: vec![7],
        };
        let direct = d.finish(&d.update(0, &d.setup())) - d.finish(&d.setup());
        assert_eq!(shapley_via_decomposition(&d, id(1), &cfg).unwrap(), direct);
        assert_eq!(
            shapley_via_decomposition_ordered(&d, &[0], id(1), &cfg).unwrap(),
            int(1)
        );
    }

    #[test]
    fn order_dependence_is_reported() {
        let err =
            shapley_via_decomposition(&LastAgent(4), id(1), &EngineConfig::default()).unwrap_err();
        match err {
            Error::Contract(msg) => assert!(msg.contains("not order-agnostic"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
        // the ordered engine accepts it
        assert!(shapley_via_decomposition_ordered(
            &LastAgent(4),
            &[0, 1, 2, 3],
            id(1),
            &EngineConfig::default()
        )
        .is_ok());
    }

    #[test]
    fn bad_orders_are_rejected() {
        let d = Majority {
            quota: 1,
            weights: vec![1, 1],
        };
        let cfg = EngineConfig::default();
        assert!(shapley_via_decomposition_ordered(&d, &[0, 0], id(1), &cfg).is_err());
        assert!(shapley_via_decomposition_ordered(&d, &[0], id(1), &cfg).is_err());
        assert!(evaluate(&d, &Coalition::full(2), Some(&[1, 2])).is_err());
    }

    #[test]
    fn state_budget_is_enforced() {
        let d = Majority {
            quota: 1 << 40,
            weights: (0..20).map(|k| 1u64 << k).collect(),
        };
        let cfg = EngineConfig {
            state_budget: 500,
            ..EngineConfig::default()
        };
        assert!(matches!(
            shapley_via_decomposition(&d, id(1), &cfg),
            Err(Error::Capacity { layer: Some(_), .. })
        ));
    }
}
