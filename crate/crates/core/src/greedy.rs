//! Greedy knapsack budgeted games.
//!
//! A coalition's value is what the classic greedy 2-approximation packs:
//! scan members by decreasing weight/length ratio, stop at the first one
//! that does not fit, and keep that prefix unless the single heaviest member
//! is worth more on its own.

use std::cmp::Ordering;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::catalog::GreedyElements;
use crate::engine::{shapley_via_per_element, shapley_via_per_element_all, EngineConfig};
use crate::error::Result;
use crate::game::{AgentId, Coalition, ValueFunction};
use crate::knapsack::GameInstance;
use crate::rational::int;

/// Agents sorted by `w/l` descending, ties by lower index first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOrder(Vec<usize>);

impl GreedyOrder {
    pub fn new(inst: &GameInstance) -> Self {
        let mut order: Vec<usize> = (0..inst.len()).collect();
        order.sort_by(|&a, &b| {
            let (x, y) = (inst.agent(a), inst.agent(b));
            // w_b / l_b vs w_a / l_a by cross-multiplication
            let lhs = y.weight as u128 * x.length as u128;
            let rhs = x.weight as u128 * y.length as u128;
            lhs.cmp(&rhs).then(a.cmp(&b))
        });
        GreedyOrder(order)
    }

    /// 0-based agent positions in scan order.
    pub fn agents(&self) -> &[usize] {
        &self.0
    }
}

/// Heaviest member, lowest index on ties.
fn heaviest(inst: &GameInstance, s: &Coalition) -> Option<usize> {
    s.iter().max_by(|&a, &b| {
        inst.agent(a)
            .weight
            .cmp(&inst.agent(b).weight)
            .then(b.cmp(&a))
    })
}

/// The coalition the greedy heuristic keeps.
pub fn greedy_select(inst: &GameInstance, order: &GreedyOrder, s: &Coalition) -> Coalition {
    let n = inst.len();
    let mut taken = Coalition::empty(n);
    let mut used = 0u64;
    for &k in order.agents().iter().filter(|&&k| s.contains(k)) {
        let l = inst.agent(k).length;
        if used + l > inst.bin() {
            break;
        }
        used += l;
        taken.insert(k);
    }
    match heaviest(inst, s) {
        Some(a) if inst.total_weight(&taken) < inst.agent(a).weight => {
            Coalition::from_indices(n, [a])
        }
        _ => taken,
    }
}

/// A knapsack instance valued by the greedy heuristic.
#[derive(Debug, Clone)]
pub struct GreedyGame {
    inst: GameInstance,
    order: GreedyOrder,
}

impl GreedyGame {
    pub fn new(inst: GameInstance) -> Self {
        let order = GreedyOrder::new(&inst);
        GreedyGame { inst, order }
    }

    pub fn instance(&self) -> &GameInstance {
        &self.inst
    }

    pub fn order(&self) -> &GreedyOrder {
        &self.order
    }

    pub fn select(&self, s: &Coalition) -> Coalition {
        greedy_select(&self.inst, &self.order, s)
    }

    pub fn greedy_value(&self, s: &Coalition) -> u64 {
        self.inst.total_weight(&self.select(s))
    }

    pub fn elements(&self) -> GreedyElements<'_> {
        GreedyElements::new(&self.inst, &self.order)
    }

    pub fn shapley(&self, i: AgentId, cfg: &EngineConfig) -> Result<BigRational> {
        shapley_via_per_element(&self.elements(), i, Some(self.order.agents()), cfg)
    }

    pub fn shapley_all(&self, cfg: &EngineConfig) -> Result<Vec<BigRational>> {
        shapley_via_per_element_all(&self.elements(), Some(self.order.agents()), cfg)
    }
}

impl ValueFunction for GreedyGame {
    fn agent_count(&self) -> usize {
        self.inst.len()
    }

    fn value(&self, coalition: &Coalition) -> BigRational {
        int(self.greedy_value(coalition))
    }
}

pub fn greedy_value(inst: &GameInstance, s: &Coalition) -> u64 {
    inst.total_weight(&greedy_select(inst, &GreedyOrder::new(inst), s))
}

pub fn shapley_greedy(inst: &GameInstance, i: AgentId) -> Result<BigRational> {
    GreedyGame::new(inst.clone()).shapley(i, &EngineConfig::default())
}

/// Ratios in scan order never increase, and equal ratios keep index order.
pub fn is_valid_order(inst: &GameInstance, order: &GreedyOrder) -> bool {
    let mut seen = vec![false; inst.len()];
    let perm = order.0.len() == inst.len()
        && order
            .0
            .iter()
            .all(|&k| k < inst.len() && !std::mem::replace(&mut seen[k], true));
    perm && order.0.windows(2).all(|w| {
        let (a, b) = (inst.agent(w[0]), inst.agent(w[1]));
        match (a.weight as u128 * b.length as u128).cmp(&(b.weight as u128 * a.length as u128)) {
            Ordering::Greater => true,
            Ordering::Equal => w[0] < w[1],
            Ordering::Less => false,
        }
    })
}

/// Parallel per-agent values; convenience for callers holding an instance.
pub fn shapley_greedy_all(inst: &GameInstance, cfg: &EngineConfig) -> Result<Vec<BigRational>> {
    let game = GreedyGame::new(inst.clone());
    (0..inst.len())
        .into_par_iter()
        .map(|k| game.shapley(AgentId::from_index(k), cfg))
        .collect()
}
