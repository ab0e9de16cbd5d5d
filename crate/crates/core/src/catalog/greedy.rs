use num_rational::BigRational;

use crate::engine::PerElementDecomposition;
use crate::greedy::GreedyOrder;
use crate::knapsack::GameInstance;
use crate::rational::int;

/// Scan state of the greedy heuristic as seen from one element `e`.
///
/// Presence of `e` needs no separate flag: `e` can only be selected through
/// `taken_e` or by being the heaviest member, and both imply `e ∈ S`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GreedyState {
    pub stopped: bool,
    /// Length packed so far; reset to 0 once the scan stops.
    pub used: u64,
    pub packed_weight: u64,
    /// Heaviest member so far (lowest index on ties).
    pub heaviest: Option<usize>,
    /// Whether `e` made it into the scanned prefix.
    pub taken_e: bool,
}

/// Per-element form of the greedy game; agents must be folded in
/// [`GreedyOrder`].
#[derive(Debug, Clone)]
pub struct GreedyElements<'a> {
    inst: &'a GameInstance,
    order: &'a GreedyOrder,
}

impl<'a> GreedyElements<'a> {
    pub fn new(inst: &'a GameInstance, order: &'a GreedyOrder) -> Self {
        GreedyElements { inst, order }
    }

    pub fn order(&self) -> &[usize] {
        self.order.agents()
    }
}

impl PerElementDecomposition for GreedyElements<'_> {
    type State = GreedyState;

    fn agent_count(&self) -> usize {
        self.inst.len()
    }

    fn element_count(&self) -> usize {
        self.inst.len()
    }

    fn weight(&self, element: usize) -> BigRational {
        int(self.inst.agent(element).weight)
    }

    fn setup(&self, _: usize) -> GreedyState {
        GreedyState {
            stopped: false,
            used: 0,
            packed_weight: 0,
            heaviest: None,
            taken_e: false,
        }
    }

    fn update(&self, element: usize, agent: usize, state: &GreedyState) -> GreedyState {
        let a = self.inst.agent(agent);
        let mut next = state.clone();
        next.heaviest = match state.heaviest {
            Some(h) => {
                let hw = self.inst.agent(h).weight;
                if a.weight > hw || (a.weight == hw && agent < h) {
                    Some(agent)
                } else {
                    Some(h)
                }
            }
            None => Some(agent),
        };
        if !state.stopped {
            if state.used + a.length <= self.inst.bin() {
                next.used += a.length;
                next.packed_weight += a.weight;
                next.taken_e |= agent == element;
            } else {
                next.stopped = true;
                next.used = 0;
            }
        }
        next
    }

    fn selected(&self, element: usize, state: &GreedyState) -> bool {
        let top = state.heaviest.map_or(0, |h| self.inst.agent(h).weight);
        if state.packed_weight >= top {
            state.taken_e
        } else {
            state.heaviest == Some(element)
        }
    }
}
