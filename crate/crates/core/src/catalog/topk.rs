use num_rational::BigRational;

use crate::engine::PerElementDecomposition;
use crate::game::{Coalition, ValueFunction};
use crate::rational::int;

/// A coalition is worth the total weight of its `k` heaviest members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKInstance {
    pub k: u64,
    pub weights: Vec<u64>,
}

impl TopKInstance {
    pub fn new(k: u64, weights: Vec<u64>) -> Self {
        TopKInstance { k, weights }
    }

    /// Strict ranking: heavier first, lower index first on equal weight.
    fn ranks_above(&self, a: usize, b: usize) -> bool {
        let (wa, wb) = (self.weights[a], self.weights[b]);
        wa > wb || (wa == wb && a < b)
    }
}

impl ValueFunction for TopKInstance {
    fn agent_count(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, s: &Coalition) -> BigRational {
        let mut ws: Vec<u64> = s.iter().map(|k| self.weights[k]).collect();
        ws.sort_unstable_by(|a, b| b.cmp(a));
        int(ws.into_iter().take(self.k as usize).sum::<u64>())
    }
}

/// One element per agent `e`. State: (members ranked above `e`, capped at
/// `k`; whether `e` itself is present). Selected iff present with fewer than
/// `k` members above it.
impl PerElementDecomposition for TopKInstance {
    type State = (u64, bool);

    fn agent_count(&self) -> usize {
        self.weights.len()
    }

    fn element_count(&self) -> usize {
        self.weights.len()
    }

    fn weight(&self, element: usize) -> BigRational {
        int(self.weights[element])
    }

    fn setup(&self, _: usize) -> (u64, bool) {
        (0, false)
    }

    fn update(&self, element: usize, agent: usize, &(above, present): &(u64, bool)) -> (u64, bool) {
        if agent == element {
            (above, true)
        } else if self.ranks_above(agent, element) {
            ((above + 1).min(self.k), present)
        } else {
            (above, present)
        }
    }

    fn selected(&self, _: usize, &(above, present): &(u64, bool)) -> bool {
        present && above < self.k
    }
}
