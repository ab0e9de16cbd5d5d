use num_rational::BigRational;

use crate::engine::Decomposition;
use crate::game::{Coalition, ValueFunction};
use crate::rational::int;

/// Weighted majority game: a coalition wins (value 1) when its weight
/// reaches the quota.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WmgInstance {
    pub quota: u64,
    pub weights: Vec<u64>,
}

impl WmgInstance {
    pub fn new(quota: u64, weights: Vec<u64>) -> Self {
        WmgInstance { quota, weights }
    }
}

impl ValueFunction for WmgInstance {
    fn agent_count(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, s: &Coalition) -> BigRational {
        let w: u64 = s.iter().map(|k| self.weights[k]).sum();
        int((!s.is_empty() && w >= self.quota) as u64)
    }
}

/// State: weight so far, capped at the quota.
impl Decomposition for WmgInstance {
    type State = u64;

    fn agent_count(&self) -> usize {
        self.weights.len()
    }

    fn setup(&self) -> u64 {
        0
    }

    fn update(&self, agent: usize, state: &u64) -> u64 {
        state.saturating_add(self.weights[agent]).min(self.quota)
    }

    fn finish(&self, state: &u64) -> BigRational {
        int((*state == self.quota) as u64)
    }
}
