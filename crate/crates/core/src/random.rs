//! Seeded random instance generators for every game kind.

use rand::seq::index::sample;
use rand::Rng;

use crate::catalog::{Issue, McNetInstance, MultiIssueInstance, Rule, TopKInstance, WmgInstance};
use crate::knapsack::GameInstance;
use crate::rational::{int, ratio};

pub fn knapsack<R: Rng>(rng: &mut R, agents: usize, max_bin: u64, max_weight: u64) -> GameInstance {
    let bin = rng.gen_range(1..=max_bin);
    let pairs: Vec<(u64, u64)> = (0..agents)
        .map(|_| (rng.gen_range(1..=bin), rng.gen_range(0..=max_weight)))
        .collect();
    GameInstance::from_pairs(&pairs, bin).expect("generated lengths fit the bin")
}

/// Unit lengths with the bin at least the agent count: `v(S) = w(S)`.
pub fn additive_knapsack<R: Rng>(rng: &mut R, agents: usize, max_weight: u64) -> GameInstance {
    let pairs: Vec<(u64, u64)> = (0..agents)
        .map(|_| (1, rng.gen_range(0..=max_weight)))
        .collect();
    let bin = agents as u64 + rng.gen_range(0..3);
    GameInstance::from_pairs(&pairs, bin).expect("unit lengths fit")
}

pub fn wmg<R: Rng>(rng: &mut R, agents: usize, max_weight: u64) -> WmgInstance {
    let weights: Vec<u64> = (0..agents).map(|_| rng.gen_range(0..=max_weight)).collect();
    let total: u64 = weights.iter().sum();
    WmgInstance::new(rng.gen_range(0..=total + 1), weights)
}

pub fn mcnet<R: Rng>(rng: &mut R, agents: usize, rules: usize) -> McNetInstance {
    let rules = (0..rules)
        .map(|_| {
            let lits = rng.gen_range(1..=agents.min(4));
            let chosen = sample(rng, agents, lits).into_vec();
            let split = rng.gen_range(0..=lits);
            Rule {
                positive: chosen[..split].to_vec(),
                negative: chosen[split..].to_vec(),
                value: ratio(rng.gen_range(-6..=9), rng.gen_range(1..=3)),
            }
        })
        .collect();
    McNetInstance::new(agents, rules).expect("sampled literals are distinct")
}

pub fn multi_issue<R: Rng>(rng: &mut R, agents: usize, issues: usize) -> MultiIssueInstance {
    let issues = (0..issues)
        .map(|_| {
            let size = rng.gen_range(1..=agents.min(3));
            let members = sample(rng, agents, size).into_vec();
            let values = (0..1usize << size)
                .map(|m| {
                    if m == 0 {
                        int(0)
                    } else {
                        int(rng.gen_range(-3..=8))
                    }
                })
                .collect();
            Issue { members, values }
        })
        .collect();
    MultiIssueInstance::new(agents, issues).expect("sampled members are distinct")
}

pub fn topk<R: Rng>(rng: &mut R, agents: usize, max_weight: u64) -> TopKInstance {
    let weights = (0..agents).map(|_| rng.gen_range(0..=max_weight)).collect();
    TopKInstance::new(rng.gen_range(0..=agents as u64 + 1), weights)
}
