use num_rational::BigRational;
use num_traits::Zero;

use crate::engine::PerElementDecomposition;
use crate::error::{Error, Result};
use crate::game::{Coalition, ValueFunction};

/// `value` is earned by coalitions containing every `positive` agent and no
/// `negative` one. Agents are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
    pub value: BigRational,
}

impl Rule {
    pub fn satisfied_by(&self, s: &Coalition) -> bool {
        self.positive.iter().all(|&k| s.contains(k))
            && !self.negative.iter().any(|&k| s.contains(k))
    }
}

/// Marginal-contribution net: a coalition's value is the sum of the rules it
/// satisfies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McNetInstance {
    agents: usize,
    rules: Vec<Rule>,
    /// Per rule: +1 positive literal, -1 negative literal, 0 absent.
    literal: Vec<Vec<i8>>,
}

impl McNetInstance {
    pub fn new(agents: usize, rules: Vec<Rule>) -> Result<Self> {
        let mut literal = Vec::with_capacity(rules.len());
        for (r, rule) in rules.iter().enumerate() {
            let mut signs = vec![0i8; agents];
            for (&k, sign) in rule
                .positive
                .iter()
                .map(|k| (k, 1i8))
                .chain(rule.negative.iter().map(|k| (k, -1i8)))
            {
                let slot = signs.get_mut(k).ok_or_else(|| {
                    Error::InvalidInstance(format!(
                        "rule {} names agent {} of {agents}",
                        r + 1,
                        k + 1
                    ))
                })?;
                if *slot != 0 {
                    return Err(Error::InvalidInstance(format!(
                        "rule {} repeats agent {}",
                        r + 1,
                        k + 1
                    )));
                }
                *slot = sign;
            }
            literal.push(signs);
        }
        Ok(McNetInstance {
            agents,
            rules,
            literal,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }
}

impl ValueFunction for McNetInstance {
    fn agent_count(&self) -> usize {
        self.agents
    }

    fn value(&self, s: &Coalition) -> BigRational {
        if s.is_empty() {
            return BigRational::zero();
        }
        self.rules
            .iter()
            .filter(|r| r.satisfied_by(s))
            .fold(BigRational::zero(), |acc, r| acc + &r.value)
    }
}

/// One element per rule. State: (positive literals seen, negative literals
/// not yet seen); the rule fires at `(|P|, |Q|)`.
impl PerElementDecomposition for McNetInstance {
    type State = (u32, u32);

    fn agent_count(&self) -> usize {
        self.agents
    }

    fn element_count(&self) -> usize {
        self.rules.len()
    }

    fn weight(&self, element: usize) -> BigRational {
        self.rules[element].value.clone()
    }

    fn setup(&self, element: usize) -> (u32, u32) {
        (0, self.rules[element].negative.len() as u32)
    }

    fn update(&self, element: usize, agent: usize, &(pos, neg): &(u32, u32)) -> (u32, u32) {
        match self.literal[element][agent] {
            1 => (pos + 1, neg),
            -1 => (pos, neg - 1),
            _ => (pos, neg),
        }
    }

    fn selected(&self, element: usize, state: &(u32, u32)) -> bool {
        let r = &self.rules[element];
        *state == (r.positive.len() as u32, r.negative.len() as u32)
    }
}
