use num_rational::BigRational;
use num_traits::Zero;

use crate::engine::PerElementDecomposition;
use crate::error::{Error, Result};
use crate::game::{Coalition, ValueFunction};

/// Largest issue the explicit value tables accept.
pub const DEFAULT_ISSUE_CAP: usize = 16;

/// A sub-game over `members` (0-based, distinct). `values[mask]` is the
/// worth of the members whose positions in `members` are set in `mask`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub members: Vec<usize>,
    pub values: Vec<BigRational>,
}

impl Issue {
    fn local_mask(&self, s: &Coalition) -> usize {
        self.members
            .iter()
            .enumerate()
            .filter(|(_, &k)| s.contains(k))
            .fold(0, |m, (b, _)| m | 1 << b)
    }
}

/// `v(S) = sum_t v_t(S ∩ C_t)` over possibly overlapping issues.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiIssueInstance {
    agents: usize,
    issues: Vec<Issue>,
    /// Flattened elements `(issue, subset mask)`, one per table entry.
    elements: Vec<(usize, usize)>,
    /// Per issue: agent -> bit position within the issue, if a member.
    slot: Vec<Vec<Option<u8>>>,
}

impl MultiIssueInstance {
    pub fn new(agents: usize, issues: Vec<Issue>) -> Result<Self> {
        Self::with_cap(agents, issues, DEFAULT_ISSUE_CAP)
    }

    pub fn with_cap(agents: usize, issues: Vec<Issue>, cap: usize) -> Result<Self> {
        let mut slot = Vec::with_capacity(issues.len());
        let mut elements = Vec::new();
        for (t, issue) in issues.iter().enumerate() {
            let size = issue.members.len();
            if size > cap {
                return Err(Error::cap("agents in one issue", cap, size));
            }
            if issue.values.len() != 1 << size {
                return Err(Error::InvalidInstance(format!(
                    "issue {} has {} values, expected {}",
                    t + 1,
                    issue.values.len(),
                    1usize << size
                )));
            }
            if !issue.values[0].is_zero() {
                return Err(Error::InvalidInstance(format!(
                    "issue {} gives the empty set a nonzero value",
                    t + 1
                )));
            }
            let mut pos = vec![None; agents];
            for (b, &k) in issue.members.iter().enumerate() {
                match pos.get_mut(k) {
                    None => {
                        return Err(Error::InvalidInstance(format!(
                            "issue {} names agent {} of {agents}",
                            t + 1,
                            k + 1
                        )))
                    }
                    Some(Some(_)) => {
                        return Err(Error::InvalidInstance(format!(
                            "issue {} repeats agent {}",
                            t + 1,
                            k + 1
                        )))
                    }
                    Some(p) => *p = Some(b as u8),
                }
            }
            slot.push(pos);
            elements.extend((0..1usize << size).map(|m| (t, m)));
        }
        Ok(MultiIssueInstance {
            agents,
            issues,
            elements,
            slot,
        })
    }

    pub fn issues(&self) -> &[Issue] {
        &self.issues
    }
}

impl ValueFunction for MultiIssueInstance {
    fn agent_count(&self) -> usize {
        self.agents
    }

    fn value(&self, s: &Coalition) -> BigRational {
        self.issues.iter().fold(BigRational::zero(), |acc, i| {
            acc + &i.values[i.local_mask(s)]
        })
    }
}

/// Element `(t, C)` is selected iff `S ∩ C_t = C`. State: (members of `C`
/// seen, members of `C_t \ C` seen); selected at `(|C|, 0)`.
impl PerElementDecomposition for MultiIssueInstance {
    type State = (u32, u32);

    fn agent_count(&self) -> usize {
        self.agents
    }

    fn element_count(&self) -> usize {
        self.elements.len()
    }

    fn weight(&self, element: usize) -> BigRational {
        let (t, m) = self.elements[element];
        self.issues[t].values[m].clone()
    }

    fn setup(&self, _: usize) -> (u32, u32) {
        (0, 0)
    }

    fn update(&self, element: usize, agent: usize, &(inside, outside): &(u32, u32)) -> (u32, u32) {
        let (t, m) = self.elements[element];
        match self.slot[t][agent] {
            Some(b) if m >> b & 1 == 1 => (inside + 1, outside),
            Some(_) => (inside, outside + 1),
            None => (inside, outside),
        }
    }

    fn selected(&self, element: usize, state: &(u32, u32)) -> bool {
        let (_, m) = self.elements[element];
        *state == (m.count_ones(), 0)
    }
}
