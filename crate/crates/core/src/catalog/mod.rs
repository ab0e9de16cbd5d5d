//! Concrete decompositions, each paired with a directly evaluated reference
//! value function for checking the engines.

mod greedy;
mod mcnet;
mod multi_issue;
mod topk;
mod wmg;

pub use greedy::{GreedyElements, GreedyState};
pub use mcnet::{McNetInstance, Rule};
pub use multi_issue::{Issue, MultiIssueInstance, DEFAULT_ISSUE_CAP};
pub use topk::TopKInstance;
pub use wmg::WmgInstance;
