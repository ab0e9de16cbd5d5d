//! Result files: exact per-agent values plus provenance.
//!
//! ```text
//! format shapley-result 1
//! instance-digest sha256:<hex>
//! kind knapsack
//! algorithm vector-dp
//! param state-budget 10000000
//! precision 12
//! agents 2
//! total 2
//! wall-time-ms 0
//! phi 1 3/2 1.5
//! phi 2 1/2 0.5
//! ```
//!
//! The `p/q` column is authoritative; the decimal column is display only.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;

use crate::cli::format::GameKind;
use crate::error::{Error, Result};
use crate::game::AgentId;
use crate::rational::{format_rational, parse_rational, to_decimal};
use crate::shapley::Algorithm;

pub const RESULT_HEADER: &str = "format shapley-result";
pub const RESULT_VERSION: u32 = 1;
pub const DEFAULT_PRECISION: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultFile {
    pub instance_digest: String,
    pub kind: GameKind,
    pub algorithm: Algorithm,
    pub parameters: BTreeMap<String, String>,
    /// Significant digits of the decimal column.
    pub precision: usize,
    pub agents: usize,
    /// `v(N)` of the instance.
    pub total: BigRational,
    pub wall_time_ms: u128,
    /// Computed agents in ascending order; a subset when `--agents` was given.
    pub values: Vec<(AgentId, BigRational)>,
}

fn at(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInstance(format!("result line {line}: {msg}"))
}

impl ResultFile {
    pub fn is_complete(&self) -> bool {
        self.values.len() == self.agents
    }

    pub fn sum(&self) -> BigRational {
        self.values.iter().map(|(_, v)| v).sum()
    }

    pub fn render(&self) -> String {
        let mut out = format!("{RESULT_HEADER} {RESULT_VERSION}\n");
        writeln!(out, "instance-digest {}", self.instance_digest).unwrap();
        writeln!(out, "kind {}", self.kind).unwrap();
        writeln!(out, "algorithm {}", self.algorithm).unwrap();
        for (k, v) in &self.parameters {
            writeln!(out, "param {k} {v}").unwrap();
        }
        writeln!(out, "precision {}", self.precision).unwrap();
        writeln!(out, "agents {}", self.agents).unwrap();
        writeln!(out, "total {}", format_rational(&self.total)).unwrap();
        writeln!(out, "wall-time-ms {}", self.wall_time_ms).unwrap();
        for (i, v) in &self.values {
            writeln!(
                out,
                "phi {} {} {}",
                i.label(),
                format_rational(v),
                to_decimal(v, self.precision)
            )
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut digest = None;
        let mut kind = None;
        let mut algorithm = None;
        let mut parameters = BTreeMap::new();
        let mut precision = None;
        let mut agents = None;
        let mut total = None;
        let mut wall = None;
        let mut values: Vec<(AgentId, BigRational)> = Vec::new();
        let mut saw_header = false;

        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if !saw_header {
                if raw.trim() != format!("{RESULT_HEADER} {RESULT_VERSION}") {
                    return Err(at(
                        line,
                        format_args!("expected '{RESULT_HEADER} {RESULT_VERSION}'"),
                    ));
                }
                saw_header = true;
                continue;
            }
            let bad = || at(line, format_args!("malformed '{}' line", toks[0]));
            match toks[..] {
                ["instance-digest", d] => digest = Some(d.to_string()),
                ["kind", name] => kind = Some(name.parse::<GameKind>().map_err(|e| at(line, e))?),
                ["algorithm", name] => {
                    algorithm = Some(name.parse::<Algorithm>().map_err(|e| at(line, e))?)
                }
                ["param", key, value] => {
                    parameters.insert(key.to_string(), value.to_string());
                }
                ["precision", p] => precision = Some(p.parse().map_err(|_| bad())?),
                ["agents", n] => agents = Some(n.parse::<usize>().map_err(|_| bad())?),
                ["total", t] => total = Some(parse_rational(t).map_err(|_| bad())?),
                ["wall-time-ms", t] => wall = Some(t.parse().map_err(|_| bad())?),
                ["phi", i, exact, _decimal] => {
                    let id = AgentId::new(i.parse().map_err(|_| bad())?).map_err(|_| bad())?;
                    if values.last().is_some_and(|(prev, _)| *prev >= id) {
                        return Err(at(line, "agents must be listed in ascending order"));
                    }
                    values.push((id, parse_rational(exact).map_err(|_| bad())?));
                }
                _ => return Err(bad()),
            }
        }
        let missing =
            |what: &str| Error::InvalidInstance(format!("result file has no '{what}' line"));
        let agents = agents.ok_or_else(|| missing("agents"))?;
        if let Some((last, _)) = values.last() {
            if last.label() > agents {
                return Err(Error::InvalidInstance(format!(
                    "result names agent {last} of {agents}"
                )));
            }
        }
        Ok(ResultFile {
            instance_digest: digest.ok_or_else(|| missing("instance-digest"))?,
            kind: kind.ok_or_else(|| missing("kind"))?,
            algorithm: algorithm.ok_or_else(|| missing("algorithm"))?,
            parameters,
            precision: precision.unwrap_or(DEFAULT_PRECISION),
            agents,
            total: total.ok_or_else(|| missing("total"))?,
            wall_time_ms: wall.ok_or_else(|| missing("wall-time-ms"))?,
            values,
        })
    }

    /// Rendering with wall time zeroed; identical across reruns.
    pub fn render_deterministic(&self) -> String {
        ResultFile {
            wall_time_ms: 0,
            ..self.clone()
        }
        .render()
    }
}
