//! Instance files: a line-oriented, versioned text format.
//!
//! ```text
//! format shapley-instance 1
//! kind knapsack
//! bin 5
//! agent 2 3        # length weight
//! agent 1 1
//! label 1 north
//! ```
//!
//! `#` starts a comment. Agent indices are 1-based everywhere.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;
use sha2::{Digest, Sha256};

use crate::catalog::{
    Issue, McNetInstance, MultiIssueInstance, Rule, TopKInstance, WmgInstance, DEFAULT_ISSUE_CAP,
};
use crate::error::{Error, Result};
use crate::game::{Coalition, ValueFunction};
use crate::greedy::GreedyGame;
use crate::knapsack::{Agent, GameInstance};
use crate::rational::{format_rational, parse_rational};

pub const INSTANCE_HEADER: &str = "format shapley-instance";
pub const INSTANCE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GameKind {
    Knapsack,
    GreedyKnapsack,
    Wmg,
    McNet,
    MultiIssue,
    TopK,
}

impl GameKind {
    pub const ALL: [GameKind; 6] = [
        GameKind::Knapsack,
        GameKind::GreedyKnapsack,
        GameKind::Wmg,
        GameKind::McNet,
        GameKind::MultiIssue,
        GameKind::TopK,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GameKind::Knapsack => "knapsack",
            GameKind::GreedyKnapsack => "greedy-knapsack",
            GameKind::Wmg => "wmg",
            GameKind::McNet => "mcnet",
            GameKind::MultiIssue => "multi-issue",
            GameKind::TopK => "topk",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GameKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidInstance(format!("unknown game kind '{s}'")))
    }
}

/// A parsed game of any supported kind.
#[derive(Debug, Clone)]
pub enum Game {
    Knapsack(GameInstance),
    GreedyKnapsack(GreedyGame),
    Wmg(WmgInstance),
    McNet(McNetInstance),
    MultiIssue(MultiIssueInstance),
    TopK(TopKInstance),
}

impl Game {
    pub fn kind(&self) -> GameKind {
        match self {
            Game::Knapsack(_) => GameKind::Knapsack,
            Game::GreedyKnapsack(_) => GameKind::GreedyKnapsack,
            Game::Wmg(_) => GameKind::Wmg,
            Game::McNet(_) => GameKind::McNet,
            Game::MultiIssue(_) => GameKind::MultiIssue,
            Game::TopK(_) => GameKind::TopK,
        }
    }

    /// The knapsack instance behind either knapsack kind.
    pub fn knapsack(&self) -> Option<&GameInstance> {
        match self {
            Game::Knapsack(g) => Some(g),
            Game::GreedyKnapsack(g) => Some(g.instance()),
            _ => None,
        }
    }
}

impl ValueFunction for Game {
    fn agent_count(&self) -> usize {
        match self {
            Game::Knapsack(g) => g.agent_count(),
            Game::GreedyKnapsack(g) => g.agent_count(),
            Game::Wmg(g) => g.agent_count(),
            Game::McNet(g) => g.agent_count(),
            Game::MultiIssue(g) => g.agent_count(),
            Game::TopK(g) => g.agent_count(),
        }
    }

    fn value(&self, s: &Coalition) -> BigRational {
        match self {
            Game::Knapsack(g) => g.value(s),
            Game::GreedyKnapsack(g) => g.value(s),
            Game::Wmg(g) => g.value(s),
            Game::McNet(g) => g.value(s),
            Game::MultiIssue(g) => g.value(s),
            Game::TopK(g) => g.value(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InstanceFile {
    pub game: Game,
    /// Optional display names, keyed by 0-based agent index.
    pub labels: BTreeMap<usize, String>,
}

fn at(line: usize, msg: impl fmt::Display) -> Error {
    Error::InvalidInstance(format!("line {line}: {msg}"))
}

fn number<T: FromStr>(tok: &str, what: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| {
        at(
            line,
            format_args!("{what} '{tok}' is not a non-negative integer"),
        )
    })
}

fn rational(tok: &str, what: &str, line: usize) -> Result<BigRational> {
    parse_rational(tok).map_err(|_| at(line, format_args!("{what} '{tok}' is not a rational")))
}

/// A 1-based agent reference, returned 0-based.
fn agent_ref(tok: &str, agents: usize, line: usize) -> Result<usize> {
    let k: usize = number(tok, "agent", line)?;
    if k == 0 || k > agents {
        return Err(at(line, format_args!("agent {k} is outside 1..={agents}")));
    }
    Ok(k - 1)
}

/// A `name VALUE` header line that may appear at most once.
#[derive(Default)]
struct Scalar {
    value: Option<(u64, usize)>,
}

impl Scalar {
    fn set(&mut self, key: &str, rest: &[&str], line: usize) -> Result<()> {
        if self.value.is_some() {
            return Err(at(line, format_args!("duplicate '{key}' line")));
        }
        let [tok] = rest else {
            return Err(at(line, format_args!("'{key}' takes one value")));
        };
        self.value = Some((number(tok, key, line)?, line));
        Ok(())
    }

    fn get(&self, key: &str) -> Result<(u64, usize)> {
        self.value
            .ok_or_else(|| Error::InvalidInstance(format!("missing '{key}' line")))
    }
}

#[derive(Default)]
struct Draft {
    scalar: Scalar,
    agent_count: Scalar,
    /// `(line, numbers)` per `agent` line.
    agents: Vec<(usize, Vec<u64>)>,
    rules: Vec<(usize, BigRational, Vec<i64>)>,
    issues: Vec<(usize, Vec<usize>, Vec<BigRational>)>,
    labels: Vec<(usize, usize, String)>,
}

fn scalar_key(kind: GameKind) -> Option<&'static str> {
    match kind {
        GameKind::Knapsack | GameKind::GreedyKnapsack => Some("bin"),
        GameKind::Wmg => Some("quota"),
        GameKind::TopK => Some("k"),
        GameKind::McNet | GameKind::MultiIssue => None,
    }
}

fn split_colon<'a>(rest: &'a str, what: &str, line: usize) -> Result<(&'a str, &'a str)> {
    rest.split_once(':')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| at(line, format_args!("'{what}' needs a ':' separator")))
}

impl InstanceFile {
    pub fn new(game: Game) -> Self {
        InstanceFile {
            game,
            labels: BTreeMap::new(),
        }
    }

    pub fn kind(&self) -> GameKind {
        self.game.kind()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, raw)| (k + 1, raw.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (line, header) = lines
            .next()
            .ok_or_else(|| Error::InvalidInstance("empty instance file".into()))?;
        let version = header
            .strip_prefix(INSTANCE_HEADER)
            .map(str::trim)
            .ok_or_else(|| {
                at(
                    line,
                    format_args!("expected '{INSTANCE_HEADER} {INSTANCE_VERSION}'"),
                )
            })?;
        if version != INSTANCE_VERSION.to_string() {
            return Err(at(
                line,
                format_args!("unsupported format version '{version}'"),
            ));
        }
        let (line, kind_line) = lines
            .next()
            .ok_or_else(|| Error::InvalidInstance("missing 'kind' line".into()))?;
        let kind: GameKind = match kind_line.split_whitespace().collect::<Vec<_>>()[..] {
            ["kind", k] => k.parse().map_err(|e| at(line, e))?,
            _ => return Err(at(line, "expected 'kind <name>'")),
        };

        let mut d = Draft::default();
        for (line, text) in lines {
            let (key, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
            let rest = rest.trim();
            let toks: Vec<&str> = rest.split_whitespace().collect();
            match (key, kind) {
                ("label", _) => {
                    let (idx, name) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                    if name.trim().is_empty() {
                        return Err(at(line, "'label' needs an agent and a name"));
                    }
                    d.labels
                        .push((line, number(idx, "agent", line)?, name.trim().to_string()));
                }
                (k, _) if Some(k) == scalar_key(kind) => d.scalar.set(k, &toks, line)?,
                ("agents", GameKind::McNet | GameKind::MultiIssue) => {
                    d.agent_count.set("agents", &toks, line)?
                }
                ("agent", GameKind::Knapsack | GameKind::GreedyKnapsack) => {
                    let [l, w] = toks[..] else {
                        return Err(at(line, "'agent' takes a length and a weight"));
                    };
                    d.agents.push((
                        line,
                        vec![number(l, "length", line)?, number(w, "weight", line)?],
                    ));
                }
                ("agent", GameKind::Wmg | GameKind::TopK) => {
                    let [w] = toks[..] else {
                        return Err(at(line, "'agent' takes one weight"));
                    };
                    d.agents.push((line, vec![number(w, "weight", line)?]));
                }
                ("rule", GameKind::McNet) => {
                    let (value, lits) = split_colon(rest, "rule", line)?;
                    let value = rational(value, "rule value", line)?;
                    let lits = lits
                        .split_whitespace()
                        .map(|t| {
                            let (sign, body) = match t.as_bytes()[0] {
                                b'+' => (1, &t[1..]),
                                b'-' => (-1, &t[1..]),
                                _ => {
                                    return Err(at(
                                        line,
                                        format_args!("literal '{t}' needs a '+' or '-' sign"),
                                    ))
                                }
                            };
                            Ok(sign * number::<i64>(body, "agent", line)?)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    d.rules.push((line, value, lits));
                }
                ("issue", GameKind::MultiIssue) => {
                    let (members, values) = split_colon(rest, "issue", line)?;
                    let members = members
                        .split(',')
                        .map(|t| number::<usize>(t.trim(), "agent", line))
                        .collect::<Result<Vec<_>>>()?;
                    let values = values
                        .split_whitespace()
                        .map(|t| rational(t, "issue value", line))
                        .collect::<Result<Vec<_>>>()?;
                    d.issues.push((line, members, values));
                }
                _ => {
                    return Err(at(
                        line,
                        format_args!("unexpected '{key}' line for kind {kind}"),
                    ))
                }
            }
        }
        let game = build(kind, &d)?;
        let n = game.agent_count();
        let mut labels = BTreeMap::new();
        for (line, idx, name) in d.labels {
            let k = agent_ref(&idx.to_string(), n, line)?;
            if labels.insert(k, name).is_some() {
                return Err(at(line, format_args!("agent {idx} is labelled twice")));
            }
        }
        Ok(InstanceFile { game, labels })
    }

    pub fn label(&self, index: usize) -> String {
        self.labels
            .get(&index)
            .cloned()
            .unwrap_or_else(|| (index + 1).to_string())
    }

    /// Canonical rendering: comments dropped, fixed line order.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{INSTANCE_HEADER} {INSTANCE_VERSION}\nkind {}\n",
            self.kind()
        );
        match &self.game {
            Game::Knapsack(_) | Game::GreedyKnapsack(_) => {
                let g = self.game.knapsack().expect("knapsack kind");
                writeln!(out, "bin {}", g.bin()).unwrap();
                for a in g.agents() {
                    writeln!(out, "agent {} {}", a.length, a.weight).unwrap();
                }
            }
            Game::Wmg(g) => {
                writeln!(out, "quota {}", g.quota).unwrap();
                for w in &g.weights {
                    writeln!(out, "agent {w}").unwrap();
                }
            }
            Game::TopK(g) => {
                writeln!(out, "k {}", g.k).unwrap();
                for w in &g.weights {
                    writeln!(out, "agent {w}").unwrap();
                }
            }
            Game::McNet(g) => {
                writeln!(out, "agents {}", g.agent_count()).unwrap();
                for r in g.rules() {
                    write!(out, "rule {} :", format_rational(&r.value)).unwrap();
                    for k in &r.positive {
                        write!(out, " +{}", k + 1).unwrap();
                    }
                    for k in &r.negative {
                        write!(out, " -{}", k + 1).unwrap();
                    }
                    out.push('\n');
                }
            }
            Game::MultiIssue(g) => {
                writeln!(out, "agents {}", g.agent_count()).unwrap();
                for issue in g.issues() {
                    let members: Vec<String> =
                        issue.members.iter().map(|k| (k + 1).to_string()).collect();
                    write!(out, "issue {} :", members.join(",")).unwrap();
                    for v in &issue.values {
                        write!(out, " {}", format_rational(v)).unwrap();
                    }
                    out.push('\n');
                }
            }
        }
        for (k, name) in &self.labels {
            writeln!(out, "label {} {name}", k + 1).unwrap();
        }
        out
    }

    /// `sha256:<hex>` of the canonical rendering.
    pub fn digest(&self) -> String {
        format!(
            "sha256:{}",
            hex::encode(Sha256::digest(self.render().as_bytes()))
        )
    }
}

fn weights(d: &Draft) -> Vec<u64> {
    d.agents.iter().map(|(_, v)| v[0]).collect()
}

fn need_agents(d: &Draft) -> Result<()> {
    if d.agents.is_empty() {
        return Err(Error::InvalidInstance(
            "instance has no 'agent' lines".into(),
        ));
    }
    Ok(())
}

fn declared_agents(d: &Draft) -> Result<usize> {
    let (n, line) = d.agent_count.get("agents")?;
    if n == 0 {
        return Err(at(line, "at least one agent is required"));
    }
    Ok(n as usize)
}

fn build(kind: GameKind, d: &Draft) -> Result<Game> {
    match kind {
        GameKind::Knapsack | GameKind::GreedyKnapsack => {
            let (bin, bin_line) = d.scalar.get("bin")?;
            if bin == 0 {
                return Err(at(bin_line, "bin size must be positive"));
            }
            need_agents(d)?;
            for (k, (line, v)) in d.agents.iter().enumerate() {
                if v[0] == 0 || v[0] > bin {
                    return Err(at(
                        *line,
                        format_args!(
                            "agent {} has length {}; lengths must lie in 1..={bin}",
                            k + 1,
                            v[0]
                        ),
                    ));
                }
            }
            let agents = d
                .agents
                .iter()
                .map(|(_, v)| Agent {
                    length: v[0],
                    weight: v[1],
                })
                .collect();
            let inst = GameInstance::new(agents, bin)?;
            Ok(if kind == GameKind::Knapsack {
                Game::Knapsack(inst)
            } else {
                Game::GreedyKnapsack(GreedyGame::new(inst))
            })
        }
        GameKind::Wmg => {
            let (q, _) = d.scalar.get("quota")?;
            need_agents(d)?;
            Ok(Game::Wmg(WmgInstance::new(q, weights(d))))
        }
        GameKind::TopK => {
            let (k, _) = d.scalar.get("k")?;
            need_agents(d)?;
            Ok(Game::TopK(TopKInstance::new(k, weights(d))))
        }
        GameKind::McNet => {
            let n = declared_agents(d)?;
            let mut rules = Vec::with_capacity(d.rules.len());
            for (line, value, lits) in &d.rules {
                let mut rule = Rule {
                    positive: vec![],
                    negative: vec![],
                    value: value.clone(),
                };
                let mut seen = vec![false; n];
                for &lit in lits {
                    let k = agent_ref(&lit.unsigned_abs().to_string(), n, *line)?;
                    if std::mem::replace(&mut seen[k], true) {
                        return Err(at(
                            *line,
                            format_args!("agent {} appears twice in one rule", k + 1),
                        ));
                    }
                    if lit > 0 {
                        &mut rule.positive
                    } else {
                        &mut rule.negative
                    }
                    .push(k);
                }
                rules.push(rule);
            }
            Ok(Game::McNet(McNetInstance::new(n, rules)?))
        }
        GameKind::MultiIssue => {
            let n = declared_agents(d)?;
            let mut issues = Vec::with_capacity(d.issues.len());
            for (line, members, values) in &d.issues {
                let mut seen = vec![false; n];
                let mut local = Vec::with_capacity(members.len());
                for &m in members {
                    let k = agent_ref(&m.to_string(), n, *line)?;
                    if std::mem::replace(&mut seen[k], true) {
                        return Err(at(
                            *line,
                            format_args!("agent {m} appears twice in one issue"),
                        ));
                    }
                    local.push(k);
                }
                if local.len() > DEFAULT_ISSUE_CAP {
                    return Err(Error::cap(
                        "agents in one issue",
                        DEFAULT_ISSUE_CAP,
                        local.len(),
                    ));
                }
                if values.len() != 1 << local.len() {
                    return Err(at(
                        *line,
                        format_args!(
                            "issue lists {} values, expected {}",
                            values.len(),
                            1usize << local.len()
                        ),
                    ));
                }
                if !values[0].is_zero() {
                    return Err(at(*line, "the first issue value (empty subset) must be 0"));
                }
                issues.push(Issue {
                    members: local,
                    values: values.clone(),
                });
            }
            Ok(Game::MultiIssue(MultiIssueInstance::new(n, issues)?))
        }
    }
}
