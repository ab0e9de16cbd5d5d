//! Subcommands: `value`, `shapley`, `compare`, `axioms`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::Signed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::axioms::{axiom_report, check_linearity, DEFAULT_AXIOM_CAP};
use crate::cli::format::{Game, GameKind, InstanceFile};
use crate::cli::result_file::{ResultFile, DEFAULT_PRECISION};
use crate::engine::{shapley_via_decomposition, shapley_via_per_element, EngineConfig};
use crate::error::{Error, Result};
use crate::game::{AgentId, Coalition, SumGame, ValueFunction};
use crate::greedy::GreedyGame;
use crate::oracle::{
    shapley_brute_permutations, shapley_brute_subsets, shapley_monte_carlo, SamplerConfig,
};
use crate::random;
use crate::rational::{format_rational, parse_rational};
use crate::rounding::round_instance;
use crate::shapley::{Algorithm, ShapleyResult};
use crate::table::DEFAULT_STATE_BUDGET;
use crate::vector_dp::shapley_exact_dp_with_budget;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "kshap",
    version,
    about = "Shapley values for knapsack-budgeted and compactly represented games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print v(S) for one coalition.
    Value(ValueArgs),
    /// Compute Shapley values and write a result file.
    Shapley(ShapleyArgs),
    /// Run several algorithms and check them against each other.
    Compare(CompareArgs),
    /// Check efficiency, symmetry, null player and linearity.
    Axioms(AxiomsArgs),
}

#[derive(Debug, Args)]
pub struct ValueArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Comma list of 1-based agents, "all", or "" for the empty coalition.
    #[arg(long, allow_hyphen_values = true)]
    pub agents: String,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Rounding precision, as p/q or a terminating decimal.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Monte Carlo permutations per agent.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Monte Carlo seed; also seeds the second game of the linearity check.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the machine's parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Cap on distinct (size, state) keys in any count table.
    #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
    pub state_budget: usize,
    /// Significant digits of decimal renderings.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    pub precision: usize,
}

#[derive(Debug, Args)]
pub struct ShapleyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_parser = parse_algorithm)]
    pub algorithm: Algorithm,
    /// Restrict to these 1-based agents (comma list).
    #[arg(long)]
    pub agents: Option<String>,
    /// Result file path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Comma list of algorithms.
    #[arg(long, value_parser = parse_algorithm, value_delimiter = ',', required = true)]
    pub algorithm: Vec<Algorithm>,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, value_parser = parse_algorithm)]
    pub algorithm: Algorithm,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Precondition(_) | Error::InvalidInstance(_) => EXIT_INPUT,
            Error::Capacity { .. } => EXIT_CAPACITY,
            Error::Contract(_) => EXIT_INVARIANT,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: e.to_string(),
        }
    }
}

fn invariant(message: String) -> Failure {
    Failure {
        code: EXIT_INVARIANT,
        message,
    }
}

type Outcome = std::result::Result<(), Failure>;

pub fn load_instance(path: &PathBuf) -> std::result::Result<InstanceFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    })?;
    InstanceFile::parse(&text).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    })
}

/// Parses `all`, `""`, or a comma list of 1-based agents into 0-based indices.
pub fn parse_agent_list(list: &str, n: usize) -> Result<Vec<usize>> {
    let list = list.trim();
    if list == "all" {
        return Ok((0..n).collect());
    }
    let mut picked = Vec::new();
    for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let k: usize = tok
            .parse()
            .map_err(|_| Error::Precondition(format!("agent '{tok}' is not an index")))?;
        picked.push(AgentId::new(k)?.check(n)?.index());
    }
    picked.sort_unstable();
    picked.dedup();
    Ok(picked)
}

/// Algorithm inputs shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Settings {
    pub epsilon: Option<BigRational>,
    pub sampler: SamplerConfig,
    pub engine: EngineConfig,
}

impl Settings {
    pub fn from_args(run: &RunArgs) -> Result<Self> {
        let epsilon = run.epsilon.as_deref().map(parse_rational).transpose()?;
        Ok(Settings {
            epsilon,
            sampler: SamplerConfig::new(run.samples, run.seed)?,
            engine: EngineConfig {
                state_budget: run.state_budget,
                ..EngineConfig::default()
            },
        })
    }

    fn epsilon(&self) -> Result<&BigRational> {
        self.epsilon
            .as_ref()
            .ok_or_else(|| Error::Precondition("rounding needs --epsilon".into()))
    }
}

/// Rejects algorithm/kind pairs with no implementation.
pub fn check_pairing(kind: GameKind, algorithm: Algorithm) -> Result<()> {
    let ok = match algorithm {
        Algorithm::BruteSubset | Algorithm::BrutePermutation | Algorithm::MonteCarlo => true,
        Algorithm::VectorDp | Algorithm::Rounding => kind == GameKind::Knapsack,
        Algorithm::Engine => kind != GameKind::Knapsack,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "algorithm {algorithm} does not apply to kind {kind}"
        )))
    }
}

/// Shapley values of `agents` (0-based, ascending) under one algorithm.
pub fn compute(
    game: &Game,
    algorithm: Algorithm,
    settings: &Settings,
    agents: &[usize],
) -> Result<ShapleyResult> {
    check_pairing(game.kind(), algorithm)?;
    let mut params = Vec::<(&str, String)>::new();
    let rounded = match algorithm {
        Algorithm::Rounding => {
            let inst = game.knapsack().expect("pairing checked");
            let r = round_instance(inst, settings.epsilon()?)?;
            params.push(("epsilon", format_rational(r.epsilon())));
            params.push(("error-bound", format_rational(&r.error_bound())));
            params.push(("fallback", r.is_fallback().to_string()));
            Some(r)
        }
        _ => None,
    };
    match algorithm {
        Algorithm::MonteCarlo => {
            params.push(("samples", settings.sampler.samples().to_string()));
            params.push(("seed", settings.sampler.seed.to_string()));
            params.push(("rng", "chacha8-stream-per-chunk".into()));
        }
        Algorithm::VectorDp | Algorithm::Rounding | Algorithm::Engine => {
            params.push(("state-budget", settings.engine.state_budget.to_string()));
        }
        Algorithm::BruteSubset | Algorithm::BrutePermutation => {}
    }
    let budget = settings.engine.state_budget;
    let one = |k: usize| -> Result<BigRational> {
        let id = AgentId::from_index(k);
        match algorithm {
            Algorithm::BruteSubset => shapley_brute_subsets(game, id),
            Algorithm::BrutePermutation => shapley_brute_permutations(game, id),
            Algorithm::MonteCarlo => shapley_monte_carlo(game, id, &settings.sampler),
            Algorithm::VectorDp => {
                shapley_exact_dp_with_budget(game.knapsack().expect("pairing checked"), id, budget)
            }
            Algorithm::Rounding => rounded.as_ref().expect("built above").shapley(id, budget),
            Algorithm::Engine => match game {
                Game::Wmg(g) => shapley_via_decomposition(g, id, &settings.engine),
                Game::McNet(g) => shapley_via_per_element(g, id, None, &settings.engine),
                Game::MultiIssue(g) => shapley_via_per_element(g, id, None, &settings.engine),
                Game::TopK(g) => shapley_via_per_element(g, id, None, &settings.engine),
                Game::GreedyKnapsack(g) => g.shapley(id, &settings.engine),
                Game::Knapsack(_) => unreachable!("pairing checked"),
            },
        }
    };
    let values = agents
        .par_iter()
        .map(|&k| one(k))
        .collect::<Result<Vec<_>>>()?;
    Ok(params
        .into_iter()
        .fold(ShapleyResult::new(values, algorithm), |r, (k, v)| {
            r.with_parameter(k, v)
        }))
}

fn full_value<V: ValueFunction>(v: &V) -> BigRational {
    v.value(&Coalition::full(v.agent_count()))
}

/// Exact algorithms must be efficient; rounding must be efficient for the
/// rounded game it actually solved.
fn assert_efficiency(game: &Game, result: &ShapleyResult, settings: &Settings) -> Outcome {
    let target = match result.algorithm {
        Algorithm::MonteCarlo => return Ok(()),
        Algorithm::Rounding => {
            let r = round_instance(
                game.knapsack().expect("pairing checked"),
                settings.epsilon()?,
            )?;
            full_value(&r)
        }
        _ => full_value(game),
    };
    if result.total() != target {
        return Err(invariant(format!(
            "efficiency violated: values sum to {}, expected {}",
            format_rational(&result.total()),
            format_rational(&target)
        )));
    }
    Ok(())
}

fn with_pool<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> std::result::Result<T, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(Failure {
                code: EXIT_INPUT,
                message: "--jobs must be at least 1".into(),
            });
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(|e| Failure {
        code: EXIT_INPUT,
        message: e.to_string(),
    })?;
    Ok(pool.install(f))
}

pub fn cmd_value(args: &ValueArgs, out: &mut dyn Write) -> Outcome {
    let file = load_instance(&args.instance)?;
    let n = file.game.agent_count();
    let s = Coalition::from_indices(n, parse_agent_list(&args.agents, n)?);
    writeln!(out, "{}", format_rational(&file.game.value(&s)))?;
    Ok(())
}

/// Runs `shapley` and returns the result file without writing it.
pub fn shapley_result(args: &ShapleyArgs) -> std::result::Result<ResultFile, Failure> {
    let file = load_instance(&args.run.instance)?;
    let settings = Settings::from_args(&args.run)?;
    let n = file.game.agent_count();
    let agents = match &args.agents {
        Some(list) => parse_agent_list(list, n)?,
        None => (0..n).collect(),
    };
    let start = Instant::now();
    let result = with_pool(args.run.jobs, || {
        compute(&file.game, args.algorithm, &settings, &agents)
    })??;
    let wall_time_ms = start.elapsed().as_millis();
    if agents.len() == n {
        assert_efficiency(&file.game, &result, &settings)?;
    }
    Ok(ResultFile {
        instance_digest: file.digest(),
        kind: file.kind(),
        algorithm: result.algorithm,
        parameters: result.parameters,
        precision: args.run.precision,
        agents: n,
        total: full_value(&file.game),
        wall_time_ms,
        values: agents
            .iter()
            .map(|&k| AgentId::from_index(k))
            .zip(result.values)
            .collect(),
    })
}

pub fn cmd_shapley(args: &ShapleyArgs, out: &mut dyn Write) -> Outcome {
    let text = shapley_result(args)?.render();
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Allowed gap between two algorithms; `None` when either is an estimate.
pub fn tolerance(
    a: Algorithm,
    b: Algorithm,
    game: &Game,
    settings: &Settings,
) -> Result<Option<BigRational>> {
    if a == Algorithm::MonteCarlo || b == Algorithm::MonteCarlo {
        return Ok(None);
    }
    if (a == Algorithm::Rounding) != (b == Algorithm::Rounding) {
        let inst = game.knapsack().expect("rounding implies knapsack");
        return Ok(Some(
            round_instance(inst, settings.epsilon()?)?.error_bound(),
        ));
    }
    Ok(Some(BigRational::from_integer(0.into())))
}

pub fn cmd_compare(args: &CompareArgs, out: &mut dyn Write) -> Outcome {
    let file = load_instance(&args.run.instance)?;
    let settings = Settings::from_args(&args.run)?;
    let n = file.game.agent_count();
    let agents: Vec<usize> = (0..n).collect();
    for &a in &args.algorithm {
        check_pairing(file.kind(), a)?;
    }
    let results = with_pool(args.run.jobs, || {
        args.algorithm
            .iter()
            .map(|&a| compute(&file.game, a, &settings, &agents))
            .collect::<Result<Vec<_>>>()
    })??;

    let mut table = String::from("agent");
    for r in &results {
        write!(table, "\t{}", r.algorithm).unwrap();
    }
    table.push('\n');
    for k in 0..n {
        table.push_str(&file.label(k));
        for r in &results {
            write!(table, "\t{}", format_rational(&r.values[k])).unwrap();
        }
        table.push('\n');
    }
    out.write_all(table.as_bytes())?;

    let mut failed = Vec::new();
    for x in 0..results.len() {
        for y in x + 1..results.len() {
            let (a, b) = (&results[x], &results[y]);
            let diff = a.max_abs_diff(b).expect("same agent count");
            let shown = format_rational(&diff);
            match tolerance(a.algorithm, b.algorithm, &file.game, &settings)? {
                None => writeln!(
                    out,
                    "{} vs {}: max diff {shown}, estimate, no tolerance",
                    a.algorithm, b.algorithm
                )?,
                Some(tol) => {
                    let pass = diff <= tol;
                    writeln!(
                        out,
                        "{} vs {}: max diff {shown}, tolerance {}, {}",
                        a.algorithm,
                        b.algorithm,
                        format_rational(&tol),
                        if pass { "pass" } else { "FAIL" }
                    )?;
                    if !pass {
                        failed.push(format!("{} vs {}", a.algorithm, b.algorithm));
                    }
                }
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(invariant(format!(
            "tolerance exceeded: {}",
            failed.join(", ")
        )))
    }
}

/// A random game of the same kind and agent count.
pub fn random_companion(game: &Game, seed: u64) -> Game {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = game.agent_count();
    match game {
        Game::Knapsack(g) => Game::Knapsack(random::knapsack(&mut rng, n, g.bin().min(8), 6)),
        Game::GreedyKnapsack(g) => Game::GreedyKnapsack(GreedyGame::new(random::knapsack(
            &mut rng,
            n,
            g.instance().bin().min(8),
            6,
        ))),
        Game::Wmg(_) => Game::Wmg(random::wmg(&mut rng, n, 6)),
        Game::McNet(_) => Game::McNet(random::mcnet(&mut rng, n, 4)),
        Game::MultiIssue(_) => Game::MultiIssue(random::multi_issue(&mut rng, n, 3)),
        Game::TopK(_) => Game::TopK(random::topk(&mut rng, n, 6)),
    }
}

pub fn cmd_axioms(args: &AxiomsArgs, out: &mut dyn Write) -> Outcome {
    let file = load_instance(&args.run.instance)?;
    let settings = Settings::from_args(&args.run)?;
    let game = &file.game;
    let n = game.agent_count();
    let agents: Vec<usize> = (0..n).collect();
    let exact = args.algorithm.is_exact();
    let (phi, report, companion, phi_w, phi_sum) = with_pool(args.run.jobs, || -> Result<_> {
        let phi = compute(game, args.algorithm, &settings, &agents)?;
        let report = axiom_report(game, &phi, DEFAULT_AXIOM_CAP)?;
        let companion = random_companion(game, args.run.seed);
        let phi_w = compute(&companion, args.algorithm, &settings, &agents)?;
        let sum = SumGame::new(game, &companion)?;
        let sum_values = agents
            .par_iter()
            .map(|&k| shapley_brute_subsets(&sum, AgentId::from_index(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok((
            phi,
            report,
            companion,
            phi_w,
            ShapleyResult::new(sum_values, Algorithm::BruteSubset),
        ))
    })??;
    let linear = check_linearity(game, &companion, &phi, &phi_w, &phi_sum)?;

    let interchangeable = report.symmetry.iter().filter(|t| t.2).count();
    let nulls = report.null_player.iter().filter(|t| t.1).count();
    let outcomes = [
        ("efficiency", report.efficiency, String::new()),
        (
            "symmetry",
            report.symmetry.iter().all(|t| t.3),
            format!(" (interchangeable pairs: {interchangeable})"),
        ),
        (
            "null-player",
            report.null_player.iter().all(|t| t.2),
            format!(" (null agents: {nulls})"),
        ),
        (
            "linearity",
            linear,
            format!(" (companion seed {})", args.run.seed),
        ),
    ];
    let mut failed = Vec::new();
    for (name, pass, detail) in outcomes {
        let verdict = if pass { "pass" } else { "FAIL" };
        if exact {
            writeln!(out, "{name}: {verdict}{detail}")?;
            if !pass {
                failed.push(name);
            }
        } else {
            writeln!(
                out,
                "{name}: {verdict}{detail} [estimate: axiom not guaranteed]"
            )?;
        }
    }
    for (i, _, pass) in report.null_player.iter().filter(|t| t.1) {
        if !pass {
            writeln!(
                out,
                "  null agent {} received {}",
                file.label(i.index()),
                format_rational(&phi.values[i.index()])
            )?;
        }
    }
    for (i, j, _, _) in report.symmetry.iter().filter(|t| t.2 && !t.3) {
        let gap = (&phi.values[i.index()] - &phi.values[j.index()]).abs();
        writeln!(
            out,
            "  agents {} and {} differ by {}",
            file.label(i.index()),
            file.label(j.index()),
            format_rational(&gap)
        )?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(invariant(format!("axioms failed: {}", failed.join(", "))))
    }
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::Value(a) => cmd_value(a, out),
        Command::Shapley(a) => cmd_shapley(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Axioms(a) => cmd_axioms(a, out),
    }
}
