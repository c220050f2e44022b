//! The `btxp` command line.
//!
//! Exit codes: 0 success, 1 other error, 2 usage, 3 unparsable model answer
//! or tree file, 4 unsolvable goal, 5 resolution exhausted or failed run,
//! 6 schema error in an input file, 7 backend unavailable, 8 verification
//! violations.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use btxp_core::bt::{to_dot, BehaviorTree, NodeStatus};
use btxp_core::domain::{parse_conjunction, WorldState};
use btxp_core::llm::{BackendError, LlmExchange, OracleBackend, PromptSpec, ScriptedBackend};
use btxp_core::planner::{plan_from_tree, init_tree, GoalSpec, PlanConfig, PlanError};
use btxp_core::resolver::{interpret_goal, replay, resolve_from_tree, Outcome, ResolverConfig, RunError, RunReport};
use btxp_core::sim::{OracleAnswers, Scenario};
use btxp_core::verify::{verify_tree, VerificationReport, VerifyConfig};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::backends::{BackendChoice, BackendSource, Counting, SharedBackend};
use crate::bench::{goal_items, run_bench, scenario_items, with_examples, BenchSuite, ReportFormat};
use crate::format::{
    load_scenarios, parse_domain, parse_fixtures, parse_instructions, parse_tree, records_to_json, run_summary,
    trace_to_jsonl, tree_to_json, DomainFile, SchemaError,
};
use crate::library;
use crate::remote::{RemoteBackend, RemoteConfig};

pub const DEFAULT_MODEL: &str = "gpt-4-1106-preview";

#[derive(Parser, Debug)]
#[command(name = "btxp", version, about = "Plan behavior trees from instructions and repair them when actions fail")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Interpret an instruction and plan a tree for it.
    Plan(PlanArgs),
    /// Run a scenario: plan, execute and resolve failures.
    Run(RunArgs),
    /// Run a benchmark suite.
    Bench(BenchArgs),
    /// Check a tree file.
    Verify(VerifyArgs),
    /// List scenarios.
    Scenarios(ListArgs),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_enum, default_value = "oracle")]
    backend: BackendChoice,
    #[arg(long, default_value = DEFAULT_MODEL)]
    model: String,
    /// Scripted answers file; the bundled one by default.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    /// Directory for written artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    #[arg(long, default_value_t = 64)]
    budget_expansions: usize,
    #[arg(long, default_value_t = 16)]
    budget_reorders: usize,
    #[arg(long, default_value_t = 10_000)]
    budget_ticks: usize,
    #[arg(long, default_value_t = 8)]
    budget_rounds: usize,
    /// Concurrent requests to a remote backend.
    #[arg(long, default_value_t = 4)]
    max_in_flight: usize,
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Bundled scenario id or scenario file supplying domain, state and instruction.
    #[arg(long)]
    scenario: Option<String>,
    /// Bundled domain name or domain file.
    #[arg(long, required_unless_present = "scenario")]
    domain: Option<String>,
    /// Initial facts, `on(a, b) & on(b, table)`.
    #[arg(long)]
    state: Option<String>,
    #[arg(long, required_unless_present = "scenario")]
    instruction: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Bundled scenario id or scenario file.
    scenario: String,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    /// Execute once with all faults and report the first failure.
    #[arg(long)]
    no_resolve: bool,
    /// Start from this tree file instead of interpreting the instruction.
    #[arg(long)]
    tree: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(value_enum)]
    suite: BenchSuite,
    #[arg(long, default_value_t = 10)]
    repeat: usize,
    /// Keep only items whose id contains this text.
    #[arg(long)]
    filter: Option<String>,
    #[arg(long, default_value_t = 4)]
    jobs: usize,
    /// Scenario directory; the bundled scenarios by default.
    #[arg(long)]
    scenarios: Option<PathBuf>,
    /// Goal instruction set; the bundled cafe set by default.
    #[arg(long)]
    instructions: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    tree: PathBuf,
    #[arg(long, required_unless_present = "scenario")]
    domain: Option<String>,
    /// Takes domain and goal from a scenario.
    #[arg(long)]
    scenario: Option<String>,
    /// Goal conditions the tree must cover.
    #[arg(long, required_unless_present = "scenario")]
    goal: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Args, Debug)]
struct ListArgs {
    #[arg(long)]
    scenarios: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    Other = 1,
    Parse = 3,
    Unsolvable = 4,
    Exhausted = 5,
    Schema = 6,
    Backend = 7,
    Violations = 8,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    fn new(exit: Exit, message: impl Into<String>) -> Self {
        CliError {
            exit,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::new(Exit::Schema, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new(Exit::Other, e.to_string())
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        CliError::new(Exit::Backend, e.to_string())
    }
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        let exit = match &e {
            RunError::Backend(_) => Exit::Backend,
            RunError::Goal { .. } => Exit::Parse,
            RunError::Plan(PlanError::Unsolvable(_)) => Exit::Unsolvable,
            RunError::Plan(PlanError::BudgetExceeded { .. }) => Exit::Exhausted,
            _ => Exit::Other,
        };
        CliError::new(exit, e.to_string())
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        RunError::Plan(e).into()
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match execute(cli, &mut stdout) {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit as u8)
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<Exit> {
    match cli.command {
        Command::Plan(a) => cmd_plan(a, out),
        Command::Run(a) => cmd_run(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Scenarios(a) => cmd_list(a, out),
    }
}

impl Common {
    fn resolver_config(&self) -> ResolverConfig {
        ResolverConfig {
            max_resolution_rounds: self.budget_rounds,
            plan: PlanConfig {
                max_expansions: self.budget_expansions,
                max_conflict_reorders: self.budget_reorders,
                max_sim_ticks: self.budget_ticks,
            },
            max_sim_ticks: self.budget_ticks,
            model: self.model.clone(),
            ..ResolverConfig::default()
        }
    }

    fn fixtures(&self) -> Result<std::collections::BTreeMap<String, Vec<String>>> {
        match &self.fixtures {
            Some(p) => Ok(parse_fixtures(&read(p)?, p)?),
            None => Ok(library::scripted_fixtures()),
        }
    }

    fn remote(&self, audit: Option<PathBuf>) -> Result<RemoteBackend> {
        let mut cfg = RemoteConfig::from_env(&self.model)?;
        cfg.max_in_flight = self.max_in_flight;
        let b = RemoteBackend::new(cfg);
        Ok(match audit {
            Some(p) => b.with_audit_log(p),
            None => b,
        })
    }

    fn source(&self, audit: Option<PathBuf>) -> Result<BackendSource> {
        Ok(match self.backend {
            BackendChoice::Scripted => BackendSource::Scripted(self.fixtures()?),
            BackendChoice::Oracle => BackendSource::Oracle,
            BackendChoice::Remote => BackendSource::Remote(Arc::new(self.remote(audit)?)),
        })
    }

    fn audit_path(&self) -> Option<PathBuf> {
        self.out.as_ref().map(|d| d.join("exchanges.jsonl"))
    }

    /// Writes `name` into the output directory, if one was given.
    fn write(&self, name: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.out {
            write_atomic(&dir.join(name), contents)?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::new(Exit::Other, format!("{}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory and renames it.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| CliError::new(Exit::Other, format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

fn load_scenario(arg: &str) -> Result<Scenario> {
    let path = Path::new(arg);
    if path.is_file() {
        let mut v = load_scenarios(path)?;
        return v.pop().ok_or_else(|| CliError::new(Exit::Schema, format!("{arg}: no scenario")));
    }
    library::bundled_scenario(arg).ok_or_else(|| {
        CliError::new(
            Exit::Other,
            format!("`{arg}` is neither a scenario file nor a bundled scenario id (see `btxp scenarios`)"),
        )
    })
}

fn load_domain(arg: &str) -> Result<DomainFile> {
    let path = Path::new(arg);
    if path.is_file() {
        return Ok(parse_domain(&read(path)?, path)?);
    }
    library::bundled_domain(arg).ok_or_else(|| {
        CliError::new(
            Exit::Other,
            format!(
                "`{arg}` is neither a domain file nor a bundled domain ({})",
                library::domain_names().join(", ")
            ),
        )
    })
}

fn parse_state(text: Option<&str>, domain: &btxp_core::domain::Domain) -> Result<WorldState> {
    let mut state = WorldState::new();
    let Some(text) = text.filter(|t| !t.trim().is_empty()) else {
        return Ok(state);
    };
    let lits = parse_conjunction(text).map_err(|e| CliError::new(Exit::Parse, format!("--state: {e}")))?;
    for l in lits {
        domain
            .check_literal(&l)
            .map_err(|e| CliError::new(Exit::Parse, format!("--state: {e}")))?;
        let atom = l
            .atom()
            .filter(|_| !l.negated)
            .ok_or_else(|| CliError::new(Exit::Parse, format!("--state: `{l}` is not a ground positive fact")))?;
        state.insert(atom);
    }
    Ok(state)
}

/// Backend for one pipeline run. The oracle knows every bundled scenario so an
/// ad hoc instruction that matches a bundled one is still answered.
fn backend_for(common: &Common, scenario: &Scenario) -> Result<SharedBackend> {
    Ok(match common.backend {
        BackendChoice::Oracle => {
            let mut o = OracleBackend::from_scenarios(&library::bundled_scenarios());
            o.add_scenario(scenario);
            Box::new(o)
        }
        BackendChoice::Scripted => Box::new(ScriptedBackend::new(common.fixtures()?)),
        BackendChoice::Remote => Box::new(common.remote(common.audit_path())?),
    })
}

fn write_tree(common: &Common, tree: &BehaviorTree) -> Result<()> {
    common.write("tree.json", &tree_to_json(tree))?;
    common.write("tree.dot", &to_dot(tree))
}

fn cmd_plan(a: PlanArgs, out: &mut dyn Write) -> Result<Exit> {
    let common = &a.common;
    let mut scenario = match &a.scenario {
        Some(s) => load_scenario(s)?,
        None => {
            let DomainFile { domain, examples } = load_domain(a.domain.as_deref().unwrap_or_default())?;
            Scenario {
                id: "adhoc".into(),
                title: String::new(),
                domain,
                instruction: String::new(),
                initial: WorldState::new(),
                hidden: WorldState::new(),
                faults: Vec::new(),
                oracle: OracleAnswers::default(),
                examples,
                expected_rounds: None,
            }
        }
    };
    if let Some(d) = a.domain.as_deref().filter(|_| a.scenario.is_some()) {
        scenario.domain = load_domain(d)?.domain;
    }
    if a.state.is_some() || a.scenario.is_none() {
        scenario.initial = parse_state(a.state.as_deref(), &scenario.domain)?;
    }
    if let Some(i) = &a.instruction {
        if a.scenario.is_some() && *i != scenario.instruction {
            // a different instruction must not pick up the scenario's stored goal
            scenario.id = "adhoc".into();
            scenario.oracle.goal = None;
        }
        scenario.instruction = i.clone();
    }

    let backend = Counting::new(backend_for(common, &scenario)?);
    let config = common.resolver_config();
    let (goal, exchange) = interpret_goal(&scenario, &backend, &config)?;
    let plan = plan_from_tree(init_tree(&goal), &scenario.domain, &scenario.initial, &config.plan)?;
    write_tree(common, &plan.tree)?;
    common.write("goal.txt", &format!("{}\n", goal_text(&goal)))?;

    match common.format {
        ReportFormat::Json => {
            let doc = json!({
                "goal": goal.conjuncts().iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                "reasoning": exchange.reasoning,
                "expansions": plan.expansions,
                "backend_calls": backend.calls(),
                "tree": serde_json::from_str::<serde_json::Value>(&tree_to_json(&plan.tree)).expect("tree json")["root"],
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
        ReportFormat::Text | ReportFormat::Markdown => {
            writeln!(out, "goal: {}", goal_text(&goal))?;
            if let Some(r) = &exchange.reasoning {
                writeln!(out, "reasoning: {r}")?;
            }
            writeln!(out, "expansions: {}", plan.expansions)?;
            write!(out, "{}", to_dot(&plan.tree))?;
        }
    }
    Ok(Exit::Ok)
}

fn goal_text(g: &GoalSpec) -> String {
    g.conjuncts().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" & ")
}

/// What a run reduces to when comparing repeats.
#[derive(Debug, PartialEq)]
struct RunDigest {
    outcome: String,
    rounds: usize,
    tree: String,
}

fn outcome_exit(o: &Outcome) -> Exit {
    match o {
        Outcome::Success => Exit::Ok,
        Outcome::Exhausted(_) => Exit::Exhausted,
        Outcome::Unsolvable(_) => Exit::Unsolvable,
    }
}

fn run_once(a: &RunArgs, scenario: &Scenario, start: Option<&BehaviorTree>) -> Result<(RunReport, usize)> {
    let common = &a.common;
    let config = common.resolver_config();
    let backend = Counting::new(backend_for(common, scenario)?);
    let report = match start {
        Some(tree) => {
            let goal = scenario
                .oracle
                .goal
                .as_deref()
                .and_then(|g| parse_conjunction(g).ok())
                .and_then(|g| GoalSpec::new(g).ok());
            let exchange = LlmExchange {
                prompt: PromptSpec::goal(
                    &scenario.domain,
                    &scenario.initial,
                    &scenario.instruction,
                    &scenario.examples,
                ),
                prompt_text: String::new(),
                raw_response: String::new(),
                parsed: None,
                error: None,
                reasoning: None,
            };
            resolve_from_tree(scenario, tree.clone(), goal, exchange, &backend, &config)?
        }
        None => {
            let (goal, exchange) = interpret_goal(scenario, &backend, &config)?;
            resolve_from_tree(scenario, init_tree(&goal), Some(goal), exchange, &backend, &config)?
        }
    };
    Ok((report, backend.calls()))
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> Result<Exit> {
    let scenario = load_scenario(&a.scenario)?;
    let start = match &a.tree {
        Some(p) => Some(parse_tree(&read(p)?).map_err(|e| CliError::new(Exit::Parse, format!("{}: {e}", p.display())))?),
        None => None,
    };
    let common = &a.common;
    let config = common.resolver_config();

    if a.no_resolve {
        let backend = Counting::new(backend_for(common, &scenario)?);
        let tree = match start {
            Some(t) => t,
            None => init_tree(&interpret_goal(&scenario, &backend, &config)?.0),
        };
        let trace = replay(&tree, &scenario, &config)?;
        let planned = plan_from_tree(tree, &scenario.domain, &scenario.initial, &config.plan)?.tree;
        write_tree(common, &planned)?;
        common.write("trace.jsonl", &trace_to_jsonl(&trace, &scenario.id))?;
        return Ok(match (trace.status, trace.failures.first()) {
            (NodeStatus::Success, _) => {
                writeln!(out, "{}: success in {} tick(s)", scenario.id, trace.ticks.len())?;
                Exit::Ok
            }
            (_, Some(f)) => {
                writeln!(out, "{}: failure: {} failed: {}", scenario.id, f.action, f.error_message)?;
                Exit::Exhausted
            }
            (_, None) => {
                let why = if trace.livelock { "the world revisited a state" } else { "the tree failed" };
                writeln!(out, "{}: failure: {why}", scenario.id)?;
                Exit::Exhausted
            }
        });
    }

    let repeat = a.repeat.max(1);
    let mut first: Option<(RunReport, usize, RunDigest)> = None;
    let mut identical = 1;
    for _ in 0..repeat {
        let (report, calls) = run_once(&a, &scenario, start.as_ref())?;
        let digest = RunDigest {
            outcome: format!("{:?}", report.outcome),
            rounds: report.records.len(),
            tree: report.tree.shape(),
        };
        match &first {
            None => first = Some((report, calls, digest)),
            Some((_, _, d)) if *d == digest => identical += 1,
            Some(_) => {}
        }
    }
    let (report, calls, _) = first.expect("at least one run");

    write_tree(common, &report.tree)?;
    common.write("records.json", &records_to_json(&report, &scenario.id))?;
    if let Some(t) = &report.last_trace {
        common.write("trace.jsonl", &trace_to_jsonl(t, &scenario.id))?;
    }
    match common.format {
        ReportFormat::Json => write!(out, "{}", records_to_json(&report, &scenario.id))?,
        _ => {
            write!(out, "{}", run_summary(&report, &scenario.id))?;
            if start.is_some() {
                writeln!(out, "  backend calls from the given tree: {calls}")?;
            }
            if repeat > 1 {
                writeln!(out, "repeat: {identical}/{repeat} runs identical")?;
            }
        }
    }
    if identical != repeat {
        return Err(CliError::new(Exit::Other, "repeated runs disagree"));
    }
    Ok(outcome_exit(&report.outcome))
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> Result<Exit> {
    let common = &a.common;
    let source = common.source(match common.backend {
        // remote runs always leave an audit trail
        BackendChoice::Remote => Some(common.audit_path().unwrap_or_else(|| PathBuf::from("btxp-exchanges.jsonl"))),
        _ => None,
    })?;
    let mut items = match a.suite {
        BenchSuite::Goals => {
            let set = match &a.instructions {
                Some(p) => parse_instructions(&read(p)?, p)?,
                None => library::cafe_instructions(),
            };
            let DomainFile { domain, examples } = load_domain(&set.domain)?;
            for ins in &set.instructions {
                for l in &ins.goal {
                    domain
                        .check_literal(l)
                        .map_err(|e| CliError::new(Exit::Schema, format!("goal of `{}`: {e}", ins.text)))?;
                }
            }
            with_examples(goal_items(&set, &domain), &examples)
        }
        suite => {
            let scenarios = match &a.scenarios {
                Some(p) => load_scenarios(p)?,
                None => library::bundled_scenarios(),
            };
            scenario_items(&scenarios, suite)
        }
    };
    if let Some(f) = &a.filter {
        items.retain(|i| i.scenario.id.contains(f.as_str()));
    }
    let report = run_bench(a.suite, &items, &source, &common.resolver_config(), a.repeat, a.jobs);
    let text = report.render(common.format);
    let ext = match common.format {
        ReportFormat::Text => "txt",
        ReportFormat::Json => "json",
        ReportFormat::Markdown => "md",
    };
    common.write(&format!("bench-{}.{ext}", a.suite.name()), &text)?;
    write!(out, "{text}")?;
    Ok(Exit::Ok)
}

fn verification_text(r: &VerificationReport) -> String {
    let mut s = String::new();
    for c in &r.checks_run {
        let n = r.violations.iter().filter(|v| v.check == *c).count();
        s.push_str(&format!("{:<24}{}\n", c.name(), if n == 0 { "pass".into() } else { format!("{n} violation(s)") }));
    }
    for (c, why) in &r.skipped {
        s.push_str(&format!("{:<24}skipped: {why}\n", c.name()));
    }
    for v in &r.violations {
        match v.node {
            Some(n) => s.push_str(&format!("  [{}] node {n}: {}\n", v.check.name(), v.message)),
            None => s.push_str(&format!("  [{}] {}\n", v.check.name(), v.message)),
        }
    }
    s
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> Result<Exit> {
    let tree = parse_tree(&read(&a.tree)?).map_err(|e| CliError::new(Exit::Parse, format!("{}: {e}", a.tree.display())))?;
    let scenario = a.scenario.as_deref().map(load_scenario).transpose()?;
    let domain = match (&a.domain, &scenario) {
        (Some(d), _) => load_domain(d)?.domain,
        (None, Some(s)) => s.domain.clone(),
        (None, None) => unreachable!("clap requires --domain or --scenario"),
    };
    let goal_text = match (&a.goal, &scenario) {
        (Some(g), _) => g.clone(),
        (None, Some(s)) => s
            .oracle
            .goal
            .clone()
            .ok_or_else(|| CliError::new(Exit::Other, "the scenario has no goal; pass --goal"))?,
        (None, None) => unreachable!("clap requires --goal or --scenario"),
    };
    let lits = parse_conjunction(&goal_text).map_err(|e| CliError::new(Exit::Parse, format!("--goal: {e}")))?;
    let goal = GoalSpec::validated(lits, &domain).map_err(|e| CliError::new(Exit::Parse, format!("--goal: {e}")))?;
    let report = verify_tree(&tree, &domain, &goal, &VerifyConfig::default());
    match a.format {
        ReportFormat::Json => {
            let doc = json!({
                "pass": report.pass(),
                "checks": report.checks_run.iter().map(|c| c.name()).collect::<Vec<_>>(),
                "skipped": report.skipped.iter().map(|(c, why)| json!({ "check": c.name(), "reason": why })).collect::<Vec<_>>(),
                "violations": report.violations.iter().map(|v| json!({
                    "check": v.check.name(),
                    "node": v.node.map(|n| n.0),
                    "message": v.message,
                })).collect::<Vec<_>>(),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
        _ => write!(out, "{}", verification_text(&report))?,
    }
    Ok(if report.pass() { Exit::Ok } else { Exit::Violations })
}

fn cmd_list(a: ListArgs, out: &mut dyn Write) -> Result<Exit> {
    let scenarios = match &a.scenarios {
        Some(p) => load_scenarios(p)?,
        None => library::bundled_scenarios(),
    };
    let width = scenarios.iter().map(|s| s.id.len()).max().unwrap_or(0);
    for s in &scenarios {
        writeln!(out, "{:<width$}  {}", s.id, s.title)?;
    }
    Ok(Exit::Ok)
}
