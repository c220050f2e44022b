//! Benchmark suites. Every trial gets its own backend from the
//! [`BackendSource`] and its own scenario state; trials fan out over a bounded
//! pool of scoped threads and the report is sorted afterwards, so the worker
//! count never changes the output.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use btxp_core::domain::{Domain, Literal, WorldState};
use btxp_core::llm::Role;
use btxp_core::resolver::{interpret_goal, resolve_until_success, Inserted, Outcome, ResolverConfig};
use btxp_core::sim::{OracleAnswers, Scenario};
use serde_json::json;

use crate::backends::{BackendSource, Counting};
use crate::format::{InstructionSet, Tier};
use crate::library::Suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BenchSuite {
    Goals,
    Preconds,
    Params,
}

impl BenchSuite {
    pub fn name(self) -> &'static str {
        match self {
            BenchSuite::Goals => "goals",
            BenchSuite::Preconds => "preconds",
            BenchSuite::Params => "params",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
    Markdown,
}

/// One unit of work: a goal instruction or a scenario run.
#[derive(Debug, Clone)]
pub struct BenchItem {
    /// Rows are grouped by this label.
    pub row: String,
    /// Rows sort by rank first, then label.
    pub rank: u8,
    pub scenario: Scenario,
    /// Ground truth for goal items.
    pub goal: Option<Vec<Literal>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub label: String,
    pub rank: u8,
    pub trials: usize,
    pub successes: usize,
    pub backend_calls: usize,
    /// Distinct failure reasons and resolved values seen in the row.
    pub notes: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchReport {
    pub suite: String,
    pub backend: String,
    pub model: String,
    /// Only set for remote runs, so scripted and oracle reports are reproducible.
    pub timestamp: Option<String>,
    pub repeats: usize,
    pub rows: Vec<BenchRow>,
}

struct Trial {
    item: usize,
    success: bool,
    calls: usize,
    note: Option<String>,
}

pub fn goal_items(set: &InstructionSet, domain: &Domain) -> Vec<BenchItem> {
    set.instructions
        .iter()
        .enumerate()
        .map(|(i, ins)| {
            let answer: Vec<String> = ins.goal.iter().map(Literal::to_string).collect();
            let tier_rank = match ins.tier {
                Tier::Easy => 0,
                Tier::Medium => 1,
                Tier::Hard => 2,
            };
            BenchItem {
                row: ins.tier.name().to_string(),
                rank: tier_rank,
                scenario: Scenario {
                    id: format!("{}-goal-{:02}", set.domain, i + 1),
                    title: ins.text.clone(),
                    domain: domain.clone(),
                    instruction: ins.text.clone(),
                    initial: set.initial.clone(),
                    hidden: WorldState::new(),
                    faults: Vec::new(),
                    oracle: OracleAnswers {
                        goal: Some(answer.join(" & ")),
                        ..OracleAnswers::default()
                    },
                    examples: Vec::new(),
                    expected_rounds: None,
                },
                goal: Some(ins.goal.clone()),
            }
        })
        .collect()
}

pub fn scenario_items(scenarios: &[Scenario], suite: BenchSuite) -> Vec<BenchItem> {
    let want = match suite {
        BenchSuite::Params => Suite::Parameters,
        _ => Suite::Preconditions,
    };
    scenarios
        .iter()
        .filter(|s| Suite::of(&s.id) == want)
        .map(|s| BenchItem {
            row: s.id.clone(),
            rank: 0,
            scenario: s.clone(),
            goal: None,
        })
        .collect()
}

fn sorted(lits: &[Literal]) -> Vec<String> {
    let mut v: Vec<String> = lits.iter().map(Literal::to_string).collect();
    v.sort();
    v
}

fn run_trial(item: &BenchItem, source: &BackendSource, config: &ResolverConfig) -> (bool, usize, Option<String>) {
    let backend = Counting::new(source.fresh(&item.scenario));
    let (success, note) = match &item.goal {
        Some(truth) => match interpret_goal(&item.scenario, &backend, config) {
            Ok((g, _)) if sorted(g.conjuncts()) == sorted(truth) => (true, None),
            Ok((g, _)) => (false, Some(format!("{}: got {}", item.scenario.id, sorted(g.conjuncts()).join(" & ")))),
            Err(e) => (false, Some(format!("{}: {e}", item.scenario.id))),
        },
        None => match resolve_until_success(&item.scenario, &backend, config) {
            Ok(r) => {
                let values: Vec<String> = r
                    .records
                    .iter()
                    .flat_map(|rec| &rec.inserted)
                    .filter_map(|i| match i {
                        Inserted::Parameter(p) => Some(format!("{} = {}", p.slot, p.value)),
                        Inserted::Precondition(_) => None,
                    })
                    .collect();
                match r.outcome {
                    Outcome::Success if values.is_empty() => (true, None),
                    Outcome::Success => (true, Some(values.join(", "))),
                    Outcome::Exhausted(why) => (false, Some(why)),
                    Outcome::Unsolvable(l) => (false, Some(format!("no achiever for {l}"))),
                }
            }
            Err(e) => (false, Some(e.to_string())),
        },
    };
    (success, backend.calls(), note)
}

pub fn run_bench(
    suite: BenchSuite,
    items: &[BenchItem],
    source: &BackendSource,
    config: &ResolverConfig,
    repeats: usize,
    jobs: usize,
) -> BenchReport {
    let work: Vec<usize> = (0..items.len()).flat_map(|i| std::iter::repeat(i).take(repeats)).collect();
    let next = AtomicUsize::new(0);
    let trials = Mutex::new(Vec::with_capacity(work.len()));
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, work.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&item) = work.get(k) else { break };
                let (success, calls, note) = run_trial(&items[item], source, config);
                log::debug!("{} trial done: success={success}", items[item].scenario.id);
                trials.lock().unwrap_or_else(|e| e.into_inner()).push(Trial {
                    item,
                    success,
                    calls,
                    note,
                });
            });
        }
    });

    let mut rows: Vec<BenchRow> = Vec::new();
    for t in trials.into_inner().unwrap_or_else(|e| e.into_inner()) {
        let item = &items[t.item];
        let row = match rows.iter_mut().find(|r| r.label == item.row) {
            Some(r) => r,
            None => {
                rows.push(BenchRow {
                    label: item.row.clone(),
                    rank: item.rank,
                    trials: 0,
                    successes: 0,
                    backend_calls: 0,
                    notes: BTreeSet::new(),
                });
                rows.last_mut().expect("just pushed")
            }
        };
        row.trials += 1;
        row.successes += usize::from(t.success);
        row.backend_calls += t.calls;
        row.notes.extend(t.note);
    }
    rows.sort_by(|a, b| (a.rank, &a.label).cmp(&(b.rank, &b.label)));

    let remote = matches!(source, BackendSource::Remote(_));
    BenchReport {
        suite: suite.name().to_string(),
        backend: format!("{:?}", source.choice()).to_lowercase(),
        model: config.model.clone(),
        timestamp: remote.then(|| {
            time::OffsetDateTime::now_utc()
                .format(&time::format_description::well_known::Rfc3339)
                .unwrap_or_default()
        }),
        repeats,
        rows,
    }
}

fn percent(s: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        100.0 * s as f64 / n as f64
    }
}

impl BenchReport {
    pub fn totals(&self) -> (usize, usize, usize) {
        self.rows.iter().fold((0, 0, 0), |(s, n, c), r| {
            (s + r.successes, n + r.trials, c + r.backend_calls)
        })
    }

    fn header(&self) -> String {
        let mut h = format!("suite {} | backend {}", self.suite, self.backend);
        if !self.model.is_empty() {
            h.push_str(&format!(" | model {}", self.model));
        }
        if let Some(t) = &self.timestamp {
            h.push_str(&format!(" | {t}"));
        }
        h.push_str(&format!(" | {} repeat(s)", self.repeats));
        h
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.text(),
            ReportFormat::Json => self.json(),
            ReportFormat::Markdown => self.markdown(),
        }
    }

    fn text(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(5).max(5);
        for r in &self.rows {
            out.push_str(&format!(
                "{:<width$}  {:>3}/{:<3} {:>6.1}%  calls {}\n",
                r.label,
                r.successes,
                r.trials,
                percent(r.successes, r.trials),
                r.backend_calls
            ));
            for n in &r.notes {
                out.push_str(&format!("{:<width$}    {n}\n", ""));
            }
        }
        let (s, n, c) = self.totals();
        out.push_str(&format!(
            "{:<width$}  {s:>3}/{n:<3} {:>6.1}%  calls {c}\n",
            "total",
            percent(s, n)
        ));
        out
    }

    fn markdown(&self) -> String {
        let mut out = format!("**{}**\n\n", self.header());
        let first = if self.suite == "goals" { "Difficulty" } else { "Scenario" };
        out.push_str(&format!("| {first} | Success | Rate (%) | Backend calls |\n|---|---|---|---|\n"));
        for r in &self.rows {
            out.push_str(&format!(
                "| {} | {}/{} | {:.1} | {} |\n",
                r.label,
                r.successes,
                r.trials,
                percent(r.successes, r.trials),
                r.backend_calls
            ));
        }
        let (s, n, c) = self.totals();
        out.push_str(&format!("| total | {s}/{n} | {:.1} | {c} |\n", percent(s, n)));
        out
    }

    fn json(&self) -> String {
        let doc = json!({
            "schema": "btxp-bench/1",
            "suite": self.suite,
            "backend": self.backend,
            "model": self.model,
            "timestamp": self.timestamp,
            "repeats": self.repeats,
            "rows": self.rows.iter().map(|r| json!({
                "label": r.label,
                "trials": r.trials,
                "successes": r.successes,
                "rate": percent(r.successes, r.trials),
                "backend_calls": r.backend_calls,
                "notes": r.notes,
            })).collect::<Vec<_>>(),
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("bench json");
        s.push('\n');
        s
    }
}

/// Gives every item the goal-interpretation examples from `examples`.
pub fn with_examples(mut items: Vec<BenchItem>, examples: &[btxp_core::llm::PromptExample]) -> Vec<BenchItem> {
    for i in &mut items {
        i.scenario.examples = examples.iter().filter(|e| e.role == Role::GoalInterpretation).cloned().collect();
    }
    items
}
