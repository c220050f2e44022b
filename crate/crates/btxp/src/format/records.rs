//! The resolution log of one run:
//!
//! ```json
//! {
//!   "schema": "btxp-records/1",
//!   "scenario": "fig3",
//!   "outcome": "success",
//!   "backend_calls": 2,
//!   "goal": { "prompt": "...", "response": "...", "goal": ["on(blue_cube, green_cube)"] },
//!   "rounds": [ { "round": 1, "phase": "planning", "action": "grasp(blue_cube)", ... } ],
//!   "tree": { ...tree file root... }
//! }
//! ```

use btxp_core::llm::LlmExchange;
use btxp_core::resolver::{Inserted, Outcome, Rejection, ResolutionRecord, RunReport};
use serde_json::{json, Value};

use super::trace::phase_name;
use super::tree_to_json;

pub const RECORDS_SCHEMA: &str = "btxp-records/1";

pub fn outcome_name(o: &Outcome) -> &'static str {
    match o {
        Outcome::Success => "success",
        Outcome::Exhausted(_) => "exhausted",
        Outcome::Unsolvable(_) => "unsolvable",
    }
}

fn exchange_json(e: &LlmExchange) -> Value {
    json!({
        "prompt": e.prompt_text,
        "response": e.raw_response,
        "reasoning": e.reasoning,
        "error": e.error.as_ref().map(|e| e.to_string()),
    })
}

fn record_json(round: usize, r: &ResolutionRecord) -> Value {
    let inserted: Vec<String> = r
        .inserted
        .iter()
        .map(|i| match i {
            Inserted::Precondition(l) => l.to_string(),
            Inserted::Parameter(p) => format!("{} = {}", p.slot, p.value),
        })
        .collect();
    let rejection = r.rejection.as_ref().map(|x| match x {
        Rejection::Parse(e) => format!("parse: {e}"),
        Rejection::Duplicate(ls) => format!(
            "duplicate: {}",
            ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" & ")
        ),
    });
    json!({
        "round": round,
        "phase": phase_name(r.event.phase),
        "action": r.event.action.to_string(),
        "message": r.event.error_message,
        "rule": r.event.rule,
        "exchange": exchange_json(&r.exchange),
        "inserted": inserted,
        "touched": r.touched.iter().map(|n| n.0).collect::<Vec<_>>(),
        "rejection": rejection,
        "tree_before": r.tree_before.shape(),
        "tree_after": r.tree_after.shape(),
    })
}

pub fn records_to_json(report: &RunReport, scenario: &str) -> String {
    let tree: Value = serde_json::from_str(&tree_to_json(&report.tree)).expect("tree json");
    let mut goal = exchange_json(&report.goal_exchange);
    goal["goal"] = json!(report
        .goal
        .as_ref()
        .map(|g| g.conjuncts().iter().map(|l| l.to_string()).collect::<Vec<_>>()));
    let detail = match &report.outcome {
        Outcome::Success => None,
        Outcome::Exhausted(why) => Some(why.clone()),
        Outcome::Unsolvable(l) => Some(format!("no achiever for `{l}`")),
    };
    let doc = json!({
        "schema": RECORDS_SCHEMA,
        "scenario": scenario,
        "outcome": outcome_name(&report.outcome),
        "detail": detail,
        "backend_calls": report.backend_calls,
        "goal": goal,
        "rounds": report.records.iter().enumerate().map(|(i, r)| record_json(i + 1, r)).collect::<Vec<_>>(),
        "tree": tree["root"],
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("records json");
    s.push('\n');
    s
}

/// One human-readable paragraph per run.
pub fn run_summary(report: &RunReport, scenario: &str) -> String {
    let mut out = format!(
        "{scenario}: {} after {} round(s), {} backend call(s)\n",
        outcome_name(&report.outcome),
        report.records.len(),
        report.backend_calls
    );
    if let Some(g) = &report.goal {
        let g: Vec<String> = g.conjuncts().iter().map(|l| l.to_string()).collect();
        out.push_str(&format!("  goal: {}\n", g.join(" & ")));
    }
    for (i, r) in report.records.iter().enumerate() {
        out.push_str(&format!(
            "  round {} ({}): {} failed: {}\n",
            i + 1,
            phase_name(r.event.phase),
            r.event.action,
            r.event.error_message
        ));
        for ins in &r.inserted {
            match ins {
                Inserted::Precondition(l) => out.push_str(&format!("    + precondition {l}\n")),
                Inserted::Parameter(p) => out.push_str(&format!("    + {} = {}\n", p.slot, p.value)),
            }
        }
        match &r.rejection {
            Some(Rejection::Parse(e)) => out.push_str(&format!("    rejected: {e}\n")),
            Some(Rejection::Duplicate(_)) => out.push_str("    rejected: already a precondition\n"),
            None => {}
        }
    }
    match &report.outcome {
        Outcome::Exhausted(why) => out.push_str(&format!("  stopped: {why}\n")),
        Outcome::Unsolvable(l) => out.push_str(&format!("  no skill achieves {l}\n")),
        Outcome::Success => {}
    }
    out
}
