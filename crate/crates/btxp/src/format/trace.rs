//! Execution traces as JSON lines. The first line is a header, then one
//! record per tick, then an end record:
//!
//! ```text
//! {"schema":"btxp-trace/1","scenario":"fig3"}
//! {"tick":0,"status":"running","visited":[[0,"running"],[1,"failure"]],"actions":["grasp(red_cube)"],"failures":[]}
//! {"end":true,"status":"success","livelock":false,"ticks":3,"final_state":["on(blue_cube, green_cube)"]}
//! ```

use btxp_core::bt::NodeStatus;
use btxp_core::sim::{ExecutionTrace, FailureEvent, Phase};
use serde_json::{json, Value};

pub const TRACE_SCHEMA: &str = "btxp-trace/1";

pub(crate) fn status_name(s: NodeStatus) -> &'static str {
    match s {
        NodeStatus::Success => "success",
        NodeStatus::Failure => "failure",
        NodeStatus::Running => "running",
    }
}

pub(crate) fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Planning => "planning",
        Phase::Execution => "execution",
    }
}

pub(crate) fn failure_json(f: &FailureEvent) -> Value {
    json!({
        "phase": phase_name(f.phase),
        "node": f.action_id.0,
        "action": f.action.to_string(),
        "message": f.error_message,
        "rule": f.rule,
        "state": f.world_snapshot.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
    })
}

pub fn trace_to_jsonl(trace: &ExecutionTrace, scenario: &str) -> String {
    let mut out = String::new();
    let mut line = |v: Value| {
        out.push_str(&v.to_string());
        out.push('\n');
    };
    line(json!({ "schema": TRACE_SCHEMA, "scenario": scenario }));
    for (i, t) in trace.ticks.iter().enumerate() {
        let visited: Vec<Value> = t.entries.iter().map(|e| json!([e.id.0, status_name(e.status)])).collect();
        let actions: Vec<String> = trace
            .actions
            .iter()
            .filter(|a| a.tick == i)
            .map(|a| a.action.to_string())
            .collect();
        // execution stops at the first failure, so it belongs to the last tick
        let failures: Vec<Value> = if i + 1 == trace.ticks.len() {
            trace.failures.iter().map(failure_json).collect()
        } else {
            Vec::new()
        };
        line(json!({
            "tick": i,
            "status": status_name(t.status),
            "visited": visited,
            "actions": actions,
            "failures": failures,
        }));
    }
    line(json!({
        "end": true,
        "status": status_name(trace.status),
        "livelock": trace.livelock,
        "ticks": trace.ticks.len(),
        "final_state": trace.final_visible.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
    }));
    out
}
