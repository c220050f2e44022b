//! Failure resolution: ask the backend what was missing, patch the tree and
//! let the planner expand the patch.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::bt::{BehaviorTree, NodeId, NodeKind, NodeStatus, TreeError, TreeNode};
use crate::domain::{Domain, Literal, ParamKind};
use crate::llm::{
    build_prompt, parse_goal_response, parse_param_response, parse_precondition_response, Backend,
    BackendError, CompletionSettings, LlmError, LlmExchange, ParamRequest, ParamValue, Parsed,
    PromptExample, PromptSpec,
};
use crate::planner::{init_tree, plan_from_tree, GoalSpec, PlanConfig, PlanError};
use crate::sim::{execute_in, ExecutionTrace, FaultFilter, Scenario, SimConfig, SimError};

pub use crate::sim::{FailureEvent, Phase};

#[derive(Debug, Clone, PartialEq)]
pub struct ResolverConfig {
    pub max_resolution_rounds: usize,
    pub plan: PlanConfig,
    pub max_sim_ticks: usize,
    /// Check visible-only fault rules in simulation before executing.
    pub planning_phase_check: bool,
    pub model: String,
}

impl Default for ResolverConfig {
    fn default() -> Self {
        ResolverConfig {
            max_resolution_rounds: 8,
            plan: PlanConfig::default(),
            max_sim_ticks: 10_000,
            planning_phase_check: true,
            model: String::new(),
        }
    }
}

/// What a prompt needs beyond the failure itself.
#[derive(Debug, Clone, Copy)]
pub struct PromptContext<'a> {
    pub domain: &'a Domain,
    pub instruction: &'a str,
    pub examples: &'a [PromptExample],
    pub scenario_id: Option<&'a str>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Inserted {
    Precondition(Literal),
    Parameter(ParamValue),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    Parse(LlmError),
    /// Every suggested literal is already a precondition of the action.
    Duplicate(Vec<Literal>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionRecord {
    pub event: FailureEvent,
    pub exchange: LlmExchange,
    pub inserted: Vec<Inserted>,
    /// Ids of inserted condition leaves, or of the actions a value was bound on.
    pub touched: Vec<NodeId>,
    pub rejection: Option<Rejection>,
    pub tree_before: BehaviorTree,
    pub tree_after: BehaviorTree,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ResolveError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("answer rejected")]
    Rejected(Box<ResolutionRecord>),
    #[error("planning after the fix failed: {error}")]
    Plan {
        error: PlanError,
        record: Box<ResolutionRecord>,
    },
    #[error("invalid prompt: {0}")]
    Prompt(LlmError),
    #[error("event does not match the tree: {0}")]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone)]
pub struct Resolution {
    pub tree: BehaviorTree,
    pub record: ResolutionRecord,
}

fn exchange(
    spec: PromptSpec,
    backend: &dyn Backend,
    settings: &CompletionSettings,
) -> Result<LlmExchange, ResolveError> {
    let prompt_text = build_prompt(&spec).map_err(ResolveError::Prompt)?;
    let raw_response = backend.complete(&prompt_text, settings)?;
    Ok(LlmExchange {
        prompt: spec,
        prompt_text,
        raw_response,
        parsed: None,
        error: None,
        reasoning: None,
    })
}

fn settings(role: crate::llm::Role, ctx: &PromptContext<'_>, config: &ResolverConfig) -> CompletionSettings {
    CompletionSettings {
        role,
        scenario: ctx.scenario_id.map(str::to_string),
        model: config.model.clone(),
        temperature: 0.0,
    }
}

/// Headlines left of `action_id` in its enclosing Sequence.
fn existing_preconditions(tree: &BehaviorTree, action_id: NodeId) -> Vec<Literal> {
    match tree.parent(action_id) {
        Some(p) if p.kind == NodeKind::Sequence => p
            .children
            .iter()
            .take_while(|c| c.id != action_id)
            .filter_map(TreeNode::headline)
            .cloned()
            .collect(),
        _ => Vec::new(),
    }
}

/// One failure-resolution round: query, insert the suggested conditions in
/// front of the failing action, and plan from the failure snapshot.
pub fn resolve(
    tree: &BehaviorTree,
    event: &FailureEvent,
    ctx: &PromptContext<'_>,
    backend: &dyn Backend,
    config: &ResolverConfig,
) -> Result<Resolution, ResolveError> {
    match tree.node(event.action_id).map(|n| &n.kind) {
        Some(NodeKind::Action(a)) if *a == event.action => {}
        Some(_) => return Err(TreeError::InvalidTarget(event.action_id, "not the failing action").into()),
        None => return Err(TreeError::UnknownNode(event.action_id).into()),
    }
    let spec = PromptSpec::failure(
        ctx.domain,
        &event.world_snapshot,
        ctx.instruction,
        ctx.examples,
        &event.action,
        &event.error_message,
    );
    let mut ex = exchange(spec, backend, &settings(crate::llm::Role::FailureResolution, ctx, config))?;
    let mut record = ResolutionRecord {
        event: event.clone(),
        exchange: ex.clone(),
        inserted: Vec::new(),
        touched: Vec::new(),
        rejection: None,
        tree_before: tree.clone(),
        tree_after: tree.clone(),
    };
    let lits = match parse_precondition_response(&ex.raw_response, ctx.domain) {
        Ok((lits, reasoning)) => {
            ex.reasoning = reasoning;
            ex.parsed = Some(Parsed::Preconditions(lits.clone()));
            lits
        }
        Err(e) => {
            ex.error = Some(e.clone());
            record.exchange = ex;
            record.rejection = Some(Rejection::Parse(e));
            return Err(ResolveError::Rejected(Box::new(record)));
        }
    };
    record.exchange = ex;
    let present = existing_preconditions(tree, event.action_id);
    let mut fresh: Vec<Literal> = Vec::new();
    for l in &lits {
        if !present.contains(l) && !fresh.contains(l) {
            fresh.push(l.clone());
        }
    }
    if fresh.is_empty() {
        record.rejection = Some(Rejection::Duplicate(lits));
        return Err(ResolveError::Rejected(Box::new(record)));
    }
    let mut patched = tree.clone();
    record.touched = patched.insert_preconditions(event.action_id, &fresh)?;
    record.inserted = fresh.into_iter().map(Inserted::Precondition).collect();
    record.tree_after = patched.clone();
    match plan_from_tree(patched, ctx.domain, &event.world_snapshot, &config.plan) {
        Ok(plan) => {
            record.tree_after = plan.tree.clone();
            Ok(Resolution {
                tree: plan.tree,
                record,
            })
        }
        Err(error) => Err(ResolveError::Plan {
            error,
            record: Box::new(record),
        }),
    }
}

/// First action leaf, in preorder, with an unbound value slot.
pub fn find_unbound(tree: &BehaviorTree, domain: &Domain) -> Option<(NodeId, String)> {
    tree.preorder().into_iter().find_map(|n| {
        let a = n.action()?;
        let skill = domain.skill(&a.skill).ok()?;
        a.unbound_slots()
            .find(|s| skill.param(s).is_some_and(|p| !p.is_object()))
            .map(|s| (n.id, s.to_string()))
    })
}

/// Queries a value for `slot` of action `action_id` and binds it on every
/// action leaf with the same unbound slot that agrees on the objects the slot
/// is declared to be about.
pub fn resolve_parameter(
    tree: &BehaviorTree,
    action_id: NodeId,
    slot: &str,
    ctx: &PromptContext<'_>,
    state: &crate::domain::WorldState,
    backend: &dyn Backend,
    config: &ResolverConfig,
) -> Result<Resolution, ResolveError> {
    let action = tree
        .node(action_id)
        .and_then(TreeNode::action)
        .ok_or(TreeError::InvalidTarget(action_id, "not an action leaf"))?
        .clone();
    let decl = ctx
        .domain
        .skill(&action.skill)
        .ok()
        .and_then(|s| s.param(slot))
        .filter(|p| !matches!(p.kind, ParamKind::Object(_)))
        .ok_or(TreeError::InvalidTarget(action_id, "action has no such value slot"))?
        .clone();
    let request = ParamRequest {
        action: action.clone(),
        slot: slot.to_string(),
        kind: decl.kind.clone(),
    };
    let spec = PromptSpec::parameter(ctx.domain, state, ctx.instruction, ctx.examples, request);
    let mut ex = exchange(spec, backend, &settings(crate::llm::Role::ParameterResolution, ctx, config))?;
    let event = FailureEvent {
        phase: Phase::Planning,
        action_id,
        action: action.clone(),
        error_message: format!("Parameter {slot} of {} has no value", action.skill),
        world_snapshot: state.clone(),
        rule: None,
    };
    let mut record = ResolutionRecord {
        event,
        exchange: ex.clone(),
        inserted: Vec::new(),
        touched: Vec::new(),
        rejection: None,
        tree_before: tree.clone(),
        tree_after: tree.clone(),
    };
    let value = match parse_param_response(&ex.raw_response, &decl) {
        Ok((v, reasoning)) => {
            ex.reasoning = reasoning;
            ex.parsed = Some(Parsed::Parameter(v.clone()));
            v
        }
        Err(e) => {
            ex.error = Some(e.clone());
            record.exchange = ex;
            record.rejection = Some(Rejection::Parse(e));
            return Err(ResolveError::Rejected(Box::new(record)));
        }
    };
    record.exchange = ex;
    let context: Vec<(&str, Option<&crate::domain::BindingValue>)> =
        decl.about.iter().map(|p| (p.as_str(), action.value(p))).collect();
    let targets: Vec<NodeId> = tree
        .preorder()
        .into_iter()
        .filter(|n| {
            n.action().is_some_and(|a| {
                a.unbound_slots().any(|s| s == slot)
                    && context.iter().all(|(p, v)| a.value(p) == *v)
            })
        })
        .map(|n| n.id)
        .collect();
    let mut patched = tree.clone();
    for &id in &targets {
        patched.bind_action(id, slot, value.value.clone())?;
    }
    record.touched = targets;
    record.inserted = Vec::from([Inserted::Parameter(value)]);
    record.tree_after = patched.clone();
    Ok(Resolution {
        tree: patched,
        record,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success,
    /// Rounds ran out, or the policy failed without a resolvable action failure.
    Exhausted(String),
    Unsolvable(Literal),
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub goal: Option<GoalSpec>,
    pub goal_exchange: LlmExchange,
    pub tree: BehaviorTree,
    pub records: Vec<ResolutionRecord>,
    pub outcome: Outcome,
    pub backend_calls: usize,
    /// Trace of the last execution on the live world.
    pub last_trace: Option<ExecutionTrace>,
}

impl RunReport {
    /// Rounds that changed the tree.
    pub fn applied_rounds(&self) -> usize {
        self.records.iter().filter(|r| r.rejection.is_none()).count()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error("goal interpretation failed: {error}")]
    Goal {
        error: LlmError,
        exchange: Box<LlmExchange>,
    },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("invalid prompt: {0}")]
    Prompt(LlmError),
}

impl From<ResolveError> for RunError {
    fn from(e: ResolveError) -> Self {
        match e {
            ResolveError::Backend(b) => RunError::Backend(b),
            ResolveError::Prompt(p) => RunError::Prompt(p),
            ResolveError::Tree(t) => RunError::Tree(t),
            ResolveError::Rejected(_) | ResolveError::Plan { .. } => {
                unreachable!("handled by the resolution loop")
            }
        }
    }
}

/// Interprets the scenario instruction with one backend call.
pub fn interpret_goal(
    scenario: &Scenario,
    backend: &dyn Backend,
    config: &ResolverConfig,
) -> Result<(GoalSpec, LlmExchange), RunError> {
    let ctx = PromptContext {
        domain: &scenario.domain,
        instruction: &scenario.instruction,
        examples: &scenario.examples,
        scenario_id: Some(&scenario.id),
    };
    let spec = PromptSpec::goal(&scenario.domain, &scenario.initial, &scenario.instruction, &scenario.examples);
    let mut ex = exchange(spec, backend, &settings(crate::llm::Role::GoalInterpretation, &ctx, config))?;
    match parse_goal_response(&ex.raw_response, &scenario.domain) {
        Ok((g, reasoning)) => {
            ex.reasoning = reasoning;
            ex.parsed = Some(Parsed::Goals(g.clone()));
            Ok((g, ex))
        }
        Err(error) => {
            ex.error = Some(error.clone());
            Err(RunError::Goal {
                error,
                exchange: Box::new(ex),
            })
        }
    }
}

/// The full pipeline on one scenario: interpret the goal, then plan, check,
/// execute and resolve until the policy succeeds or the round budget runs
/// out. The live world carries over between rounds.
pub fn resolve_until_success(
    scenario: &Scenario,
    backend: &dyn Backend,
    config: &ResolverConfig,
) -> Result<RunReport, RunError> {
    let (goal, goal_exchange) = interpret_goal(scenario, backend, config)?;
    resolve_from_tree(scenario, init_tree(&goal), Some(goal), goal_exchange, backend, config)
}

/// The resolution loop starting from an existing tree.
pub fn resolve_from_tree(
    scenario: &Scenario,
    mut tree: BehaviorTree,
    goal: Option<GoalSpec>,
    goal_exchange: LlmExchange,
    backend: &dyn Backend,
    config: &ResolverConfig,
) -> Result<RunReport, RunError> {
    let ctx = PromptContext {
        domain: &scenario.domain,
        instruction: &scenario.instruction,
        examples: &scenario.examples,
        scenario_id: Some(&scenario.id),
    };
    let mut calls = 1;
    let mut records: Vec<ResolutionRecord> = Vec::new();
    let mut visible = scenario.initial.clone();
    let mut hidden = scenario.hidden.clone();
    let mut last_trace = None;
    let report = |tree, records, outcome, calls, last_trace| RunReport {
        goal: goal.clone(),
        goal_exchange: goal_exchange.clone(),
        tree,
        records,
        outcome,
        backend_calls: calls,
        last_trace,
    };
    let exhausted = |n: usize| Outcome::Exhausted(format!("no success after {n} resolution rounds"));
    loop {
        match plan_from_tree(tree.clone(), &scenario.domain, &visible, &config.plan) {
            Ok(p) => tree = p.tree,
            Err(PlanError::Unsolvable(l)) => {
                return Ok(report(tree, records, Outcome::Unsolvable(l), calls, last_trace))
            }
            Err(PlanError::BudgetExceeded { kind, partial }) => {
                let o = Outcome::Exhausted(format!("planning budget exceeded ({kind:?})"));
                return Ok(report(*partial, records, o, calls, last_trace));
            }
            Err(e) => return Err(e.into()),
        }

        if let Some((id, slot)) = find_unbound(&tree, &scenario.domain) {
            if records.len() >= config.max_resolution_rounds {
                let o = exhausted(records.len());
                return Ok(report(tree, records, o, calls, last_trace));
            }
            calls += 1;
            match resolve_parameter(&tree, id, &slot, &ctx, &visible, backend, config) {
                Ok(r) => {
                    tree = r.tree;
                    records.push(r.record);
                }
                Err(ResolveError::Rejected(rec)) => records.push(*rec),
                Err(e) => return Err(e.into()),
            }
            continue;
        }

        let mut trace = None;
        if config.planning_phase_check {
            let cfg = SimConfig {
                max_ticks: config.max_sim_ticks,
                faults: FaultFilter::VisibleOnly,
                phase: Phase::Planning,
            };
            let t = execute_in(&tree, scenario, &visible, &hidden, &cfg)?;
            if !t.failures.is_empty() {
                trace = Some(t);
            }
        }
        let trace = match trace {
            Some(t) => t,
            None => {
                let cfg = SimConfig {
                    max_ticks: config.max_sim_ticks,
                    faults: FaultFilter::All,
                    phase: Phase::Execution,
                };
                let t = execute_in(&tree, scenario, &visible, &hidden, &cfg)?;
                visible = t.final_visible.clone();
                hidden = t.final_hidden.clone();
                t
            }
        };
        let event = trace.failures.first().cloned();
        let status = trace.status;
        last_trace = Some(trace);
        if status == NodeStatus::Success {
            return Ok(report(tree, records, Outcome::Success, calls, last_trace));
        }
        let Some(event) = event else {
            let o = Outcome::Exhausted("policy failed without an action failure".into());
            return Ok(report(tree, records, o, calls, last_trace));
        };
        if records.len() >= config.max_resolution_rounds {
            let o = exhausted(records.len());
            return Ok(report(tree, records, o, calls, last_trace));
        }
        calls += 1;
        match resolve(&tree, &event, &ctx, backend, config) {
            Ok(r) => {
                tree = r.tree;
                records.push(r.record);
            }
            Err(ResolveError::Rejected(rec)) => records.push(*rec),
            Err(ResolveError::Plan { error, record }) => {
                let tree_after = record.tree_after.clone();
                records.push(*record);
                let outcome = match error {
                    PlanError::Unsolvable(l) => Outcome::Unsolvable(l),
                    e => Outcome::Exhausted(e.to_string()),
                };
                return Ok(report(tree_after, records, outcome, calls, last_trace));
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Runs a finished tree on a fresh copy of the scenario with no backend: the
/// planner may still expand it against the initial state, but nothing is
/// asked and nothing is inserted.
pub fn replay(tree: &BehaviorTree, scenario: &Scenario, config: &ResolverConfig) -> Result<ExecutionTrace, RunError> {
    let plan = plan_from_tree(tree.clone(), &scenario.domain, &scenario.initial, &config.plan)?;
    let cfg = SimConfig {
        max_ticks: config.max_sim_ticks,
        faults: FaultFilter::All,
        phase: Phase::Execution,
    };
    Ok(execute_in(&plan.tree, scenario, &scenario.initial, &scenario.hidden, &cfg)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bt::Spec;
    use crate::domain::fixtures::{cube_domain, lit, state};
    use crate::domain::{BindingValue, GroundAction, WorldState};
    use crate::llm::ScriptedBackend;
    use crate::sim::OracleAnswers;
    use alloc::collections::BTreeMap;
    use alloc::vec;

    fn grasp(o: &str) -> GroundAction {
        GroundAction::new("grasp", vec![("obj".into(), Some(BindingValue::Symbol(o.into())))])
    }

    fn scripted(pairs: &[(&str, &[&str])]) -> ScriptedBackend {
        ScriptedBackend::new(
            pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect()))
                .collect::<BTreeMap<_, _>>(),
        )
    }

    fn event(tree: &BehaviorTree, id: NodeId, snapshot: WorldState) -> FailureEvent {
        FailureEvent {
            phase: Phase::Execution,
            action_id: id,
            action: tree.node(id).unwrap().action().unwrap().clone(),
            error_message: "No collision free path found".into(),
            world_snapshot: snapshot,
            rule: None,
        }
    }

    #[test]
    fn precondition_already_true_is_inserted_without_expansion() {
        let d = cube_domain(&["blue_cube"]);
        let s = state(&["on(blue_cube, table)"]);
        let tree = BehaviorTree::new(Spec::Sequence(vec![Spec::Action(grasp("blue_cube"))]));
        let b = scripted(&[("precondition", &["ANSWER: ~on(any_object, blue_cube)"])]);
        let ctx = PromptContext { domain: &d, instruction: "", examples: &[], scenario_id: None };
        let r = resolve(&tree, &event(&tree, NodeId(1), s), &ctx, &b, &ResolverConfig::default()).unwrap();
        assert_eq!(r.tree.shape(), "->[~on(any_object, blue_cube)?, grasp(blue_cube)!]");
        assert_eq!(r.record.touched.len(), 1);
    }

    #[test]
    fn duplicate_suggestion_rejected() {
        let d = cube_domain(&["blue_cube"]);
        let s = state(&["on(blue_cube, table)"]);
        let tree = BehaviorTree::new(Spec::Sequence(vec![
            Spec::Condition(lit("~grasped(any_object)")),
            Spec::Action(grasp("blue_cube")),
        ]));
        let b = scripted(&[("precondition", &["ANSWER: ~grasped(any_object)"])]);
        let ctx = PromptContext { domain: &d, instruction: "", examples: &[], scenario_id: None };
        match resolve(&tree, &event(&tree, NodeId(2), s), &ctx, &b, &ResolverConfig::default()) {
            Err(ResolveError::Rejected(rec)) => {
                assert!(matches!(rec.rejection, Some(Rejection::Duplicate(_))))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn garbage_answers_exhaust_the_round_budget() {
        let d = cube_domain(&["blue_cube", "red_cube"]);
        let sc = Scenario {
            id: "g".into(),
            title: String::new(),
            domain: d,
            instruction: "pick up the blue cube".into(),
            initial: state(&["on(red_cube, blue_cube)", "on(blue_cube, table)"]),
            hidden: WorldState::new(),
            faults: vec![crate::sim::FaultRule {
                id: "blocked".into(),
                matcher: "grasp(?x)".parse().unwrap(),
                guard: vec![lit("on(any_object, ?x)")],
                hidden_guard: vec![],
                clears_when: vec![],
                mode: crate::sim::FaultMode::Fail { message: "No collision free path found".into() },
            }],
            oracle: OracleAnswers::default(),
            examples: vec![],
            expected_rounds: None,
        };
        let b = scripted(&[
            ("g/goal", &["ANSWER: grasped(blue_cube)"]),
            ("g/precondition", &["I think the cube is blocked"]),
        ]);
        let cfg = ResolverConfig { max_resolution_rounds: 3, ..ResolverConfig::default() };
        let r = resolve_until_success(&sc, &b, &cfg).unwrap();
        assert!(matches!(r.outcome, Outcome::Exhausted(_)));
        assert_eq!(r.records.len(), 3);
        assert!(r
            .records
            .iter()
            .all(|rec| matches!(rec.rejection, Some(Rejection::Parse(LlmError::Format { .. })))));
        assert_eq!(r.backend_calls, 4);
        assert_eq!(b.calls(), 4);
    }
}
