//! Deterministic scenario execution with fault injection.
//!
//! The executor ticks a tree against the visible world, applies skill effects
//! when actions complete and consults fault rules that may look at a hidden
//! state the planner never sees.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::bt::{tick, BehaviorTree, EvaluationError, NodeId, NodeStatus, TickContext, TickTrace};
use crate::domain::{
    Atom,
    parse_action_call, ActionCall, BindingValue, Domain, DomainError, GroundAction, Literal,
    SyntaxError, Term, ValueToken, WorldState,
};
use crate::llm::{OracleParam, OraclePrecondition, PromptExample};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternArg {
    Any,
    Capture(String),
    Exact(String),
}

/// Matches actions by skill name and a prefix of positional arguments:
/// `_` matches anything, `?x` captures the value, other tokens must match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionPattern {
    pub skill: String,
    pub args: Vec<PatternArg>,
}

impl FromStr for ActionPattern {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let call = parse_action_call(s)?;
        Ok(ActionPattern {
            skill: call.skill,
            args: call
                .args
                .into_iter()
                .map(|a| match a {
                    ValueToken::Symbol(s) if s == "_" => PatternArg::Any,
                    ValueToken::Symbol(s) => PatternArg::Exact(s),
                    ValueToken::Capture(c) => PatternArg::Capture(c),
                    ValueToken::Quantity { value, unit } => {
                        PatternArg::Exact(BindingValue::Quantity { value, unit }.to_string())
                    }
                })
                .collect(),
        })
    }
}

impl fmt::Display for ActionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.skill)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match a {
                PatternArg::Any => f.write_str("_")?,
                PatternArg::Capture(c) => write!(f, "?{c}")?,
                PatternArg::Exact(s) => f.write_str(s)?,
            }
        }
        f.write_str(")")
    }
}

impl ActionPattern {
    fn match_values(&self, skill: &str, values: &[String]) -> Option<BTreeMap<String, String>> {
        if skill != self.skill || self.args.len() > values.len() {
            return None;
        }
        let mut captures = BTreeMap::new();
        for (p, v) in self.args.iter().zip(values) {
            match p {
                PatternArg::Any => {}
                PatternArg::Exact(e) => {
                    if e != v {
                        return None;
                    }
                }
                PatternArg::Capture(c) => {
                    if captures.insert(c.clone(), v.clone()).is_some_and(|prev| prev != *v) {
                        return None;
                    }
                }
            }
        }
        Some(captures)
    }

    pub fn match_action(&self, action: &GroundAction) -> Option<BTreeMap<String, String>> {
        let values: Vec<String> = action
            .args
            .iter()
            .map(|(slot, v)| match v {
                Some(v) => v.to_string(),
                None => format!("?{slot}"),
            })
            .collect();
        self.match_values(&action.skill, &values)
    }

    pub fn match_call(&self, call: &ActionCall) -> Option<BTreeMap<String, String>> {
        let values: Vec<String> = call
            .args
            .iter()
            .map(|a| match a {
                ValueToken::Symbol(s) => s.clone(),
                ValueToken::Capture(c) => format!("?{c}"),
                ValueToken::Quantity { value, unit } => {
                    BindingValue::Quantity { value: *value, unit: unit.clone() }.to_string()
                }
            })
            .collect();
        self.match_values(&call.skill, &values)
    }

    pub fn captures(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|a| match a {
            PatternArg::Capture(c) => Some(c.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FaultMode {
    /// The action fails with this message.
    Fail { message: String },
    /// The action completes without effects; the postcondition check then
    /// reports the failure.
    SuppressEffects,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultRule {
    pub id: String,
    pub matcher: ActionPattern,
    /// Visible-state literals; may use the matcher's captures.
    pub guard: Vec<Literal>,
    /// Hidden-state literals; may use the matcher's captures.
    pub hidden_guard: Vec<Literal>,
    /// Once all of these hold in the visible state the rule stays quiet.
    pub clears_when: Vec<Literal>,
    pub mode: FaultMode,
}

fn bind(lit: &Literal, captures: &BTreeMap<String, String>) -> Option<Literal> {
    let mut l = lit.clone();
    for a in &mut l.args {
        if let Term::Param(p) = a {
            *a = Term::Object(captures.get(p)?.clone());
        }
    }
    Some(l)
}

impl FaultRule {
    /// True when the guard references only the visible state.
    pub fn visible_only(&self) -> bool {
        self.hidden_guard.is_empty()
    }

    /// Whether the rule fires for `action` in the given states.
    pub fn fires(
        &self,
        domain: &Domain,
        action: &GroundAction,
        visible: &WorldState,
        hidden: &WorldState,
    ) -> Result<bool, DomainError> {
        let Some(captures) = self.matcher.match_action(action) else {
            return Ok(false);
        };
        let all = |lits: &[Literal], hidden_side: bool| -> Result<bool, DomainError> {
            for l in lits {
                let Some(g) = bind(l, &captures) else {
                    return Ok(false);
                };
                let ok = if hidden_side {
                    hidden.satisfies(&g)
                } else {
                    domain.holds(visible, &g)?
                };
                if !ok {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        if !self.clears_when.is_empty() && all(&self.clears_when, false)? {
            return Ok(false);
        }
        Ok(all(&self.guard, false)? && all(&self.hidden_guard, true)?)
    }
}

/// Ground truth the oracle backend answers from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleAnswers {
    /// Goal answer text, e.g. `on(blue_cube, green_cube)`.
    pub goal: Option<String>,
    pub preconditions: Vec<OraclePrecondition>,
    pub params: Vec<OracleParam>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub title: String,
    pub domain: Domain,
    pub instruction: String,
    pub initial: WorldState,
    pub hidden: WorldState,
    pub faults: Vec<FaultRule>,
    pub oracle: OracleAnswers,
    pub examples: Vec<PromptExample>,
    /// Resolution rounds the scenario is expected to need, if pinned.
    pub expected_rounds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("fault rule `{0}` has no oracle answer")]
    UncoveredFault(String),
    #[error("fault rule `{rule}`: {reason}")]
    InvalidRule { rule: String, reason: String },
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        for a in self.initial.iter() {
            self.domain.check_literal(&a.literal())?;
        }
        for r in &self.faults {
            let caps: BTreeSet<&str> = r.matcher.captures().collect();
            self.domain.skill(&r.matcher.skill)?;
            for l in r.guard.iter().chain(&r.hidden_guard).chain(&r.clears_when) {
                for a in &l.args {
                    if let Term::Param(p) = a {
                        if !caps.contains(p.as_str()) {
                            return Err(ScenarioError::InvalidRule {
                                rule: r.id.clone(),
                                reason: format!("`?{p}` is not captured by `{}`", r.matcher),
                            });
                        }
                    }
                }
            }
            if let FaultMode::Fail { message } = &r.mode {
                if message.trim().is_empty() {
                    return Err(ScenarioError::InvalidRule {
                        rule: r.id.clone(),
                        reason: "empty error message".into(),
                    });
                }
            }
            let covered = self.oracle.preconditions.iter().any(|p| {
                p.action.skill == r.matcher.skill
                    && match &r.mode {
                        FaultMode::Fail { message } => p.message == *message,
                        FaultMode::SuppressEffects => p.message.starts_with("Postcondition"),
                    }
            });
            if !covered {
                return Err(ScenarioError::UncoveredFault(r.id.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Planning,
    Execution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FailureEvent {
    pub phase: Phase,
    pub action_id: NodeId,
    pub action: GroundAction,
    pub error_message: String,
    /// Visible state when the action failed.
    pub world_snapshot: WorldState,
    /// Fault rule that caused it, if any.
    pub rule: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActionRecord {
    pub tick: usize,
    pub node: NodeId,
    pub action: GroundAction,
    pub before: WorldState,
    pub after: WorldState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    pub ticks: Vec<TickTrace>,
    pub actions: Vec<ActionRecord>,
    pub failures: Vec<FailureEvent>,
    pub status: NodeStatus,
    /// Set when execution stopped because the world revisited a state.
    pub livelock: bool,
    pub final_visible: WorldState,
    pub final_hidden: WorldState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultFilter {
    All,
    /// Only rules whose guard is visible-only; the hidden state is ignored.
    VisibleOnly,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub max_ticks: usize,
    pub faults: FaultFilter,
    pub phase: Phase,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            max_ticks: 10_000,
            faults: FaultFilter::All,
            phase: Phase::Execution,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("tree does not match the scenario domain: {0}")]
    DomainMismatch(#[from] EvaluationError),
    #[error("tick budget exhausted after {} ticks", .0.ticks.len())]
    TickBudgetExceeded(Box<ExecutionTrace>),
}

/// `Postcondition IsClean_Floor not met after Sweep action completion`
pub fn postcondition_message(lit: &Literal, skill: &str) -> String {
    let mut name = String::new();
    if lit.negated {
        name.push_str("Not");
    }
    name.push_str(&lit.predicate);
    for a in &lit.args {
        name.push('_');
        name.push_str(&a.to_string());
    }
    format!("Postcondition {name} not met after {skill} action completion")
}

struct SimCtx<'a> {
    scenario: &'a Scenario,
    config: &'a SimConfig,
    visible: WorldState,
    hidden: WorldState,
    progress: BTreeMap<NodeId, u32>,
    tick_no: usize,
    acted: bool,
    actions: Vec<ActionRecord>,
    failure: Option<FailureEvent>,
}

impl SimCtx<'_> {
    fn fail(&mut self, id: NodeId, action: &GroundAction, message: String, rule: Option<String>) -> NodeStatus {
        self.progress.remove(&id);
        self.failure = Some(FailureEvent {
            phase: self.config.phase,
            action_id: id,
            action: action.clone(),
            error_message: message,
            world_snapshot: self.visible.clone(),
            rule,
        });
        NodeStatus::Failure
    }
}

impl TickContext for SimCtx<'_> {
    fn condition(&mut self, id: NodeId, lit: &Literal) -> Result<bool, EvaluationError> {
        self.scenario
            .domain
            .holds(&self.visible, lit)
            .map_err(|source| EvaluationError::Domain { node: id, source })
    }

    fn action(&mut self, id: NodeId, action: &GroundAction) -> Result<NodeStatus, EvaluationError> {
        if self.failure.is_some() {
            return Ok(NodeStatus::Failure);
        }
        let err = |source| EvaluationError::Domain { node: id, source };
        let domain = &self.scenario.domain;
        let skill = domain.skill(&action.skill).map_err(err)?;
        if let Some(slot) = action.unbound_slots().next() {
            let msg = format!("Parameter {slot} of {} has no value", action.skill);
            return Ok(self.fail(id, action, msg, None));
        }
        let mut suppressed = false;
        for r in &self.scenario.faults {
            let active = match self.config.faults {
                FaultFilter::All => true,
                FaultFilter::VisibleOnly => r.visible_only(),
                FaultFilter::None => false,
            };
            if !active || !r.fires(domain, action, &self.visible, &self.hidden).map_err(err)? {
                continue;
            }
            match &r.mode {
                FaultMode::Fail { message } => {
                    return Ok(self.fail(id, action, message.clone(), Some(r.id.clone())))
                }
                FaultMode::SuppressEffects => suppressed = true,
            }
        }
        for p in domain.preconditions_of(action).map_err(err)? {
            if !domain.holds(&self.visible, &p).map_err(err)? {
                let msg = format!("Precondition {p} not met before {} action start", action.skill);
                return Ok(self.fail(id, action, msg, None));
            }
        }
        let done = self.progress.get(&id).copied().unwrap_or(0) + 1;
        if done < skill.duration {
            self.progress.insert(id, done);
            return Ok(NodeStatus::Running);
        }
        self.progress.remove(&id);
        let before = self.visible.clone();
        if !suppressed {
            self.visible = domain.apply_effects(&self.visible, action).map_err(err)?;
            self.hidden = domain.apply_hidden_effects(&self.hidden, action).map_err(err)?;
        }
        self.actions.push(ActionRecord {
            tick: self.tick_no,
            node: id,
            action: action.clone(),
            before,
            after: self.visible.clone(),
        });
        self.acted = true;
        let effects = domain.effects_of(action).map_err(err)?;
        // a wildcard delete does not cover what the same action adds
        let added: BTreeSet<Atom> = effects.iter().filter(|e| !e.negated).filter_map(Literal::atom).collect();
        let rest = WorldState::from_atoms(self.visible.iter().filter(|a| !added.contains(*a)).cloned());
        for e in effects {
            let state = if e.negated && e.has_wildcard() { &rest } else { &self.visible };
            if !domain.holds(state, &e).map_err(err)? {
                let msg = postcondition_message(&e, &action.skill);
                return Ok(self.fail(id, action, msg, None));
            }
        }
        Ok(NodeStatus::Success)
    }
}

/// Runs `tree` in the scenario until root Success, a failure event, root
/// Failure without progress, a revisited state, or the tick budget. Under
/// [`FaultFilter::VisibleOnly`] the hidden state starts empty.
pub fn execute(tree: &BehaviorTree, scenario: &Scenario, config: &SimConfig) -> Result<ExecutionTrace, SimError> {
    execute_from(tree, scenario, &scenario.initial, config)
}

/// Like [`execute`], starting from a given visible state.
pub fn execute_from(
    tree: &BehaviorTree,
    scenario: &Scenario,
    visible: &WorldState,
    config: &SimConfig,
) -> Result<ExecutionTrace, SimError> {
    execute_in(tree, scenario, visible, &scenario.hidden, config)
}

/// Like [`execute`], starting from given visible and hidden states.
pub fn execute_in(
    tree: &BehaviorTree,
    scenario: &Scenario,
    visible: &WorldState,
    hidden: &WorldState,
    config: &SimConfig,
) -> Result<ExecutionTrace, SimError> {
    let hidden = match config.faults {
        FaultFilter::VisibleOnly => WorldState::new(),
        _ => hidden.clone(),
    };
    let mut ctx = SimCtx {
        scenario,
        config,
        visible: visible.clone(),
        hidden,
        progress: BTreeMap::new(),
        tick_no: 0,
        acted: false,
        actions: Vec::new(),
        failure: None,
    };
    let mut ticks = Vec::new();
    let mut seen = BTreeSet::new();
    let mut livelock = false;
    let status = loop {
        if ticks.len() >= config.max_ticks {
            let trace = finish(ctx, ticks, NodeStatus::Running, false);
            return Err(SimError::TickBudgetExceeded(Box::new(trace)));
        }
        let key = (ctx.visible.clone(), ctx.hidden.clone(), ctx.progress.clone());
        if !seen.insert(key) {
            livelock = true;
            break NodeStatus::Failure;
        }
        ctx.tick_no = ticks.len();
        ctx.acted = false;
        let (status, trace) = tick(tree, &mut ctx)?;
        ticks.push(trace);
        if ctx.failure.is_some() {
            break NodeStatus::Failure;
        }
        match status {
            NodeStatus::Success => break status,
            NodeStatus::Failure if !ctx.acted => break status,
            _ => {}
        }
    };
    Ok(finish(ctx, ticks, status, livelock))
}

fn finish(ctx: SimCtx<'_>, ticks: Vec<TickTrace>, status: NodeStatus, livelock: bool) -> ExecutionTrace {
    ExecutionTrace {
        ticks,
        actions: ctx.actions,
        failures: ctx.failure.into_iter().collect(),
        status,
        livelock,
        final_visible: ctx.visible,
        final_hidden: ctx.hidden,
    }
}
