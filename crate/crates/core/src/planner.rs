//! Reactive backchaining: grow a tree from goal conditions by simulating it
//! against the visible world and expanding failed conditions into Fallbacks
//! over the actions that achieve them.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::bt::{
    tick, BehaviorTree, EvaluationError, NodeId, NodeKind, NodeStatus, Spec, TickContext,
    TickTrace, TreeError, TreeNode,
};
use crate::domain::{Domain, DomainError, GroundAction, Literal, Term, WorldState};

/// Ordered, non-empty goal conjunction.
#[derive(Debug, Clone, PartialEq)]
pub struct GoalSpec {
    conjuncts: Vec<Literal>,
}

impl GoalSpec {
    pub fn new(conjuncts: Vec<Literal>) -> Result<Self, PlanError> {
        if conjuncts.is_empty() {
            return Err(PlanError::EmptyGoal);
        }
        Ok(GoalSpec { conjuncts })
    }

    /// Like [`GoalSpec::new`], also checking every literal against `domain`.
    pub fn validated(conjuncts: Vec<Literal>, domain: &Domain) -> Result<Self, PlanError> {
        for c in &conjuncts {
            domain.check_literal(c)?;
        }
        Self::new(conjuncts)
    }

    pub fn conjuncts(&self) -> &[Literal] {
        &self.conjuncts
    }

    pub fn satisfied(&self, domain: &Domain, state: &WorldState) -> Result<bool, DomainError> {
        for c in &self.conjuncts {
            if !domain.holds(state, c)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanConfig {
    pub max_expansions: usize,
    pub max_conflict_reorders: usize,
    /// Ticks allowed per simulated run of the tree.
    pub max_sim_ticks: usize,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            max_expansions: 64,
            max_conflict_reorders: 16,
            max_sim_ticks: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    Expansions,
    SimTicks,
    /// The simulated world revisited a state without reaching Success.
    Livelock,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("goal has no conditions")]
    EmptyGoal,
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
    #[error("no action can achieve `{0}`")]
    Unsolvable(Literal),
    #[error("node {0} cannot be expanded: {1}")]
    NotExpandable(NodeId, &'static str),
    #[error("planning budget exceeded ({kind:?})")]
    BudgetExceeded {
        kind: Budget,
        partial: Box<BehaviorTree>,
    },
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub tree: BehaviorTree,
    pub expansions: usize,
    pub reorders: usize,
    /// Visible state at the end of the successful simulation.
    pub final_state: WorldState,
}

/// Root Sequence over the goal conditions, in order.
pub fn init_tree(goals: &GoalSpec) -> BehaviorTree {
    BehaviorTree::new(Spec::Sequence(
        goals.conjuncts.iter().cloned().map(Spec::Condition).collect(),
    ))
}

/// Replaces an unexpanded condition that is false in `state` with a Fallback
/// over its achievers. Returns the new Fallback's id.
pub fn expand_condition(
    tree: &mut BehaviorTree,
    cond_id: NodeId,
    domain: &Domain,
    state: &WorldState,
) -> Result<NodeId, PlanError> {
    let node = tree.node(cond_id).ok_or(TreeError::UnknownNode(cond_id))?;
    let lit = node
        .condition()
        .ok_or(PlanError::NotExpandable(cond_id, "not a condition leaf"))?
        .clone();
    if is_headline(tree, cond_id) {
        return Err(PlanError::NotExpandable(cond_id, "already expanded"));
    }
    if domain.holds(state, &lit)? {
        return Err(PlanError::NotExpandable(cond_id, "condition holds"));
    }
    let alts = alternatives(tree, cond_id, &lit, domain, state)?;
    if alts.is_empty() {
        return Err(PlanError::Unsolvable(lit));
    }
    Ok(tree.expand_leaf(cond_id, alts.iter().map(|a| achiever_spec(domain, a)).collect::<Result<_, _>>()?)?)
}

/// Plans from the initial goal tree.
pub fn plan(
    goals: &GoalSpec,
    domain: &Domain,
    state: &WorldState,
    config: &PlanConfig,
) -> Result<Plan, PlanError> {
    plan_from_tree(init_tree(goals), domain, state, config)
}

/// Keeps expanding `tree` until a simulated run from `state` succeeds.
pub fn plan_from_tree(
    mut tree: BehaviorTree,
    domain: &Domain,
    state: &WorldState,
    config: &PlanConfig,
) -> Result<Plan, PlanError> {
    let mut expansions = 0;
    let mut reorders = 0;
    loop {
        let detect = reorders < config.max_conflict_reorders;
        let run = run_tree(&tree, domain, state, detect, config.max_sim_ticks)?;
        match run.end {
            RunEnd::Success => {
                return Ok(Plan {
                    tree,
                    expansions,
                    reorders,
                    final_state: run.state,
                })
            }
            RunEnd::Conflict { sequence, child } => {
                tree.move_child_left(sequence, child)?;
                reorders += 1;
            }
            RunEnd::Failure(trace) => {
                if expansions >= config.max_expansions {
                    return Err(budget(Budget::Expansions, tree));
                }
                expand_target(&mut tree, &trace, domain, &run.state)?;
                expansions += 1;
            }
            RunEnd::Livelock => return Err(budget(Budget::Livelock, tree)),
            RunEnd::OutOfTicks => return Err(budget(Budget::SimTicks, tree)),
        }
    }
}

fn budget(kind: Budget, tree: BehaviorTree) -> PlanError {
    PlanError::BudgetExceeded {
        kind,
        partial: Box::new(tree),
    }
}

/// Result of ticking a tree to completion in the plain effect model.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub status: NodeStatus,
    pub state: WorldState,
    pub ticks: usize,
    /// Actions applied, in order.
    pub actions: Vec<GroundAction>,
    pub last_trace: Option<TickTrace>,
}

/// Ticks `tree` from `state` with effects applied instantly and no faults,
/// until Success, Failure without progress, a repeated state or `max_ticks`.
/// A repeated state or running out of ticks is reported as Running.
pub fn simulate(
    tree: &BehaviorTree,
    domain: &Domain,
    state: &WorldState,
    max_ticks: usize,
) -> Result<Simulation, PlanError> {
    let run = run_tree(tree, domain, state, false, max_ticks)?;
    let (status, last_trace) = match run.end {
        RunEnd::Success => (NodeStatus::Success, run.last),
        RunEnd::Failure(t) => (NodeStatus::Failure, Some(t)),
        _ => (NodeStatus::Running, run.last),
    };
    Ok(Simulation {
        status,
        state: run.state,
        ticks: run.ticks,
        actions: run.actions,
        last_trace,
    })
}

enum RunEnd {
    Success,
    Failure(TickTrace),
    Conflict { sequence: NodeId, child: usize },
    Livelock,
    OutOfTicks,
}

struct Run {
    end: RunEnd,
    state: WorldState,
    ticks: usize,
    actions: Vec<GroundAction>,
    last: Option<TickTrace>,
}

struct PlanCtx<'a> {
    domain: &'a Domain,
    tree: &'a BehaviorTree,
    state: WorldState,
    detect: bool,
    acted: bool,
    conflict: Option<(NodeId, usize)>,
    actions: Vec<GroundAction>,
}

impl TickContext for PlanCtx<'_> {
    fn condition(&mut self, id: NodeId, lit: &Literal) -> Result<bool, EvaluationError> {
        self.domain
            .holds(&self.state, lit)
            .map_err(|source| EvaluationError::Domain { node: id, source })
    }

    fn action(&mut self, id: NodeId, action: &GroundAction) -> Result<NodeStatus, EvaluationError> {
        let err = |source| EvaluationError::Domain { node: id, source };
        if self.conflict.is_some() || !self.domain.applicable(&self.state, action).map_err(err)? {
            return Ok(NodeStatus::Failure);
        }
        let next = self.domain.apply_effects(&self.state, action).map_err(err)?;
        if self.detect {
            for (seq, child, guarded) in protected_by_sequences(self.tree, id) {
                for lit in guarded {
                    let before = self.domain.holds(&self.state, lit).map_err(err)?;
                    if before && !self.domain.holds(&next, lit).map_err(err)? {
                        self.conflict = Some((seq, child));
                        return Ok(NodeStatus::Failure);
                    }
                }
            }
        }
        self.state = next;
        self.acted = true;
        self.actions.push(action.clone());
        Ok(NodeStatus::Success)
    }
}

fn run_tree(
    tree: &BehaviorTree,
    domain: &Domain,
    state: &WorldState,
    detect: bool,
    max_ticks: usize,
) -> Result<Run, PlanError> {
    let mut ctx = PlanCtx {
        domain,
        tree,
        state: state.clone(),
        detect,
        acted: false,
        conflict: None,
        actions: Vec::new(),
    };
    let mut seen = BTreeSet::new();
    let mut ticks = 0;
    let mut last = None;
    let end = loop {
        if ticks >= max_ticks {
            break RunEnd::OutOfTicks;
        }
        if !seen.insert(ctx.state.clone()) {
            break RunEnd::Livelock;
        }
        ticks += 1;
        ctx.acted = false;
        let (status, trace) = tick(tree, &mut ctx)?;
        if let Some((sequence, child)) = ctx.conflict {
            break RunEnd::Conflict { sequence, child };
        }
        match status {
            NodeStatus::Success => {
                last = Some(trace);
                break RunEnd::Success;
            }
            NodeStatus::Failure if !ctx.acted => break RunEnd::Failure(trace),
            _ => last = Some(trace),
        }
    };
    Ok(Run {
        end,
        state: ctx.state,
        ticks,
        actions: ctx.actions,
        last,
    })
}

/// For every ancestor Sequence of `id` other than its own, the headlines left
/// of the child that contains `id`. These must stay true while `id` runs.
fn protected_by_sequences(tree: &BehaviorTree, id: NodeId) -> Vec<(NodeId, usize, Vec<&Literal>)> {
    let Some(path) = tree.path(id) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let mut node = tree.root();
    for (depth, &i) in path.iter().enumerate() {
        if node.kind == NodeKind::Sequence && depth + 1 < path.len() && i > 0 {
            let guarded = node.children[..i].iter().filter_map(TreeNode::headline).collect();
            out.push((node.id, i, guarded));
        }
        node = &node.children[i];
    }
    out
}

fn is_headline(tree: &BehaviorTree, id: NodeId) -> bool {
    tree.parent(id).is_some_and(|p| {
        p.kind == NodeKind::Fallback && p.children.first().map(|c| c.id) == Some(id)
    })
}

/// Failed conditions responsible for a root Failure: follow the failing child
/// of each failed Sequence and every child of each failed Fallback.
fn blamed(tree: &BehaviorTree, trace: &TickTrace) -> Vec<(NodeId, usize)> {
    fn walk(n: &TreeNode, depth: usize, trace: &TickTrace, out: &mut Vec<(NodeId, usize)>) {
        if trace.status_of(n.id) != Some(NodeStatus::Failure) {
            return;
        }
        match &n.kind {
            NodeKind::Condition(_) => out.push((n.id, depth)),
            NodeKind::Action(_) => {}
            NodeKind::Sequence => {
                if let Some(c) = n
                    .children
                    .iter()
                    .find(|c| trace.status_of(c.id) != Some(NodeStatus::Success))
                {
                    walk(c, depth + 1, trace, out);
                }
            }
            NodeKind::Fallback => {
                for c in &n.children {
                    walk(c, depth + 1, trace, out);
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(tree.root(), 0, trace, &mut out);
    out.sort_by(|a, b| b.1.cmp(&a.1));
    out
}

/// Expands the deepest, leftmost blamed condition that has something new to
/// offer: an unexpanded leaf with achievers, or an expanded headline whose
/// Fallback is missing achievers that are available in the current state.
fn expand_target(
    tree: &mut BehaviorTree,
    trace: &TickTrace,
    domain: &Domain,
    state: &WorldState,
) -> Result<(), PlanError> {
    let candidates = blamed(tree, trace);
    for &(id, _) in &candidates {
        let lit = tree.node(id).and_then(TreeNode::condition).cloned().ok_or(TreeError::UnknownNode(id))?;
        let alts = alternatives(tree, id, &lit, domain, state)?;
        if is_headline(tree, id) {
            let fb = tree.parent(id).ok_or(TreeError::UnknownNode(id))?;
            let present: Vec<&GroundAction> = fb.children.iter().filter_map(alternative_action).collect();
            let fresh: Vec<GroundAction> = alts.into_iter().filter(|a| !present.contains(&a)).collect();
            if fresh.is_empty() {
                continue;
            }
            let fb_id = fb.id;
            let specs = fresh.iter().map(|a| achiever_spec(domain, a)).collect::<Result<_, _>>()?;
            tree.append_children(fb_id, specs)?;
            return Ok(());
        }
        if alts.is_empty() {
            continue;
        }
        let specs = alts.iter().map(|a| achiever_spec(domain, a)).collect::<Result<_, _>>()?;
        tree.expand_leaf(id, specs)?;
        return Ok(());
    }
    let lit = |id: NodeId| tree.node(id).and_then(TreeNode::condition).cloned();
    let stuck = candidates
        .iter()
        .filter_map(|&(id, _)| lit(id))
        .find(|l| domain.achievers(l).is_empty())
        .or_else(|| candidates.first().and_then(|&(id, _)| lit(id)));
    match stuck {
        Some(l) => Err(PlanError::Unsolvable(l)),
        None => Err(PlanError::NotExpandable(tree.root().id, "failure has no blamed condition")),
    }
}

/// The action an alternative of a Fallback runs: a bare action or the last
/// child of a Sequence.
fn alternative_action(n: &TreeNode) -> Option<&GroundAction> {
    match &n.kind {
        NodeKind::Action(a) => Some(a),
        NodeKind::Sequence => n.children.last().and_then(TreeNode::action),
        _ => None,
    }
}

fn achiever_spec(domain: &Domain, action: &GroundAction) -> Result<Spec, DomainError> {
    let mut children: Vec<Spec> = domain
        .preconditions_of(action)?
        .into_iter()
        .map(Spec::Condition)
        .collect();
    children.push(Spec::Action(action.clone()));
    Ok(Spec::Sequence(children))
}

/// Ground achievers of `lit` at node `id`, in achiever order. Achievers that
/// need a condition already being pursued higher up are skipped; achievers
/// that would undo a protected condition are dropped unless nothing else
/// remains.
fn alternatives(
    tree: &BehaviorTree,
    id: NodeId,
    lit: &Literal,
    domain: &Domain,
    state: &WorldState,
) -> Result<Vec<GroundAction>, PlanError> {
    let mut pursued: Vec<&Literal> = Vec::from([lit]);
    let mut protected: Vec<&Literal> = Vec::new();
    let path = tree.path(id).ok_or(TreeError::UnknownNode(id))?;
    let mut node = tree.root();
    for &i in path {
        match node.kind {
            NodeKind::Sequence => protected.extend(node.children[..i].iter().filter_map(TreeNode::headline)),
            NodeKind::Fallback if i > 0 => {
                if let Some(h) = node.headline() {
                    pursued.push(h);
                    protected.push(h);
                }
            }
            _ => {}
        }
        node = &node.children[i];
    }

    let mut found: Vec<GroundAction> = Vec::new();
    for ach in domain.achievers(lit) {
        for g in domain.ground_achiever(&ach, state)? {
            if found.contains(&g) {
                continue;
            }
            let pre = domain.preconditions_of(&g)?;
            if pre.iter().any(|p| pursued.contains(&p)) {
                continue;
            }
            found.push(g);
        }
    }
    let mut keep = Vec::new();
    for g in &found {
        let effects = domain.effects_of(g)?;
        if !effects.iter().any(|e| protected.iter().any(|p| undoes(e, p))) {
            keep.push(g.clone());
        }
    }
    Ok(if keep.is_empty() { found } else { keep })
}

/// Whether applying effect `e` can make `p` false.
fn undoes(e: &Literal, p: &Literal) -> bool {
    e.predicate == p.predicate
        && e.negated != p.negated
        && e.args.len() == p.args.len()
        && e.args.iter().zip(&p.args).all(|(a, b)| match (a, b) {
            (Term::Object(x), Term::Object(y)) => x == y,
            _ => true,
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::fixtures::{cube_domain, lit, state};
    use alloc::vec;

    fn goal(s: &str) -> GoalSpec {
        GoalSpec::new(crate::domain::parse_conjunction(s).unwrap()).unwrap()
    }

    #[test]
    fn empty_goal_rejected() {
        assert_eq!(GoalSpec::new(vec![]), Err(PlanError::EmptyGoal));
    }

    #[test]
    fn init_tree_orders_conjuncts() {
        let t = init_tree(&goal("on(a, b) & on(b, c)"));
        assert_eq!(t.shape(), "->[on(a, b)?, on(b, c)?]");
    }

    #[test]
    fn unobstructed_stack_matches_grasp_then_place() {
        let d = cube_domain(&["blue_cube", "green_cube"]);
        let s = state(&["on(blue_cube, table)", "on(green_cube, table)"]);
        let p = plan(&goal("on(blue_cube, green_cube)"), &d, &s, &PlanConfig::default()).unwrap();
        assert_eq!(
            p.tree.shape(),
            "->[?[on(blue_cube, green_cube)?, ->[?[grasped(blue_cube)?, ->[~grasped(any_object)?, \
             grasp(blue_cube)!]], place(blue_cube, green_cube)!]]]"
        );
        assert_eq!(p.expansions, 2);
        assert!(p.final_state.contains(&lit("on(blue_cube, green_cube)").atom().unwrap()));
    }

    #[test]
    fn satisfied_goal_needs_no_expansion() {
        let d = cube_domain(&["blue_cube", "green_cube"]);
        let s = state(&["on(blue_cube, green_cube)", "on(green_cube, table)"]);
        let g = goal("on(blue_cube, green_cube)");
        let p = plan(&g, &d, &s, &PlanConfig::default()).unwrap();
        assert_eq!(p.tree, init_tree(&g));
        assert_eq!(p.expansions, 0);
    }

    #[test]
    fn expand_refuses_true_condition() {
        let d = cube_domain(&["blue_cube"]);
        let s = state(&["on(blue_cube, table)"]);
        let mut t = init_tree(&goal("on(blue_cube, table)"));
        let err = expand_condition(&mut t, NodeId(1), &d, &s).unwrap_err();
        assert_eq!(err, PlanError::NotExpandable(NodeId(1), "condition holds"));
    }

    #[test]
    fn freeing_the_hand_avoids_undoing_the_cleared_cube() {
        let d = cube_domain(&["blue_cube", "green_cube", "red_cube"]);
        let s = state(&["grasped(red_cube)", "on(blue_cube, table)", "on(green_cube, table)"]);
        let mut t = BehaviorTree::new(Spec::Sequence(vec![
            Spec::Condition(lit("~on(any_object, blue_cube)")),
            Spec::Condition(lit("~grasped(any_object)")),
        ]));
        let fb = expand_condition(&mut t, NodeId(2), &d, &s).unwrap();
        let alts: Vec<_> = t.node(fb).unwrap().children[1..]
            .iter()
            .map(|c| alloc::format!("{}", alternative_action(c).unwrap()))
            .collect();
        assert_eq!(alts, ["place(red_cube, table)", "place(red_cube, green_cube)"]);
    }

    #[test]
    fn tower_needs_reordering_and_ends_in_goal() {
        let d = cube_domain(&["a", "b", "c"]);
        let s = state(&["on(a, table)", "on(b, table)", "on(c, table)"]);
        let g = goal("on(a, b) & on(b, c)");
        let p = plan(&g, &d, &s, &PlanConfig::default()).unwrap();
        assert!(g.satisfied(&d, &p.final_state).unwrap());
        let sim = simulate(&p.tree, &d, &s, 1000).unwrap();
        assert_eq!(sim.status, NodeStatus::Success);
    }

    #[test]
    fn unachievable_literal_is_reported() {
        let d = cube_domain(&["blue_cube"]);
        let s = state(&["on(blue_cube, table)"]);
        let g = GoalSpec::new(vec![lit("on(table, blue_cube)")]).unwrap();
        assert!(matches!(
            plan(&g, &d, &s, &PlanConfig::default()),
            Err(PlanError::Unsolvable(_))
        ));
    }

    #[test]
    fn expansion_budget_returns_partial_tree() {
        let d = cube_domain(&["blue_cube", "green_cube"]);
        let s = state(&["on(blue_cube, table)", "on(green_cube, table)"]);
        let cfg = PlanConfig {
            max_expansions: 1,
            ..PlanConfig::default()
        };
        match plan(&goal("on(blue_cube, green_cube)"), &d, &s, &cfg) {
            Err(PlanError::BudgetExceeded { kind: Budget::Expansions, partial }) => {
                assert!(partial.node_count() > 2)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn undo_check_respects_wildcards() {
        assert!(undoes(&lit("~on(red, any_object)"), &lit("on(red, blue)")));
        assert!(undoes(&lit("on(red, blue)"), &lit("~on(any_object, blue)")));
        assert!(!undoes(&lit("on(red, green)"), &lit("~on(any_object, blue)")));
        assert!(!undoes(&lit("grasped(red)"), &lit("grasped(blue)")));
    }
}
