//! Structural and bounded-state checks on a finished policy.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bt::{BehaviorTree, NodeId, NodeKind, NodeStatus, TreeNode};
use crate::domain::{Atom, Domain, WorldState};
use crate::planner::{simulate, GoalSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    Skills,
    GoalCoverage,
    Preconditions,
    DuplicateAlternatives,
    Livelock,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Skills => "skills",
            Check::GoalCoverage => "goal-coverage",
            Check::Preconditions => "preconditions",
            Check::DuplicateAlternatives => "duplicate-alternatives",
            Check::Livelock => "livelock",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub check: Check,
    pub node: Option<NodeId>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerificationReport {
    pub checks_run: Vec<Check>,
    /// Checks that did not apply, with the reason.
    pub skipped: Vec<(Check, String)>,
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub max_ticks: usize,
    /// The exhaustive livelock check runs only up to this many objects.
    pub max_objects: usize,
    pub max_states: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_ticks: 10_000,
            max_objects: 4,
            max_states: 1 << 16,
        }
    }
}

pub fn verify_tree(
    tree: &BehaviorTree,
    domain: &Domain,
    goals: &GoalSpec,
    config: &VerifyConfig,
) -> VerificationReport {
    let mut r = VerificationReport::default();
    let nodes = tree.preorder();

    r.checks_run.push(Check::Skills);
    for n in &nodes {
        if let Some(a) = n.action() {
            if let Err(e) = domain.check_action(a) {
                r.violations.push(Violation {
                    check: Check::Skills,
                    node: Some(n.id),
                    message: format!("{a}: {e}"),
                });
            }
        }
    }

    r.checks_run.push(Check::GoalCoverage);
    for g in goals.conjuncts() {
        if !nodes.iter().any(|n| n.condition() == Some(g)) {
            r.violations.push(Violation {
                check: Check::GoalCoverage,
                node: None,
                message: format!("goal `{g}` has no condition leaf"),
            });
        }
    }

    r.checks_run.push(Check::Preconditions);
    for n in &nodes {
        let Some(a) = n.action() else { continue };
        let Ok(pre) = domain.preconditions_of(a) else { continue };
        let listed: Vec<_> = match tree.parent(n.id) {
            Some(p) if p.kind == NodeKind::Sequence => p
                .children
                .iter()
                .take_while(|c| c.id != n.id)
                .filter_map(TreeNode::headline)
                .collect(),
            _ => Vec::new(),
        };
        for p in pre {
            if !listed.contains(&&p) {
                r.violations.push(Violation {
                    check: Check::Preconditions,
                    node: Some(n.id),
                    message: format!("{a} does not check `{p}` first"),
                });
            }
        }
    }

    r.checks_run.push(Check::DuplicateAlternatives);
    for n in &nodes {
        if n.kind != NodeKind::Fallback {
            continue;
        }
        let mut seen = BTreeSet::new();
        for c in &n.children {
            let shape = BehaviorTree::subtree_shape(c);
            if !seen.insert(shape.clone()) {
                r.violations.push(Violation {
                    check: Check::DuplicateAlternatives,
                    node: Some(n.id),
                    message: format!("alternative `{shape}` appears twice"),
                });
            }
        }
    }

    match livelock_states(tree, domain, config) {
        Err(reason) => r.skipped.push((Check::Livelock, reason)),
        Ok(states) => {
            r.checks_run.push(Check::Livelock);
            for s in states {
                match simulate(tree, domain, &s, config.max_ticks) {
                    Ok(sim) if sim.status != NodeStatus::Running => {}
                    Ok(_) => {
                        let facts: Vec<String> = s.iter().map(|a| format!("{a}")).collect();
                        r.violations.push(Violation {
                            check: Check::Livelock,
                            node: None,
                            message: format!("no verdict from state {{{}}}", facts.join(", ")),
                        });
                        break;
                    }
                    // evaluation errors are reported by the skill check
                    Err(_) => break,
                }
            }
        }
    }
    r
}

/// Every subset of the type-correct ground atoms over predicates the tree
/// mentions, or the reason the enumeration does not apply.
fn livelock_states(tree: &BehaviorTree, domain: &Domain, config: &VerifyConfig) -> Result<Vec<WorldState>, String> {
    if domain.objects().len() > config.max_objects {
        return Err(format!(
            "{} objects exceed the limit of {}",
            domain.objects().len(),
            config.max_objects
        ));
    }
    let mut preds = BTreeSet::new();
    for n in tree.preorder() {
        match &n.kind {
            NodeKind::Condition(l) => {
                preds.insert(l.predicate.clone());
            }
            NodeKind::Action(a) => {
                if let Ok(eff) = domain.effects_of(a) {
                    preds.extend(eff.into_iter().map(|e| e.predicate));
                }
            }
            _ => {}
        }
    }
    let mut atoms: Vec<Atom> = Vec::new();
    for p in domain.predicates().iter().filter(|p| preds.contains(&p.name)) {
        let mut rows: Vec<Vec<String>> = Vec::from([Vec::new()]);
        for ty in &p.params {
            let objs = domain.objects_of(ty);
            let mut next = Vec::new();
            for row in &rows {
                for o in objs.iter().filter(|o| !row.contains(&o.name)) {
                    let mut r = row.clone();
                    r.push(o.name.clone());
                    next.push(r);
                }
            }
            rows = next;
        }
        atoms.extend(rows.into_iter().map(|args| Atom {
            predicate: p.name.clone(),
            args,
        }));
    }
    if atoms.len() >= usize::BITS as usize || (1usize << atoms.len()) > config.max_states {
        return Err(format!("{} atoms give too many states", atoms.len()));
    }
    Ok((0..1usize << atoms.len())
        .map(|mask| {
            WorldState::from_atoms(
                atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, a)| a.clone()),
            )
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bt::Spec;
    use crate::domain::fixtures::{lit, pred, skill};
    use crate::domain::{parse_conjunction, GroundAction, ObjectRef};
    use alloc::vec;

    fn switch_domain() -> Domain {
        Domain::new(
            "switch",
            vec![ObjectRef::new("lamp", "device")],
            vec![pred("lit", &["device"], "{0} is lit"), pred("done", &[], "done")],
            vec![
                skill("on", &[("d", "device")], &[], &["lit(?d)"]),
                skill("off", &[("d", "device")], &[], &["~lit(?d)"]),
            ],
        )
        .unwrap()
    }

    fn act(s: &str) -> Spec {
        Spec::Action(GroundAction::new(
            s,
            vec![("d".into(), Some(crate::domain::BindingValue::Symbol("lamp".into())))],
        ))
    }

    #[test]
    fn mutually_undoing_subtrees_livelock() {
        let d = switch_domain();
        let tree = BehaviorTree::new(Spec::Fallback(vec![
            Spec::Condition(lit("done()")),
            Spec::Sequence(vec![Spec::Condition(lit("~lit(lamp)")), act("on"), Spec::Condition(lit("done()"))]),
            Spec::Sequence(vec![Spec::Condition(lit("lit(lamp)")), act("off"), Spec::Condition(lit("done()"))]),
        ]));
        let g = GoalSpec::new(parse_conjunction("done()").unwrap()).unwrap();
        let r = verify_tree(&tree, &d, &g, &VerifyConfig::default());
        assert_eq!(r.violations.len(), 1, "{r:?}");
        assert_eq!(r.violations[0].check, Check::Livelock);
    }

    #[test]
    fn orphaned_goal_and_duplicates() {
        let d = switch_domain();
        let tree = BehaviorTree::new(Spec::Fallback(vec![
            Spec::Condition(lit("lit(lamp)")),
            Spec::Sequence(vec![act("on")]),
            Spec::Sequence(vec![act("on")]),
        ]));
        let g = GoalSpec::new(parse_conjunction("done()").unwrap()).unwrap();
        let r = verify_tree(&tree, &d, &g, &VerifyConfig::default());
        let checks: Vec<Check> = r.violations.iter().map(|v| v.check).collect();
        assert_eq!(checks, [Check::GoalCoverage, Check::DuplicateAlternatives]);
    }
}
