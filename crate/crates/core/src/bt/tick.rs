use alloc::string::String;
use alloc::vec::Vec;

use super::{BehaviorTree, NodeId, NodeKind, NodeStatus, TreeNode};
use crate::domain::{DomainError, GroundAction, Literal};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvaluationError {
    #[error("node {node}: {source}")]
    Domain { node: NodeId, source: DomainError },
    #[error("node {node}: {message}")]
    Other { node: NodeId, message: String },
}

/// Callbacks a tick uses to evaluate leaves.
///
/// Conditions return a plain bool, so they can never be Running.
pub trait TickContext {
    fn condition(&mut self, id: NodeId, lit: &Literal) -> Result<bool, EvaluationError>;
    fn action(&mut self, id: NodeId, action: &GroundAction) -> Result<NodeStatus, EvaluationError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafKind {
    Control,
    Condition,
    Action,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub id: NodeId,
    pub status: NodeStatus,
    pub depth: usize,
    pub kind: LeafKind,
}

/// Nodes visited by one tick in depth-first order, each with its result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickTrace {
    pub entries: Vec<TraceEntry>,
    pub status: NodeStatus,
}

impl TickTrace {
    pub fn status_of(&self, id: NodeId) -> Option<NodeStatus> {
        self.entries.iter().find(|e| e.id == id).map(|e| e.status)
    }

    pub fn visited(&self, id: NodeId) -> bool {
        self.entries.iter().any(|e| e.id == id)
    }
}

/// Ticks the tree once from the root.
pub fn tick<C: TickContext + ?Sized>(
    tree: &BehaviorTree,
    ctx: &mut C,
) -> Result<(NodeStatus, TickTrace), EvaluationError> {
    let mut entries = Vec::new();
    let status = tick_node(tree.root(), 0, ctx, &mut entries)?;
    Ok((status, TickTrace { entries, status }))
}

fn tick_node<C: TickContext + ?Sized>(
    node: &TreeNode,
    depth: usize,
    ctx: &mut C,
    entries: &mut Vec<TraceEntry>,
) -> Result<NodeStatus, EvaluationError> {
    let slot = entries.len();
    let kind = match node.kind {
        NodeKind::Sequence | NodeKind::Fallback => LeafKind::Control,
        NodeKind::Condition(_) => LeafKind::Condition,
        NodeKind::Action(_) => LeafKind::Action,
    };
    entries.push(TraceEntry {
        id: node.id,
        status: NodeStatus::Failure,
        depth,
        kind,
    });
    let status = match &node.kind {
        NodeKind::Sequence => {
            let mut s = NodeStatus::Success;
            for c in &node.children {
                s = tick_node(c, depth + 1, ctx, entries)?;
                if s != NodeStatus::Success {
                    break;
                }
            }
            s
        }
        NodeKind::Fallback => {
            let mut s = NodeStatus::Failure;
            for c in &node.children {
                s = tick_node(c, depth + 1, ctx, entries)?;
                if s != NodeStatus::Failure {
                    break;
                }
            }
            s
        }
        NodeKind::Condition(l) => {
            if ctx.condition(node.id, l)? {
                NodeStatus::Success
            } else {
                NodeStatus::Failure
            }
        }
        NodeKind::Action(a) => ctx.action(node.id, a)?,
    };
    entries[slot].status = status;
    Ok(status)
}

/// Deepest action leaf that returned Failure; the first one on ties.
pub fn failing_action(trace: &TickTrace) -> Option<NodeId> {
    let mut best: Option<&TraceEntry> = None;
    for e in &trace.entries {
        if e.kind == LeafKind::Action
            && e.status == NodeStatus::Failure
            && best.map_or(true, |b| e.depth > b.depth)
        {
            best = Some(e);
        }
    }
    best.map(|e| e.id)
}
