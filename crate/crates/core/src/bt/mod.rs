//! Behavior tree policies: memoryless Sequence/Fallback control nodes over
//! condition and action leaves.
//!
//! Node ids are integers assigned from a per-tree counter. Edits keep the ids
//! of untouched nodes and hand out fresh ids for new ones.

mod dot;
mod tick;

pub use dot::to_dot;
pub use tick::{failing_action, tick, EvaluationError, LeafKind, TickContext, TickTrace, TraceEntry};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::domain::{GroundAction, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeStatus {
    Success,
    Failure,
    Running,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Sequence,
    Fallback,
    Condition(Literal),
    Action(GroundAction),
}

impl NodeKind {
    pub fn is_control(&self) -> bool {
        matches!(self, NodeKind::Sequence | NodeKind::Fallback)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub children: Vec<TreeNode>,
}

impl TreeNode {
    pub fn condition(&self) -> Option<&Literal> {
        match &self.kind {
            NodeKind::Condition(l) => Some(l),
            _ => None,
        }
    }

    pub fn action(&self) -> Option<&GroundAction> {
        match &self.kind {
            NodeKind::Action(a) => Some(a),
            _ => None,
        }
    }

    /// The condition a child stands for inside a Sequence: the leaf itself,
    /// or the first child of a Fallback built by expansion.
    pub fn headline(&self) -> Option<&Literal> {
        match &self.kind {
            NodeKind::Condition(l) => Some(l),
            NodeKind::Fallback => self.children.first().and_then(TreeNode::condition),
            _ => None,
        }
    }

    fn shape_into(&self, out: &mut String) {
        match &self.kind {
            NodeKind::Condition(l) => out.push_str(&format!("{l}?")),
            NodeKind::Action(a) => out.push_str(&format!("{a}!")),
            NodeKind::Sequence | NodeKind::Fallback => {
                out.push_str(if self.kind == NodeKind::Sequence { "->[" } else { "?[" });
                for (i, c) in self.children.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    c.shape_into(out);
                }
                out.push(']');
            }
        }
    }

    fn preorder<'a>(&'a self, out: &mut Vec<&'a TreeNode>) {
        out.push(self);
        for c in &self.children {
            c.preorder(out);
        }
    }
}

/// Blueprint for new nodes; ids are assigned on insertion.
#[derive(Debug, Clone, PartialEq)]
pub enum Spec {
    Sequence(Vec<Spec>),
    Fallback(Vec<Spec>),
    Condition(Literal),
    Action(GroundAction),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("no node with id {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is not a valid target: {1}")]
    InvalidTarget(NodeId, &'static str),
    #[error("invalid tree: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
pub struct BehaviorTree {
    root: TreeNode,
    next_id: u32,
    index: BTreeMap<NodeId, Vec<usize>>,
}

impl PartialEq for BehaviorTree {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl BehaviorTree {
    pub fn new(root: Spec) -> Self {
        let mut next = 0;
        let root = build(root, &mut next);
        let mut t = BehaviorTree {
            root,
            next_id: next,
            index: BTreeMap::new(),
        };
        t.reindex();
        t
    }

    /// Adopts an explicit node structure (e.g. parsed from a file), keeping
    /// its ids. Fails if the structure does not validate.
    pub fn from_root(root: TreeNode) -> Result<Self, TreeError> {
        let mut nodes = Vec::new();
        root.preorder(&mut nodes);
        let next_id = nodes.iter().map(|n| n.id.0 + 1).max().unwrap_or(0);
        let mut t = BehaviorTree {
            root,
            next_id,
            index: BTreeMap::new(),
        };
        t.reindex();
        t.validate()?;
        Ok(t)
    }

    pub fn root(&self) -> &TreeNode {
        &self.root
    }

    pub fn node_count(&self) -> usize {
        self.index.len()
    }

    pub fn node(&self, id: NodeId) -> Option<&TreeNode> {
        let path = self.index.get(&id)?;
        Some(node_at(&self.root, path))
    }

    /// Child-index path from the root to `id`.
    pub fn path(&self, id: NodeId) -> Option<&[usize]> {
        self.index.get(&id).map(Vec::as_slice)
    }

    pub fn depth(&self, id: NodeId) -> Option<usize> {
        self.path(id).map(<[usize]>::len)
    }

    pub fn parent(&self, id: NodeId) -> Option<&TreeNode> {
        let path = self.index.get(&id)?;
        let (_, head) = path.split_last()?;
        Some(node_at(&self.root, head))
    }

    /// Ancestors of `id`, nearest first.
    pub fn ancestors(&self, id: NodeId) -> Vec<&TreeNode> {
        let Some(path) = self.index.get(&id) else {
            return Vec::new();
        };
        (0..path.len())
            .rev()
            .map(|n| node_at(&self.root, &path[..n]))
            .collect()
    }

    pub fn preorder(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        self.root.preorder(&mut out);
        out
    }

    pub fn preorder_ids(&self) -> Vec<NodeId> {
        self.preorder().iter().map(|n| n.id).collect()
    }

    /// Id-free structural rendering; equal shapes mean equal trees modulo ids.
    pub fn shape(&self) -> String {
        let mut s = String::new();
        self.root.shape_into(&mut s);
        s
    }

    pub fn subtree_shape(node: &TreeNode) -> String {
        let mut s = String::new();
        node.shape_into(&mut s);
        s
    }

    /// Checks child counts, id uniqueness and index consistency.
    pub fn validate(&self) -> Result<(), TreeError> {
        let mut seen = BTreeMap::new();
        let mut stack: Vec<(&TreeNode, Vec<usize>)> = Vec::from([(&self.root, Vec::new())]);
        while let Some((n, path)) = stack.pop() {
            if seen.insert(n.id, path.clone()).is_some() {
                return Err(TreeError::Invalid(format!("duplicate node id {}", n.id)));
            }
            if n.id.0 >= self.next_id {
                return Err(TreeError::Invalid(format!("id {} beyond allocator", n.id)));
            }
            match n.kind {
                NodeKind::Sequence | NodeKind::Fallback if n.children.is_empty() => {
                    return Err(TreeError::Invalid(format!("control node {} has no children", n.id)));
                }
                NodeKind::Condition(_) | NodeKind::Action(_) if !n.children.is_empty() => {
                    return Err(TreeError::Invalid(format!("leaf {} has children", n.id)));
                }
                _ => {}
            }
            for (i, c) in n.children.iter().enumerate() {
                let mut p = path.clone();
                p.push(i);
                stack.push((c, p));
            }
        }
        if seen != self.index {
            return Err(TreeError::Invalid("id index out of sync with structure".into()));
        }
        Ok(())
    }

    fn reindex(&mut self) {
        self.index.clear();
        let mut stack: Vec<(&TreeNode, Vec<usize>)> = Vec::from([(&self.root, Vec::new())]);
        while let Some((n, path)) = stack.pop() {
            for (i, c) in n.children.iter().enumerate() {
                let mut p = path.clone();
                p.push(i);
                stack.push((c, p));
            }
            self.index.insert(n.id, path);
        }
    }

    fn node_mut(&mut self, id: NodeId) -> Option<&mut TreeNode> {
        let path = self.index.get(&id)?.clone();
        let mut n = &mut self.root;
        for i in path {
            n = &mut n.children[i];
        }
        Some(n)
    }

    /// Builds detached nodes with fresh ids.
    pub fn instantiate(&mut self, spec: Spec) -> TreeNode {
        build(spec, &mut self.next_id)
    }

    /// Replaces the condition leaf `id` with a Fallback whose first child is
    /// the original leaf (same id) followed by `alternatives`.
    pub fn expand_leaf(&mut self, id: NodeId, alternatives: Vec<Spec>) -> Result<NodeId, TreeError> {
        let node = self.node(id).ok_or(TreeError::UnknownNode(id))?.clone();
        if !matches!(node.kind, NodeKind::Condition(_)) {
            return Err(TreeError::InvalidTarget(id, "not a condition leaf"));
        }
        let fb_id = NodeId(self.next_id);
        self.next_id += 1;
        let mut children = Vec::with_capacity(alternatives.len() + 1);
        children.push(node);
        for a in alternatives {
            children.push(build(a, &mut self.next_id));
        }
        let target = self.node_mut(id).ok_or(TreeError::UnknownNode(id))?;
        *target = TreeNode {
            id: fb_id,
            kind: NodeKind::Fallback,
            children,
        };
        self.reindex();
        Ok(fb_id)
    }

    /// Appends alternatives to an existing Fallback.
    pub fn append_children(&mut self, id: NodeId, specs: Vec<Spec>) -> Result<(), TreeError> {
        let mut built = Vec::with_capacity(specs.len());
        for s in specs {
            built.push(build(s, &mut self.next_id));
        }
        let n = self.node_mut(id).ok_or(TreeError::UnknownNode(id))?;
        if !n.kind.is_control() {
            return Err(TreeError::InvalidTarget(id, "not a control node"));
        }
        n.children.extend(built);
        self.reindex();
        Ok(())
    }

    /// Swaps child `index` of control node `id` with its left neighbour.
    pub fn move_child_left(&mut self, id: NodeId, index: usize) -> Result<(), TreeError> {
        let n = self.node_mut(id).ok_or(TreeError::UnknownNode(id))?;
        if !n.kind.is_control() {
            return Err(TreeError::InvalidTarget(id, "not a control node"));
        }
        if index == 0 || index >= n.children.len() {
            return Err(TreeError::InvalidTarget(id, "child cannot move left"));
        }
        n.children.swap(index - 1, index);
        self.reindex();
        Ok(())
    }

    /// Sets a parameter value on the action leaf `id`.
    pub fn bind_action(
        &mut self,
        id: NodeId,
        slot: &str,
        value: crate::domain::BindingValue,
    ) -> Result<(), TreeError> {
        let n = self.node_mut(id).ok_or(TreeError::UnknownNode(id))?;
        match &mut n.kind {
            NodeKind::Action(a) => {
                if a.bind(slot, value) {
                    Ok(())
                } else {
                    Err(TreeError::InvalidTarget(id, "action has no such slot"))
                }
            }
            _ => Err(TreeError::InvalidTarget(id, "not an action leaf")),
        }
    }

    /// Inserts `conds` as the leftmost children of the action's enclosing
    /// Sequence, in order. A bare action (root or under a Fallback) is first
    /// wrapped in a Sequence of its own. Returns the new leaf ids.
    pub fn insert_preconditions(
        &mut self,
        action_id: NodeId,
        conds: &[Literal],
    ) -> Result<Vec<NodeId>, TreeError> {
        let node = self.node(action_id).ok_or(TreeError::UnknownNode(action_id))?;
        if !matches!(node.kind, NodeKind::Action(_)) {
            return Err(TreeError::InvalidTarget(action_id, "not an action leaf"));
        }
        if conds.is_empty() {
            return Ok(Vec::new());
        }
        let leaves: Vec<TreeNode> = conds
            .iter()
            .map(|c| build(Spec::Condition(c.clone()), &mut self.next_id))
            .collect();
        let ids = leaves.iter().map(|l| l.id).collect();
        let in_sequence = self
            .parent(action_id)
            .is_some_and(|p| p.kind == NodeKind::Sequence);
        if in_sequence {
            let path = self.index[&action_id].clone();
            let (_, parent_path) = path.split_last().expect("non-root");
            let mut p = &mut self.root;
            for &i in parent_path {
                p = &mut p.children[i];
            }
            p.children.splice(0..0, leaves);
        } else {
            let seq_id = NodeId(self.next_id);
            self.next_id += 1;
            let target = self.node_mut(action_id).ok_or(TreeError::UnknownNode(action_id))?;
            let action = target.clone();
            let mut children = leaves;
            children.push(action);
            *target = TreeNode {
                id: seq_id,
                kind: NodeKind::Sequence,
                children,
            };
        }
        self.reindex();
        Ok(ids)
    }
}

fn node_at<'a>(root: &'a TreeNode, path: &[usize]) -> &'a TreeNode {
    path.iter().fold(root, |n, &i| &n.children[i])
}

fn build(spec: Spec, next: &mut u32) -> TreeNode {
    let id = NodeId(*next);
    *next += 1;
    match spec {
        Spec::Sequence(cs) => TreeNode {
            id,
            kind: NodeKind::Sequence,
            children: cs.into_iter().map(|c| build(c, next)).collect(),
        },
        Spec::Fallback(cs) => TreeNode {
            id,
            kind: NodeKind::Fallback,
            children: cs.into_iter().map(|c| build(c, next)).collect(),
        },
        Spec::Condition(l) => TreeNode {
            id,
            kind: NodeKind::Condition(l),
            children: Vec::new(),
        },
        Spec::Action(a) => TreeNode {
            id,
            kind: NodeKind::Action(a),
            children: Vec::new(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::fixtures::lit;
    use alloc::vec;

    fn grasp(obj: &str) -> GroundAction {
        GroundAction::new(
            "grasp",
            vec![("obj".into(), Some(crate::domain::BindingValue::Symbol(obj.into())))],
        )
    }

    fn fig3a() -> BehaviorTree {
        BehaviorTree::new(Spec::Sequence(vec![Spec::Fallback(vec![
            Spec::Condition(lit("grasped(blue_cube)")),
            Spec::Sequence(vec![
                Spec::Condition(lit("~grasped(any_object)")),
                Spec::Action(grasp("blue_cube")),
            ]),
        ])]))
    }

    fn action_id(t: &BehaviorTree) -> NodeId {
        t.preorder().iter().find(|n| n.action().is_some()).unwrap().id
    }

    #[test]
    fn ids_are_preorder_on_construction() {
        let t = fig3a();
        assert_eq!(t.preorder_ids(), (0..6).map(NodeId).collect::<Vec<_>>());
        t.validate().unwrap();
    }

    #[test]
    fn insert_before_existing_preconditions() {
        let mut t = fig3a();
        let a = action_id(&t);
        let new = t
            .insert_preconditions(a, &[lit("~on(any_object, blue_cube)"), lit("reachable(blue_cube)")])
            .unwrap();
        t.validate().unwrap();
        let order = t.preorder_ids();
        let pos = |id: NodeId| order.iter().position(|&x| x == id).unwrap();
        let old_pre = t.parent(a).unwrap().children[2].id;
        assert!(pos(new[0]) < pos(new[1]));
        assert!(pos(new[1]) < pos(old_pre));
        assert!(pos(old_pre) < pos(a));
    }

    #[test]
    fn insert_empty_is_identity() {
        let mut t = fig3a();
        let before = t.clone();
        let a = action_id(&t);
        t.insert_preconditions(a, &[]).unwrap();
        assert_eq!(t, before);
    }

    #[test]
    fn bare_action_under_fallback_gets_wrapped() {
        let mut t = BehaviorTree::new(Spec::Fallback(vec![
            Spec::Condition(lit("grasped(blue_cube)")),
            Spec::Action(grasp("blue_cube")),
        ]));
        let a = action_id(&t);
        t.insert_preconditions(a, &[lit("~grasped(any_object)")]).unwrap();
        t.validate().unwrap();
        let parent = t.parent(a).unwrap();
        assert_eq!(parent.kind, NodeKind::Sequence);
        assert_eq!(t.shape(), "?[grasped(blue_cube)?, ->[~grasped(any_object)?, grasp(blue_cube)!]]");
    }

    #[test]
    fn insert_errors() {
        let mut t = fig3a();
        assert_eq!(
            t.insert_preconditions(NodeId(99), &[]),
            Err(TreeError::UnknownNode(NodeId(99)))
        );
        assert!(matches!(
            t.insert_preconditions(NodeId(2), &[]),
            Err(TreeError::InvalidTarget(..))
        ));
    }

    #[test]
    fn expand_keeps_condition_id() {
        let mut t = BehaviorTree::new(Spec::Sequence(vec![Spec::Condition(lit("grasped(blue_cube)"))]));
        let fb = t
            .expand_leaf(
                NodeId(1),
                vec![Spec::Sequence(vec![Spec::Action(grasp("blue_cube"))])],
            )
            .unwrap();
        t.validate().unwrap();
        assert_eq!(t.parent(NodeId(1)).unwrap().id, fb);
        assert_eq!(t.node(fb).unwrap().children[0].id, NodeId(1));
    }

    #[test]
    fn validate_rejects_empty_control_and_duplicate_ids() {
        let leaf = TreeNode {
            id: NodeId(1),
            kind: NodeKind::Condition(lit("p()")),
            children: vec![],
        };
        let dup = TreeNode {
            id: NodeId(0),
            kind: NodeKind::Sequence,
            children: vec![leaf.clone(), leaf],
        };
        assert!(BehaviorTree::from_root(dup).is_err());
        let empty = TreeNode {
            id: NodeId(0),
            kind: NodeKind::Fallback,
            children: vec![],
        };
        assert!(BehaviorTree::from_root(empty).is_err());
    }
}
