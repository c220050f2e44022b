use alloc::format;
use alloc::string::String;

use super::{BehaviorTree, NodeKind};

/// Graphviz rendering. Nodes are named by preorder position so the output
/// depends only on tree structure, not on node ids. Conditions carry a `?`
/// suffix, actions a `!` suffix and negation a `~` prefix.
pub fn to_dot(tree: &BehaviorTree) -> String {
    let nodes = tree.preorder();
    let mut out = String::from("digraph behavior_tree {\n");
    out.push_str("  node [fontname=\"Helvetica\"];\n");
    for (i, n) in nodes.iter().enumerate() {
        let (label, attrs) = match &n.kind {
            NodeKind::Sequence => (String::from("->"), "shape=box"),
            NodeKind::Fallback => (String::from("?"), "shape=box"),
            NodeKind::Condition(l) => (format!("{l}?"), "shape=ellipse"),
            NodeKind::Action(a) => (format!("{a}!"), "shape=box, style=rounded"),
        };
        out.push_str(&format!("  n{i} [label=\"{}\", {attrs}];\n", escape(&label)));
    }
    let mut pos = alloc::collections::BTreeMap::new();
    for (i, n) in nodes.iter().enumerate() {
        pos.insert(n.id, i);
    }
    for (i, n) in nodes.iter().enumerate() {
        for c in &n.children {
            out.push_str(&format!("  n{i} -> n{};\n", pos[&c.id]));
        }
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bt::Spec;
    use crate::domain::fixtures::lit;

    #[test]
    fn single_condition() {
        let t = BehaviorTree::new(Spec::Condition(lit("~on(any_object, blue_cube)")));
        assert_eq!(
            to_dot(&t),
            "digraph behavior_tree {\n  node [fontname=\"Helvetica\"];\n  n0 [label=\"~on(any_object, blue_cube)?\", shape=ellipse];\n}\n"
        );
    }
}
