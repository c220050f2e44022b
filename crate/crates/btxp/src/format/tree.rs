//! Tree files:
//!
//! ```json
//! {
//!   "schema": "btxp-tree/1",
//!   "root": {
//!     "id": 0, "kind": "sequence", "children": [
//!       { "id": 1, "kind": "condition", "payload": "on(blue_cube, green_cube)" },
//!       { "id": 2, "kind": "action",
//!         "payload": { "skill": "grasp", "args": [["obj", "blue_cube"], ["force", null]] } }
//!     ]
//!   }
//! }
//! ```
//!
//! `kind` is one of `sequence`, `fallback`, `condition`, `action`. Control
//! nodes carry `children`, leaves carry `payload`. A `null` argument is a
//! value slot that has not been resolved yet.

use std::fmt;

use btxp_core::bt::{BehaviorTree, NodeId, NodeKind, TreeNode};
use btxp_core::domain::{parse_literal, parse_value, GroundAction, Literal};
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer};
use serde_json::{json, Value};

pub const TREE_SCHEMA: &str = "btxp-tree/1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for TreeParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for TreeParseError {}

fn node_json(n: &TreeNode) -> Value {
    match &n.kind {
        NodeKind::Sequence | NodeKind::Fallback => json!({
            "id": n.id.0,
            "kind": if n.kind == NodeKind::Sequence { "sequence" } else { "fallback" },
            "children": n.children.iter().map(node_json).collect::<Vec<_>>(),
        }),
        NodeKind::Condition(l) => json!({ "id": n.id.0, "kind": "condition", "payload": l.to_string() }),
        NodeKind::Action(a) => json!({
            "id": n.id.0,
            "kind": "action",
            "payload": {
                "skill": a.skill,
                "args": a.args.iter().map(|(s, v)| json!([s, v.as_ref().map(|v| v.to_string())])).collect::<Vec<_>>(),
            },
        }),
    }
}

pub fn tree_to_json(tree: &BehaviorTree) -> String {
    let doc = json!({ "schema": TREE_SCHEMA, "root": node_json(tree.root()) });
    let mut s = serde_json::to_string_pretty(&doc).expect("tree json");
    s.push('\n');
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDoc {
    schema: String,
    root: NodeDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
enum KindDoc {
    Sequence,
    Fallback,
    Condition,
    Action,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: u32,
    kind: KindDoc,
    #[serde(default)]
    children: Vec<NodeDoc>,
    payload: Option<Payload>,
}

enum Payload {
    Condition(Literal),
    Action(GroundAction),
}

impl<'de> Deserialize<'de> for Payload {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Payload;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a condition literal string or an action object")
            }

            fn visit_str<E: de::Error>(self, s: &str) -> Result<Payload, E> {
                parse_literal(s)
                    .map(Payload::Condition)
                    .map_err(|e| E::custom(format!("condition `{s}`: {e}")))
            }

            fn visit_map<M: MapAccess<'de>>(self, mut m: M) -> Result<Payload, M::Error> {
                let mut skill: Option<String> = None;
                let mut args: Option<Vec<(String, Option<String>)>> = None;
                while let Some(k) = m.next_key::<String>()? {
                    match k.as_str() {
                        "skill" => skill = Some(m.next_value()?),
                        "args" => args = Some(m.next_value()?),
                        other => return Err(de::Error::unknown_field(other, &["skill", "args"])),
                    }
                }
                let skill = skill.ok_or_else(|| de::Error::missing_field("skill"))?;
                let mut bound = Vec::new();
                for (slot, v) in args.unwrap_or_default() {
                    let value = match v {
                        None => None,
                        Some(t) => Some(
                            parse_value(&t)
                                .map_err(|e| de::Error::custom(format!("value `{t}` of `{slot}`: {e}")))?,
                        ),
                    };
                    bound.push((slot, value));
                }
                Ok(Payload::Action(GroundAction::new(&skill, bound)))
            }
        }
        d.deserialize_any(V)
    }
}

fn build(doc: NodeDoc) -> Result<TreeNode, String> {
    let id = NodeId(doc.id);
    let kind = match (doc.kind, doc.payload) {
        (KindDoc::Sequence, None) => NodeKind::Sequence,
        (KindDoc::Fallback, None) => NodeKind::Fallback,
        (KindDoc::Condition, Some(Payload::Condition(l))) => NodeKind::Condition(l),
        (KindDoc::Action, Some(Payload::Action(a))) => NodeKind::Action(a),
        (KindDoc::Sequence | KindDoc::Fallback, Some(_)) => {
            return Err(format!("control node {id} cannot carry a payload"))
        }
        (KindDoc::Condition, _) => return Err(format!("condition {id} needs a literal payload")),
        (KindDoc::Action, _) => return Err(format!("action {id} needs an action payload")),
    };
    let children = doc.children.into_iter().map(build).collect::<Result<Vec<_>, _>>()?;
    Ok(TreeNode { id, kind, children })
}

/// Parses a tree file. Structural problems that serde cannot locate, such as
/// duplicate ids, are reported at line 1, column 1.
pub fn parse_tree(text: &str) -> Result<BehaviorTree, TreeParseError> {
    let doc: TreeDoc = serde_json::from_str(text).map_err(|e| TreeParseError {
        line: e.line(),
        column: e.column(),
        message: e.to_string().split(" at line ").next().unwrap_or_default().to_string(),
    })?;
    let whole = |message: String| TreeParseError {
        line: 1,
        column: 1,
        message,
    };
    if doc.schema != TREE_SCHEMA {
        return Err(whole(format!("expected schema `{TREE_SCHEMA}`, found `{}`", doc.schema)));
    }
    let root = build(doc.root).map_err(whole)?;
    BehaviorTree::from_root(root).map_err(|e| whole(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use btxp_core::bt::Spec;
    use btxp_core::domain::BindingValue;

    fn sample() -> BehaviorTree {
        let grasp = GroundAction::new(
            "grasp",
            vec![
                ("obj".into(), Some(BindingValue::Symbol("egg".into()))),
                ("force".into(), Some(BindingValue::Quantity { value: 5.3, unit: "N".into() })),
                ("speed".into(), None),
            ],
        );
        BehaviorTree::new(Spec::Fallback(vec![
            Spec::Condition(parse_literal("~on(any_object, blue_cube)").unwrap()),
            Spec::Sequence(vec![Spec::Action(grasp)]),
        ]))
    }

    #[test]
    fn round_trip() {
        let t = sample();
        let back = parse_tree(&tree_to_json(&t)).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.preorder_ids(), t.preorder_ids());
    }

    #[test]
    fn unclosed_node_reports_position() {
        let text = tree_to_json(&sample());
        let cut = &text[..text.len() - 8];
        let e = parse_tree(cut).unwrap_err();
        assert!(e.line > 1, "{e}");
    }

    #[test]
    fn bad_literal_reports_its_line() {
        let text = tree_to_json(&sample()).replace("~on(any_object, blue_cube)", "~on(any_object");
        let e = parse_tree(&text).unwrap_err();
        assert_eq!(e.line, 7, "{e}");
        assert!(e.message.contains("condition"), "{e}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = tree_to_json(&sample()).replace("\"id\": 2", "\"id\": 1");
        assert!(parse_tree(&text).is_err());
    }
}
