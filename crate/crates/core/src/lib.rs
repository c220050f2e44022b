//! Behavior tree policies built by backchaining from formal goals, and repaired
//! at runtime by asking a language model for missing action preconditions or
//! parameters.
//!
//! The crate is `no_std` (it needs `alloc`). Everything that touches files,
//! the network or a terminal lives in the companion `btxp` crate.
//!
//! Pipeline overview:
//!
//! 1. [`llm::build_prompt`] + a [`llm::Backend`] turn an instruction into a
//!    [`planner::GoalSpec`].
//! 2. [`planner::plan`] grows a [`bt::BehaviorTree`] from the goal conditions
//!    by simulating it against the visible [`domain::WorldState`].
//! 3. [`sim::execute`] runs the tree against a scenario with fault injection.
//! 4. On failure, [`resolver::resolve`] queries the backend for missing
//!    preconditions, inserts them in front of the failing action and lets the
//!    planner expand them.

#![no_std]
#![warn(clippy::std_instead_of_alloc)]
#![warn(clippy::std_instead_of_core)]

extern crate alloc;

pub mod bt;
pub mod domain;
pub mod llm;
pub mod planner;
pub mod resolver;
pub mod sim;
pub mod verify;

pub use bt::{BehaviorTree, NodeId, NodeKind, NodeStatus, TickTrace, TreeNode};
pub use domain::{Atom, Domain, GroundAction, Literal, Term, WorldState};
pub use planner::{GoalSpec, PlanConfig};
