//! Language-model roles: prompt construction, strict answer parsing and the
//! backend contract.
//!
//! Answers use one grammar for all roles:
//!
//! ```text
//! ANSWER: on(blue_cube, green_cube) & ~grasped(any_object)
//! REASONING: optional free text, may span lines
//! ```
//!
//! Parameter answers carry a value instead: `ANSWER: 5.3 N` or
//! `ANSWER: shovel`.

mod backend;
mod parse;
mod prompt;

pub use backend::{
    Backend, BackendError, CompletionSettings, OracleBackend, OracleGoal, OracleParam,
    OraclePrecondition, ScriptedBackend,
};
pub use parse::{
    parse_goal_response, parse_param_response, parse_precondition_response, split_response,
};
pub use prompt::{build_prompt, output_format};

use alloc::string::String;
use alloc::vec::Vec;

use crate::domain::{BindingValue, Domain, GroundAction, ObjectRef, ParamKind, WorldState};
use crate::planner::GoalSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    GoalInterpretation,
    FailureResolution,
    ParameterResolution,
}

impl Role {
    /// Short key used in fixture maps and logs.
    pub fn key(self) -> &'static str {
        match self {
            Role::GoalInterpretation => "goal",
            Role::FailureResolution => "precondition",
            Role::ParameterResolution => "parameter",
        }
    }

    pub fn from_key(key: &str) -> Option<Role> {
        match key {
            "goal" => Some(Role::GoalInterpretation),
            "precondition" => Some(Role::FailureResolution),
            "parameter" => Some(Role::ParameterResolution),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatalogEntry {
    /// e.g. `on(cube, location|cube)`
    pub signature: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptExample {
    pub role: Role,
    pub instruction: String,
    pub answer: String,
}

/// The slot a parameter prompt asks about.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamRequest {
    pub action: GroundAction,
    pub slot: String,
    pub kind: ParamKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptSpec {
    pub role: Role,
    pub instruction: String,
    pub objects: Vec<ObjectRef>,
    pub condition_catalog: Vec<CatalogEntry>,
    pub examples: Vec<PromptExample>,
    pub scene_description: String,
    pub error_message: Option<String>,
    pub failing_action: Option<GroundAction>,
    pub param_request: Option<ParamRequest>,
}

impl PromptSpec {
    fn base(role: Role, domain: &Domain, state: &WorldState, instruction: &str, examples: &[PromptExample]) -> Self {
        PromptSpec {
            role,
            instruction: instruction.into(),
            objects: domain.objects().to_vec(),
            condition_catalog: catalog(domain),
            examples: examples.iter().filter(|e| e.role == role).cloned().collect(),
            scene_description: domain.scene_description(state),
            error_message: None,
            failing_action: None,
            param_request: None,
        }
    }

    pub fn goal(domain: &Domain, state: &WorldState, instruction: &str, examples: &[PromptExample]) -> Self {
        Self::base(Role::GoalInterpretation, domain, state, instruction, examples)
    }

    pub fn failure(
        domain: &Domain,
        state: &WorldState,
        instruction: &str,
        examples: &[PromptExample],
        action: &GroundAction,
        error_message: &str,
    ) -> Self {
        let mut s = Self::base(Role::FailureResolution, domain, state, instruction, examples);
        s.failing_action = Some(action.clone());
        s.error_message = Some(error_message.into());
        s
    }

    pub fn parameter(
        domain: &Domain,
        state: &WorldState,
        instruction: &str,
        examples: &[PromptExample],
        request: ParamRequest,
    ) -> Self {
        let mut s = Self::base(Role::ParameterResolution, domain, state, instruction, examples);
        s.param_request = Some(request);
        s
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if self.role == Role::FailureResolution
            && (self.error_message.is_none() || self.failing_action.is_none())
        {
            return Err(LlmError::InvalidSpec("failure prompt needs an error message and a failing action"));
        }
        if self.role == Role::ParameterResolution && self.param_request.is_none() {
            return Err(LlmError::InvalidSpec("parameter prompt needs a parameter request"));
        }
        if self.condition_catalog.iter().any(|c| c.description.trim().is_empty()) {
            return Err(LlmError::InvalidSpec("every catalog entry needs a description"));
        }
        Ok(())
    }
}

/// Predicate catalog in declaration order.
pub fn catalog(domain: &Domain) -> Vec<CatalogEntry> {
    domain
        .predicates()
        .iter()
        .map(|p| {
            let params: Vec<String> = p.params.iter().map(|t| t.0.join("|")).collect();
            CatalogEntry {
                signature: alloc::format!("{}({})", p.name, params.join(", ")),
                description: p.description.clone(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamValue {
    pub slot: String,
    pub value: BindingValue,
    /// False when a categorical answer is not among the declared choices.
    pub in_vocabulary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Parsed {
    Goals(GoalSpec),
    Preconditions(Vec<crate::domain::Literal>),
    Parameter(ParamValue),
}

/// One round trip with the model.
#[derive(Debug, Clone, PartialEq)]
pub struct LlmExchange {
    pub prompt: PromptSpec,
    pub prompt_text: String,
    pub raw_response: String,
    pub parsed: Option<Parsed>,
    pub error: Option<LlmError>,
    pub reasoning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LlmError {
    #[error("invalid prompt: {0}")]
    InvalidSpec(&'static str),
    #[error("malformed answer at {token}: {message}")]
    Format { message: String, token: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("answer `{token}` does not fit the domain: {source}")]
    Domain {
        token: String,
        source: crate::domain::DomainError,
    },
    #[error("slot `{slot}` expects unit {expected}, got {found}")]
    UnitMismatch {
        slot: String,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Backend(#[from] BackendError),
}
