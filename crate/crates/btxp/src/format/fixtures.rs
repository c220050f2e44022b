use std::collections::BTreeMap;
use std::path::Path;

use btxp_core::domain::{parse_conjunction, Literal, WorldState};
use btxp_core::llm::Role;
use serde::Deserialize;
use toml::Spanned;

use super::{check_schema, SchemaError};

pub const FIXTURES_SCHEMA: &str = "btxp-fixtures/1";
pub const INSTRUCTIONS_SCHEMA: &str = "btxp-instructions/1";

/// Scripted answers keyed `"{scenario}/{role}"`, ready for `ScriptedBackend`.
pub fn parse_fixtures(text: &str, file: &Path) -> Result<BTreeMap<String, Vec<String>>, SchemaError> {
    let table: toml::Table = toml::from_str(text).map_err(|e| SchemaError::from_toml(file, text, &e))?;
    match table.get("schema").and_then(|v| v.as_str()) {
        Some(FIXTURES_SCHEMA) => {}
        Some(other) => {
            return Err(SchemaError::new(
                file,
                None,
                format!("expected schema `{FIXTURES_SCHEMA}`, found `{other}`"),
            ))
        }
        None => return Err(SchemaError::new(file, None, "missing `schema`")),
    }
    let mut out = BTreeMap::new();
    for (scenario, roles) in table.iter().filter(|(k, _)| *k != "schema") {
        let roles = roles
            .as_table()
            .ok_or_else(|| SchemaError::new(file, None, format!("`{scenario}` must be a table of roles")))?;
        for (role, answers) in roles {
            if Role::from_key(role).is_none() {
                return Err(SchemaError::new(
                    file,
                    None,
                    format!("`{scenario}.{role}`: role must be goal, precondition or parameter"),
                ));
            }
            let answers: Vec<String> = answers
                .as_array()
                .and_then(|a| a.iter().map(|v| v.as_str().map(str::to_string)).collect())
                .ok_or_else(|| SchemaError::new(file, None, format!("`{scenario}.{role}` must be a list of strings")))?;
            if answers.is_empty() {
                return Err(SchemaError::new(file, None, format!("`{scenario}.{role}` is empty")));
            }
            out.insert(format!("{scenario}/{role}"), answers);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Easy,
    Medium,
    Hard,
}

impl Tier {
    pub fn name(self) -> &'static str {
        match self {
            Tier::Easy => "easy",
            Tier::Medium => "medium",
            Tier::Hard => "hard",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub tier: Tier,
    pub text: String,
    pub goal: Vec<Literal>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstructionSet {
    /// Name of the bundled domain the goals refer to.
    pub domain: String,
    pub initial: WorldState,
    pub instructions: Vec<Instruction>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstructionsDoc {
    schema: Spanned<String>,
    domain: String,
    #[serde(default)]
    initial: Vec<Spanned<String>>,
    instructions: Vec<InstructionDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstructionDoc {
    tier: Tier,
    text: String,
    goal: Spanned<String>,
}

fn conjunction(file: &Path, text: &str, s: &Spanned<String>) -> Result<Vec<Literal>, SchemaError> {
    parse_conjunction(s.get_ref()).map_err(|e| SchemaError::at(file, text, s.span().start, e.to_string()))
}

/// Parses a goal instruction set. Literals are checked for syntax only; the
/// caller checks them against the domain.
pub fn parse_instructions(text: &str, file: &Path) -> Result<InstructionSet, SchemaError> {
    let doc: InstructionsDoc = toml::from_str(text).map_err(|e| SchemaError::from_toml(file, text, &e))?;
    check_schema(file, text, &doc.schema, INSTRUCTIONS_SCHEMA)?;
    let mut initial = WorldState::new();
    for f in &doc.initial {
        for l in conjunction(file, text, f)? {
            let atom = l
                .atom()
                .filter(|_| !l.negated)
                .ok_or_else(|| SchemaError::at(file, text, f.span().start, "initial facts must be ground and positive"))?;
            initial.insert(atom);
        }
    }
    let instructions = doc
        .instructions
        .iter()
        .map(|i| {
            Ok(Instruction {
                tier: i.tier,
                text: i.text.clone(),
                goal: conjunction(file, text, &i.goal)?,
            })
        })
        .collect::<Result<_, SchemaError>>()?;
    Ok(InstructionSet {
        domain: doc.domain,
        initial,
        instructions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_keyed_by_scenario_and_role() {
        let text = "schema = \"btxp-fixtures/1\"\n[a]\ngoal = [\"ANSWER: x()\"]\nprecondition = [\"1\", \"2\"]\n";
        let f = parse_fixtures(text, Path::new("f.toml")).unwrap();
        assert_eq!(f["a/precondition"], ["1", "2"]);
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn fixtures_reject_unknown_role() {
        let text = "schema = \"btxp-fixtures/1\"\n[a]\nplan = [\"x\"]\n";
        assert!(parse_fixtures(text, Path::new("f.toml")).is_err());
    }

    #[test]
    fn instruction_literal_error_has_line() {
        let text = "schema = \"btxp-instructions/1\"\ndomain = \"cafe\"\n\n[[instructions]]\ntier = \"easy\"\ntext = \"t\"\ngoal = \"On(Coffee\"\n";
        let e = parse_instructions(text, Path::new("i.toml")).unwrap_err();
        assert_eq!(e.line, Some(7));
    }
}
