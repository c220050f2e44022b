use std::fs;
use std::path::{Path, PathBuf};

use btxp_core::domain::{parse_conjunction, Domain, Literal, WorldState};
use btxp_core::llm::{OracleParam, OraclePrecondition};
use btxp_core::sim::{ActionPattern, FaultMode, FaultRule, OracleAnswers, Scenario, ScenarioError};
use serde::Deserialize;
use toml::Spanned;

use super::domain::{literal, ExampleDoc};
use super::{check_schema, parse_domain, DomainFile, SchemaError};

pub const SCENARIO_SCHEMA: &str = "btxp-scenario/1";

/// Finds the domain a scenario names. `reference` is the `domain` field and
/// `from` the scenario file.
pub type DomainResolver<'a> = dyn Fn(&str, &Path) -> Result<DomainFile, SchemaError> + 'a;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    schema: Spanned<String>,
    id: String,
    #[serde(default)]
    title: String,
    domain: Spanned<String>,
    objects: Option<Spanned<Vec<String>>>,
    #[serde(default)]
    missing_params: Vec<String>,
    instruction: String,
    #[serde(default)]
    initial: Vec<Spanned<String>>,
    #[serde(default)]
    hidden: Vec<Spanned<String>>,
    expected_rounds: Option<usize>,
    #[serde(default)]
    faults: Vec<FaultDoc>,
    #[serde(default)]
    oracle: OracleDoc,
    #[serde(default)]
    examples: Vec<ExampleDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FaultDoc {
    id: Spanned<String>,
    action: Spanned<String>,
    #[serde(default)]
    guard: Vec<Spanned<String>>,
    #[serde(default)]
    hidden_guard: Vec<Spanned<String>>,
    #[serde(default)]
    clears_when: Vec<Spanned<String>>,
    message: Option<String>,
    mode: Option<Spanned<String>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OracleDoc {
    goal: Option<Spanned<String>>,
    #[serde(default)]
    preconditions: Vec<PreconditionDoc>,
    #[serde(default)]
    params: Vec<ParamAnswerDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PreconditionDoc {
    action: Spanned<String>,
    message: String,
    answer: Spanned<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamAnswerDoc {
    action: Spanned<String>,
    slot: String,
    answer: String,
}

fn pattern(file: &Path, text: &str, s: &Spanned<String>) -> Result<ActionPattern, SchemaError> {
    s.get_ref()
        .parse()
        .map_err(|e| SchemaError::at(file, text, s.span().start, format!("`{}`: {e}", s.get_ref())))
}

fn conjunction(file: &Path, text: &str, s: &Spanned<String>) -> Result<Vec<Literal>, SchemaError> {
    parse_conjunction(s.get_ref())
        .map_err(|e| SchemaError::at(file, text, s.span().start, format!("`{}`: {e}", s.get_ref())))
}

fn facts(
    file: &Path,
    text: &str,
    items: &[Spanned<String>],
    domain: Option<&Domain>,
) -> Result<WorldState, SchemaError> {
    let mut state = WorldState::new();
    for s in items {
        let at = |m: String| SchemaError::at(file, text, s.span().start, m);
        let l = literal(file, text, s)?;
        let atom = l
            .atom()
            .filter(|_| !l.negated)
            .ok_or_else(|| at(format!("`{l}` is not a ground positive fact")))?;
        if let Some(d) = domain {
            d.check_literal(&l).map_err(|e| at(e.to_string()))?;
        }
        state.insert(atom);
    }
    Ok(state)
}

/// Parses one scenario file, resolving its domain through `resolve`.
pub fn parse_scenario(text: &str, file: &Path, resolve: &DomainResolver<'_>) -> Result<Scenario, SchemaError> {
    let doc: ScenarioDoc = toml::from_str(text).map_err(|e| SchemaError::from_toml(file, text, &e))?;
    check_schema(file, text, &doc.schema, SCENARIO_SCHEMA)?;
    let DomainFile { domain, examples } = resolve(doc.domain.get_ref(), file)
        .map_err(|e| SchemaError::at(file, text, doc.domain.span().start, e.to_string()))?;
    let mut domain = match &doc.objects {
        Some(names) => domain
            .restrict_objects(names.get_ref())
            .map_err(|e| SchemaError::at(file, text, names.span().start, e.to_string()))?,
        None => domain,
    };
    domain.clear_defaults(&doc.missing_params);

    let initial = facts(file, text, &doc.initial, Some(&domain))?;
    let hidden = facts(file, text, &doc.hidden, None)?;

    let mut faults = Vec::new();
    for f in &doc.faults {
        let at = |m: String| SchemaError::at(file, text, f.id.span().start, m);
        let lits = |v: &[Spanned<String>]| v.iter().map(|l| literal(file, text, l)).collect::<Result<Vec<_>, _>>();
        let mode = match (f.mode.as_ref().map(|m| m.get_ref().as_str()), &f.message) {
            (None | Some("fail"), Some(m)) => FaultMode::Fail { message: m.clone() },
            (Some("suppress-effects"), None) => FaultMode::SuppressEffects,
            (None | Some("fail"), None) => return Err(at("a failing rule needs a `message`".into())),
            (Some("suppress-effects"), Some(_)) => {
                return Err(at("`suppress-effects` rules report the postcondition; drop `message`".into()))
            }
            (Some(other), _) => return Err(at(format!("unknown mode `{other}`; use fail or suppress-effects"))),
        };
        faults.push(FaultRule {
            id: f.id.get_ref().clone(),
            matcher: pattern(file, text, &f.action)?,
            guard: lits(&f.guard)?,
            hidden_guard: lits(&f.hidden_guard)?,
            clears_when: lits(&f.clears_when)?,
            mode,
        });
    }

    let mut oracle = OracleAnswers::default();
    if let Some(g) = &doc.oracle.goal {
        conjunction(file, text, g)?;
        oracle.goal = Some(g.get_ref().clone());
    }
    for p in &doc.oracle.preconditions {
        conjunction(file, text, &p.answer)?;
        oracle.preconditions.push(OraclePrecondition {
            action: pattern(file, text, &p.action)?,
            message: p.message.clone(),
            answer: p.answer.get_ref().clone(),
        });
    }
    for p in &doc.oracle.params {
        oracle.params.push(OracleParam {
            action: pattern(file, text, &p.action)?,
            slot: p.slot.clone(),
            answer: p.answer.clone(),
        });
    }

    let mut all_examples = examples;
    for e in &doc.examples {
        all_examples.push(e.build(file, text)?);
    }
    let scenario = Scenario {
        id: doc.id,
        title: doc.title,
        domain,
        instruction: doc.instruction,
        initial,
        hidden,
        faults,
        oracle,
        examples: all_examples,
        expected_rounds: doc.expected_rounds,
    };
    scenario.validate().map_err(|e| {
        let rule = match &e {
            ScenarioError::UncoveredFault(r) | ScenarioError::InvalidRule { rule: r, .. } => Some(r),
            ScenarioError::Domain(_) => None,
        };
        match rule.and_then(|r| doc.faults.iter().find(|f| f.id.get_ref() == r)) {
            Some(f) => SchemaError::at(file, text, f.id.span().start, e.to_string()),
            None => SchemaError::new(file, None, e.to_string()),
        }
    })?;
    Ok(scenario)
}

fn read(path: &Path) -> Result<String, SchemaError> {
    fs::read_to_string(path).map_err(|e| SchemaError::new(path, None, e.to_string()))
}

/// Resolves `domain = "..."`: a path ending in `.toml` is taken relative to
/// the scenario file; a bare name is looked up in `domains/` next to or one
/// level above the scenario directory, then in the bundled library.
pub(crate) fn default_resolver(reference: &str, from: &Path) -> Result<DomainFile, SchemaError> {
    let dir = from.parent().unwrap_or(Path::new("."));
    let candidates: Vec<PathBuf> = if reference.ends_with(".toml") {
        vec![dir.join(reference)]
    } else {
        vec![
            dir.join("domains").join(format!("{reference}.toml")),
            dir.join("..").join("domains").join(format!("{reference}.toml")),
        ]
    };
    for c in &candidates {
        if c.is_file() {
            return parse_domain(&read(c)?, c);
        }
    }
    crate::library::bundled_domain(reference).ok_or_else(|| {
        SchemaError::new(from, None, format!("domain `{reference}` not found"))
    })
}

/// Loads every `*.toml` scenario in a directory, or a single scenario file,
/// sorted by file name.
pub fn load_scenarios(path: &Path) -> Result<Vec<Scenario>, SchemaError> {
    let files: Vec<PathBuf> = if path.is_dir() {
        let mut v: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| SchemaError::new(path, None, e.to_string()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml") && p.is_file())
            .collect();
        v.sort();
        v
    } else {
        vec![path.to_path_buf()]
    };
    let mut out = Vec::with_capacity(files.len());
    for f in files {
        out.push(parse_scenario(&read(&f)?, &f, &default_resolver)?);
    }
    Ok(out)
}
