use std::path::Path;

use btxp_core::domain::{
    parse_literal, parse_value, BindingValue, Domain, DomainError, Literal, ObjectRef, ParamDecl,
    ParamKind, PredicateDecl, SkillTemplate, TypeSpec,
};
use btxp_core::llm::{PromptExample, Role};
use serde::Deserialize;
use toml::Spanned;

use super::{check_schema, SchemaError};

pub const DOMAIN_SCHEMA: &str = "btxp-domain/1";

/// A parsed domain plus the prompt examples shipped with it.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainFile {
    pub domain: Domain,
    pub examples: Vec<PromptExample>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainDoc {
    schema: Spanned<String>,
    name: String,
    objects: Vec<ObjectGroup>,
    predicates: Vec<PredicateDoc>,
    #[serde(default)]
    skills: Vec<SkillDoc>,
    #[serde(default)]
    examples: Vec<ExampleDoc>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectGroup {
    category: String,
    names: Vec<Spanned<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PredicateDoc {
    name: Spanned<String>,
    #[serde(default)]
    params: Vec<String>,
    description: String,
    phrase: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SkillDoc {
    name: Spanned<String>,
    #[serde(default)]
    description: String,
    #[serde(default)]
    params: Vec<ParamDoc>,
    #[serde(default)]
    preconditions: Vec<Spanned<String>>,
    #[serde(default)]
    effects: Vec<Spanned<String>>,
    #[serde(default)]
    hidden_effects: Vec<Spanned<String>>,
    duration: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamDoc {
    name: Spanned<String>,
    #[serde(rename = "type")]
    ty: Option<String>,
    unit: Option<String>,
    choices: Option<Vec<String>>,
    default: Option<String>,
    #[serde(default)]
    about: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub(super) struct ExampleDoc {
    role: Spanned<String>,
    instruction: String,
    answer: String,
}

impl ExampleDoc {
    pub(super) fn build(&self, file: &Path, text: &str) -> Result<PromptExample, SchemaError> {
        let role = Role::from_key(self.role.get_ref()).ok_or_else(|| {
            SchemaError::at(
                file,
                text,
                self.role.span().start,
                format!(
                    "unknown example role `{}`; use goal, precondition or parameter",
                    self.role.get_ref()
                ),
            )
        })?;
        Ok(PromptExample {
            role,
            instruction: self.instruction.clone(),
            answer: self.answer.clone(),
        })
    }
}

pub(super) fn literal(file: &Path, text: &str, s: &Spanned<String>) -> Result<Literal, SchemaError> {
    parse_literal(s.get_ref())
        .map_err(|e| SchemaError::at(file, text, s.span().start, format!("`{}`: {e}", s.get_ref())))
}

fn param(file: &Path, text: &str, p: &ParamDoc) -> Result<ParamDecl, SchemaError> {
    let err = |m: String| SchemaError::at(file, text, p.name.span().start, m);
    let name = p.name.get_ref();
    let kind = match (&p.ty, &p.unit, &p.choices) {
        (Some(ty), None, None) => ParamKind::Object(TypeSpec::parse(ty)),
        (None, Some(unit), None) => ParamKind::Numeric { unit: unit.clone() },
        (None, None, Some(choices)) => ParamKind::Categorical {
            choices: choices.clone(),
        },
        _ => {
            return Err(err(format!(
                "parameter `{name}` needs exactly one of `type`, `unit` or `choices`"
            )))
        }
    };
    let default = match &p.default {
        None => None,
        Some(d) => {
            let v = parse_value(d).map_err(|e| err(format!("default of `{name}`: {e}")))?;
            match (&kind, &v) {
                (ParamKind::Numeric { unit }, BindingValue::Quantity { unit: u, .. }) if u == unit => {}
                (ParamKind::Categorical { choices }, BindingValue::Symbol(s)) if choices.contains(s) => {}
                _ => return Err(err(format!("default `{d}` does not fit parameter `{name}`"))),
            }
            Some(v)
        }
    };
    Ok(ParamDecl {
        name: name.clone(),
        kind,
        default,
        about: p.about.clone(),
    })
}

fn skill(file: &Path, text: &str, s: &SkillDoc) -> Result<SkillTemplate, SchemaError> {
    let params = s
        .params
        .iter()
        .map(|p| param(file, text, p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = SkillTemplate::new(s.name.get_ref(), params);
    t.description = s.description.clone();
    let lits = |v: &[Spanned<String>]| v.iter().map(|l| literal(file, text, l)).collect::<Result<Vec<_>, _>>();
    t.preconditions = lits(&s.preconditions)?;
    t.effects = lits(&s.effects)?;
    t.hidden_effects = lits(&s.hidden_effects)?;
    if let Some(d) = s.duration {
        t.duration = d;
    }
    Ok(t)
}

pub fn parse_domain(text: &str, file: &Path) -> Result<DomainFile, SchemaError> {
    let doc: DomainDoc = toml::from_str(text).map_err(|e| SchemaError::from_toml(file, text, &e))?;
    check_schema(file, text, &doc.schema, DOMAIN_SCHEMA)?;

    let mut objects = Vec::new();
    let mut object_spans = Vec::new();
    for g in &doc.objects {
        for n in &g.names {
            objects.push(ObjectRef::new(n.get_ref().clone(), g.category.clone()));
            object_spans.push(n);
        }
    }
    let predicates: Vec<PredicateDecl> = doc
        .predicates
        .iter()
        .map(|p| PredicateDecl {
            name: p.name.get_ref().clone(),
            params: p.params.iter().map(|t| TypeSpec::parse(t)).collect(),
            description: p.description.clone(),
            phrase: p.phrase.clone(),
        })
        .collect();
    let skills = doc
        .skills
        .iter()
        .map(|s| skill(file, text, s))
        .collect::<Result<Vec<_>, _>>()?;

    // Validate incrementally so an error can be pinned to the item that caused it.
    let name = doc.name.clone();
    Domain::new(name.clone(), objects.clone(), predicates.clone(), Vec::new()).map_err(|e| {
        let offset = match &e {
            DomainError::Duplicate(d) => object_spans
                .iter()
                .filter(|s| s.get_ref() == d)
                .nth(1)
                .map(|s| s.span().start)
                .or_else(|| {
                    doc.predicates
                        .iter()
                        .filter(|p| p.name.get_ref() == d)
                        .nth(1)
                        .map(|p| p.name.span().start)
                }),
            _ => None,
        };
        match offset {
            Some(o) => SchemaError::at(file, text, o, e.to_string()),
            None => SchemaError::new(file, None, e.to_string()),
        }
    })?;
    for i in 0..skills.len() {
        if let Err(e) = Domain::new(name.clone(), objects.clone(), predicates.clone(), skills[..=i].to_vec()) {
            return Err(SchemaError::at(
                file,
                text,
                doc.skills[i].name.span().start,
                format!("skill `{}`: {e}", skills[i].name),
            ));
        }
    }
    let domain = Domain::new(name, objects, predicates, skills).map_err(|e| SchemaError::new(file, None, e.to_string()))?;
    let examples = doc
        .examples
        .iter()
        .map(|e| e.build(file, text))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DomainFile { domain, examples })
}
