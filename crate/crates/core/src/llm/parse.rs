use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{LlmError, ParamValue};
use crate::domain::{
    parse_conjunction, parse_value, BindingValue, Domain, DomainError, Literal, ParamDecl,
    ParamKind, SyntaxError, Term,
};
use crate::planner::GoalSpec;

fn format_error(message: &str, token: &str) -> LlmError {
    LlmError::Format {
        message: message.to_string(),
        token: token.to_string(),
    }
}

fn excerpt(line: &str) -> String {
    let s: String = line.trim().chars().take(40).collect();
    alloc::format!("`{s}`")
}

/// Splits a raw reply into its answer text and optional reasoning. Only
/// blank lines may precede the ANSWER line; after it, only blank lines and
/// one REASONING section are allowed.
pub fn split_response(raw: &str) -> Result<(String, Option<String>), LlmError> {
    let mut lines = raw.lines().skip_while(|l| l.trim().is_empty());
    let first = lines
        .next()
        .ok_or_else(|| format_error("expected `ANSWER:`", "end of input"))?;
    let answer = first
        .trim()
        .strip_prefix("ANSWER:")
        .ok_or_else(|| format_error("expected `ANSWER:`", &excerpt(first)))?
        .trim();
    if answer.is_empty() {
        return Err(format_error("empty answer", "`ANSWER:`"));
    }
    let mut reasoning: Option<String> = None;
    for line in lines {
        match &mut reasoning {
            Some(r) => {
                r.push('\n');
                r.push_str(line);
            }
            None if line.trim().is_empty() => {}
            None => match line.trim().strip_prefix("REASONING:") {
                Some(rest) => reasoning = Some(rest.trim_start().to_string()),
                None => return Err(format_error("unexpected text after the answer", &excerpt(line))),
            },
        }
    }
    let reasoning = reasoning
        .map(|r| r.trim().to_string())
        .filter(|r| !r.is_empty());
    Ok((answer.to_string(), reasoning))
}

fn syntax(e: SyntaxError) -> LlmError {
    LlmError::Format {
        message: alloc::format!("expected {} at column {}", e.expected, e.column),
        token: e.found,
    }
}

fn check(domain: &Domain, lits: &[Literal]) -> Result<(), LlmError> {
    for l in lits {
        if let Some(Term::Param(p)) = l.args.iter().find(|a| matches!(a, Term::Param(_))) {
            return Err(format_error("variables are not allowed", &alloc::format!("`?{p}`")));
        }
        match domain.check_literal(l) {
            Ok(()) => {}
            Err(DomainError::UnknownPredicate(n)) | Err(DomainError::UnknownObject(n)) => {
                return Err(LlmError::UnknownSymbol(n))
            }
            Err(source) => {
                return Err(LlmError::Domain {
                    token: l.to_string(),
                    source,
                })
            }
        }
    }
    Ok(())
}

fn parse_literals(raw: &str, domain: &Domain) -> Result<(Vec<Literal>, Option<String>), LlmError> {
    let (answer, reasoning) = split_response(raw)?;
    let lits = parse_conjunction(&answer).map_err(syntax)?;
    check(domain, &lits)?;
    Ok((lits, reasoning))
}

pub fn parse_goal_response(raw: &str, domain: &Domain) -> Result<(GoalSpec, Option<String>), LlmError> {
    let (lits, reasoning) = parse_literals(raw, domain)?;
    let goal = GoalSpec::new(lits).map_err(|_| format_error("empty answer", "`ANSWER:`"))?;
    Ok((goal, reasoning))
}

pub fn parse_precondition_response(
    raw: &str,
    domain: &Domain,
) -> Result<(Vec<Literal>, Option<String>), LlmError> {
    parse_literals(raw, domain)
}

pub fn parse_param_response(raw: &str, slot: &ParamDecl) -> Result<(ParamValue, Option<String>), LlmError> {
    let (answer, reasoning) = split_response(raw)?;
    let value = parse_value(&answer).map_err(syntax)?;
    let in_vocabulary = match (&slot.kind, &value) {
        (ParamKind::Numeric { unit }, BindingValue::Quantity { unit: found, .. }) => {
            if unit != found {
                return Err(LlmError::UnitMismatch {
                    slot: slot.name.clone(),
                    expected: unit.clone(),
                    found: found.clone(),
                });
            }
            true
        }
        (ParamKind::Categorical { choices }, BindingValue::Symbol(s)) => choices.contains(s),
        (ParamKind::Object(_), _) => {
            return Err(format_error("object slots are bound by the planner", &alloc::format!("`{}`", slot.name)))
        }
        (ParamKind::Numeric { .. }, BindingValue::Symbol(s)) => {
            return Err(format_error("expected a number with unit", &alloc::format!("`{s}`")))
        }
        (ParamKind::Categorical { .. }, v) => {
            return Err(format_error("expected a single word", &alloc::format!("`{v}`")))
        }
    };
    Ok((
        ParamValue {
            slot: slot.name.clone(),
            value,
            in_vocabulary,
        },
        reasoning,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::fixtures::{cube_domain, lit};
    use alloc::vec;

    #[test]
    fn answer_then_reasoning() {
        let d = cube_domain(&["blue_cube", "green_cube"]);
        let raw = "\nANSWER: on(blue_cube, green_cube)\n\nREASONING: stack it\nsecond line\n";
        let (g, r) = parse_goal_response(raw, &d).unwrap();
        assert_eq!(g.conjuncts(), &[lit("on(blue_cube, green_cube)")]);
        assert_eq!(r.as_deref(), Some("stack it\nsecond line"));
    }

    #[test]
    fn text_before_answer_rejected() {
        let d = cube_domain(&["blue_cube"]);
        let err = parse_goal_response("Sure!\nANSWER: grasped(blue_cube)", &d).unwrap_err();
        assert_eq!(
            err,
            LlmError::Format {
                message: "expected `ANSWER:`".into(),
                token: "`Sure!`".into()
            }
        );
    }

    #[test]
    fn unknown_object_named() {
        let d = cube_domain(&["blue_cube"]);
        let err = parse_goal_response("ANSWER: grasped(fries)", &d).unwrap_err();
        assert_eq!(err, LlmError::UnknownSymbol("fries".into()));
    }

    #[test]
    fn empty_answer_is_format_error() {
        let d = cube_domain(&["blue_cube"]);
        assert!(matches!(
            parse_precondition_response("ANSWER:   ", &d),
            Err(LlmError::Format { .. })
        ));
    }

    #[test]
    fn wildcard_precondition() {
        let d = cube_domain(&["blue_cube"]);
        let (l, _) = parse_precondition_response("ANSWER: ~on(any_object, blue_cube)", &d).unwrap();
        assert_eq!(l, vec![lit("~on(any_object, blue_cube)")]);
    }

    #[test]
    fn params() {
        let force = ParamDecl {
            name: "force".into(),
            kind: ParamKind::Numeric { unit: "N".into() },
            default: None,
            about: vec![],
        };
        let (v, _) = parse_param_response("ANSWER: 5.3 N", &force).unwrap();
        assert_eq!(v.value, BindingValue::Quantity { value: 5.3, unit: "N".into() });
        assert!(matches!(parse_param_response("ANSWER: fast", &force), Err(LlmError::Format { .. })));
        assert!(matches!(
            parse_param_response("ANSWER: 5 kg", &force),
            Err(LlmError::UnitMismatch { .. })
        ));
        let tool = ParamDecl {
            name: "tool".into(),
            kind: ParamKind::Categorical { choices: vec!["shovel".into()] },
            default: None,
            about: vec![],
        };
        assert!(parse_param_response("ANSWER: shovel", &tool).unwrap().0.in_vocabulary);
        assert!(!parse_param_response("ANSWER: spoon", &tool).unwrap().0.in_vocabulary);
    }
}
