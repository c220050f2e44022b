use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use super::Role;
use crate::domain::{parse_action_call, parse_conjunction, Term};
use crate::sim::{ActionPattern, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionSettings {
    pub role: Role,
    /// Scenario the call belongs to, when there is one. Scripted and oracle
    /// backends key their answers on it.
    pub scenario: Option<String>,
    pub model: String,
    pub temperature: f32,
}

impl CompletionSettings {
    pub fn new(role: Role) -> Self {
        CompletionSettings {
            role,
            scenario: None,
            model: String::new(),
            temperature: 0.0,
        }
    }

    pub fn for_scenario(role: Role, scenario: &str) -> Self {
        CompletionSettings {
            scenario: Some(scenario.to_string()),
            ..Self::new(role)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("rate limited{}", .retry_after_secs.map(|s| format!(", retry after {s}s")).unwrap_or_default())]
    RateLimited { retry_after_secs: Option<u64> },
    #[error("no fixture for `{0}`")]
    MissingFixture(String),
    #[error("transport error: {0}")]
    Transport(String),
}

/// Text completion. Implementations must tolerate concurrent calls.
pub trait Backend {
    fn complete(&self, prompt: &str, settings: &CompletionSettings) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn complete(&self, prompt: &str, settings: &CompletionSettings) -> Result<String, BackendError> {
        (**self).complete(prompt, settings)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn complete(&self, prompt: &str, settings: &CompletionSettings) -> Result<String, BackendError> {
        (**self).complete(prompt, settings)
    }
}

/// Replays fixture answers keyed by `scenario/role`, or by the role key alone
/// for calls without a scenario. A key with several answers hands them out in
/// order and then repeats the last one.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    fixtures: BTreeMap<String, Vec<String>>,
    cursors: BTreeMap<String, AtomicUsize>,
    calls: AtomicUsize,
}

impl ScriptedBackend {
    pub fn new(fixtures: BTreeMap<String, Vec<String>>) -> Self {
        let cursors = fixtures.keys().map(|k| (k.clone(), AtomicUsize::new(0))).collect();
        ScriptedBackend {
            fixtures,
            cursors,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn key(scenario: Option<&str>, role: Role) -> String {
        match scenario {
            Some(s) => format!("{s}/{}", role.key()),
            None => role.key().to_string(),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Backend for ScriptedBackend {
    fn complete(&self, _prompt: &str, settings: &CompletionSettings) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let key = Self::key(settings.scenario.as_deref(), settings.role);
        let answers = self
            .fixtures
            .get(&key)
            .filter(|a| !a.is_empty())
            .ok_or_else(|| BackendError::MissingFixture(key.clone()))?;
        let i = self.cursors[&key].fetch_add(1, Ordering::SeqCst);
        Ok(answers[i.min(answers.len() - 1)].clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleGoal {
    pub instruction: String,
    pub answer: String,
}

/// Ground-truth fix for a failure: matched on the failing action and the
/// exact error message. `?name` captures of the pattern may appear in the
/// answer.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePrecondition {
    pub action: ActionPattern,
    pub message: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleParam {
    pub action: ActionPattern,
    pub slot: String,
    pub answer: String,
}

#[derive(Debug, Default, Clone, PartialEq)]
struct OracleEntries {
    goal: Option<String>,
    preconditions: Vec<OraclePrecondition>,
    params: Vec<OracleParam>,
}

/// Answers from ground truth by reading the same prompt a model would get.
#[derive(Debug, Default)]
pub struct OracleBackend {
    goals: Vec<OracleGoal>,
    scenarios: BTreeMap<String, OracleEntries>,
    calls: AtomicUsize,
}

const ORACLE_REASONING: &str = "REASONING: taken from the scenario ground truth.";

fn field<'a>(prompt: &'a str, prefix: &str) -> Option<&'a str> {
    prompt
        .lines()
        .find_map(|l| l.strip_prefix(prefix))
        .map(str::trim)
}

impl OracleBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_scenarios<'a>(scenarios: impl IntoIterator<Item = &'a Scenario>) -> Self {
        let mut o = Self::new();
        for s in scenarios {
            o.add_scenario(s);
        }
        o
    }

    pub fn add_goal(&mut self, instruction: &str, answer: &str) {
        self.goals.push(OracleGoal {
            instruction: instruction.to_string(),
            answer: answer.to_string(),
        });
    }

    pub fn add_scenario(&mut self, s: &Scenario) {
        let a = &s.oracle;
        self.scenarios.insert(
            s.id.clone(),
            OracleEntries {
                goal: a.goal.clone(),
                preconditions: a.preconditions.clone(),
                params: a.params.clone(),
            },
        );
        if let Some(g) = &a.goal {
            self.add_goal(&s.instruction, g);
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    fn entries<'a>(&'a self, settings: &CompletionSettings) -> Vec<&'a OracleEntries> {
        match settings.scenario.as_deref().and_then(|s| self.scenarios.get(s)) {
            Some(e) => Vec::from([e]),
            None => self.scenarios.values().collect(),
        }
    }

    fn answer(&self, prompt: &str, settings: &CompletionSettings) -> Result<String, BackendError> {
        let missing = |what: &str| BackendError::MissingFixture(format!("oracle {what}"));
        match settings.role {
            Role::GoalInterpretation => {
                if let Some(g) = settings
                    .scenario
                    .as_deref()
                    .and_then(|s| self.scenarios.get(s))
                    .and_then(|e| e.goal.clone())
                {
                    return Ok(g);
                }
                let instr = field(prompt, "Task instruction:").ok_or_else(|| missing("instruction"))?;
                self.goals
                    .iter()
                    .find(|g| g.instruction.trim() == instr)
                    .map(|g| g.answer.clone())
                    .ok_or_else(|| missing(&format!("goal for `{instr}`")))
            }
            Role::FailureResolution => {
                let action = field(prompt, "Failing action:").ok_or_else(|| missing("failing action"))?;
                let message = field(prompt, "Error message:").ok_or_else(|| missing("error message"))?;
                let call = parse_action_call(action).map_err(|_| missing("failing action"))?;
                for e in self.entries(settings) {
                    for p in &e.preconditions {
                        if p.message.trim() != message {
                            continue;
                        }
                        if let Some(captures) = p.action.match_call(&call) {
                            return substitute(&p.answer, &captures).ok_or_else(|| missing("answer"));
                        }
                    }
                }
                Err(missing(&format!("fix for `{action}`: {message}")))
            }
            Role::ParameterResolution => {
                let action = field(prompt, "Action:").ok_or_else(|| missing("action"))?;
                let slot = field(prompt, "Parameter:").ok_or_else(|| missing("parameter"))?;
                let call = parse_action_call(action).map_err(|_| missing("action"))?;
                self.entries(settings)
                    .into_iter()
                    .flat_map(|e| &e.params)
                    .find(|p| p.slot == slot && p.action.match_call(&call).is_some())
                    .map(|p| p.answer.clone())
                    .ok_or_else(|| missing(&format!("value for `{slot}` of `{action}`")))
            }
        }
    }
}

fn substitute(answer: &str, captures: &BTreeMap<String, String>) -> Option<String> {
    let lits = parse_conjunction(answer).ok()?;
    let mut out = Vec::with_capacity(lits.len());
    for mut l in lits {
        for a in &mut l.args {
            if let Term::Param(p) = a {
                *a = Term::Object(captures.get(p)?.clone());
            }
        }
        out.push(l.to_string());
    }
    Some(out.join(" & "))
}

impl Backend for OracleBackend {
    fn complete(&self, prompt: &str, settings: &CompletionSettings) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let answer = self.answer(prompt, settings)?;
        Ok(format!("ANSWER: {answer}\n{ORACLE_REASONING}\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn scripted_sequence_repeats_last() {
        let b = ScriptedBackend::new(BTreeMap::from([(
            "s1/precondition".to_string(),
            vec!["a".to_string(), "b".to_string()],
        )]));
        let st = CompletionSettings::for_scenario(Role::FailureResolution, "s1");
        let got: Vec<String> = (0..3).map(|_| b.complete("", &st).unwrap()).collect();
        assert_eq!(got, ["a", "b", "b"]);
        assert_eq!(b.calls(), 3);
        let other = CompletionSettings::for_scenario(Role::GoalInterpretation, "s1");
        assert_eq!(
            b.complete("", &other),
            Err(BackendError::MissingFixture("s1/goal".into()))
        );
    }

    #[test]
    fn oracle_substitutes_captures() {
        let mut o = OracleBackend::new();
        o.scenarios.insert(
            "s".into(),
            OracleEntries {
                goal: None,
                preconditions: vec![OraclePrecondition {
                    action: "grasp(?x)".parse().unwrap(),
                    message: "No collision free path found".into(),
                    answer: "~on(any_object, ?x)".into(),
                }],
                params: vec![],
            },
        );
        let prompt = "...\nFailing action: grasp(red_cube)\nError message: No collision free path found\n";
        let st = CompletionSettings::for_scenario(Role::FailureResolution, "s");
        let raw = o.complete(prompt, &st).unwrap();
        assert!(raw.starts_with("ANSWER: ~on(any_object, red_cube)\n"));
    }
}
