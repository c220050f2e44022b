//! Domains, scenarios, scripted answers and the cafe instruction set shipped
//! inside the binary.

use std::collections::BTreeMap;
use std::path::Path;

use btxp_core::sim::Scenario;

use crate::format::{parse_domain, parse_fixtures, parse_instructions, parse_scenario, DomainFile, InstructionSet, SchemaError};

macro_rules! bundle {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../data/", $name)))),*]
    };
}

const DOMAINS: &[(&str, &str)] = bundle!(
    "domains/cafe.toml",
    "domains/cube.toml",
    "domains/household.toml",
    "domains/lab.toml",
    "domains/service.toml",
);

const SCENARIOS: &[(&str, &str)] = bundle!(
    "scenarios/fig3.toml",
    "scenarios/t4-01-blocked-cube.toml",
    "scenarios/t4-02-two-blockers.toml",
    "scenarios/t4-03-upside-down-cup.toml",
    "scenarios/t4-04-closed-centrifuge.toml",
    "scenarios/t4-05-locked-cupboard.toml",
    "scenarios/t4-06-unknown-banana.toml",
    "scenarios/t4-07-banana-out-of-reach.toml",
    "scenarios/t4-08-no-coffee.toml",
    "scenarios/t4-09-fries-elsewhere.toml",
    "scenarios/t4-10-sweep-without-mop.toml",
    "scenarios/param-01-egg-hammer-force.toml",
    "scenarios/param-02-pillow-speed.toml",
    "scenarios/param-03-first-aid-speed.toml",
    "scenarios/param-04-baby-speed.toml",
    "scenarios/param-05-sand-tool.toml",
    "scenarios/param-06-plate-tool.toml",
);

const FIXTURES: (&str, &str) = ("fixtures/scripted.toml", include_str!("../data/fixtures/scripted.toml"));
const INSTRUCTIONS: (&str, &str) = (
    "instructions/cafe_goals.toml",
    include_str!("../data/instructions/cafe_goals.toml"),
);

fn bundled_path(name: &str) -> std::path::PathBuf {
    Path::new("<bundled>").join(name)
}

pub fn domain_names() -> Vec<&'static str> {
    DOMAINS
        .iter()
        .map(|(p, _)| p.trim_start_matches("domains/").trim_end_matches(".toml"))
        .collect()
}

/// A bundled domain by name, e.g. `cube`.
pub fn bundled_domain(name: &str) -> Option<DomainFile> {
    let path = format!("domains/{name}.toml");
    let (p, text) = DOMAINS.iter().find(|(p, _)| *p == path)?;
    Some(parse_domain(text, &bundled_path(p)).expect("bundled domain parses"))
}

fn resolve_bundled(reference: &str, from: &Path) -> Result<DomainFile, SchemaError> {
    bundled_domain(reference).ok_or_else(|| SchemaError::new(from, None, format!("no bundled domain `{reference}`")))
}

/// All bundled scenarios in a fixed order: the worked example, the failure
/// set, then the parameter set.
pub fn bundled_scenarios() -> Vec<Scenario> {
    SCENARIOS
        .iter()
        .map(|(p, text)| parse_scenario(text, &bundled_path(p), &resolve_bundled).expect("bundled scenario parses"))
        .collect()
}

pub fn bundled_scenario(id: &str) -> Option<Scenario> {
    bundled_scenarios().into_iter().find(|s| s.id == id)
}

pub fn scripted_fixtures() -> BTreeMap<String, Vec<String>> {
    parse_fixtures(FIXTURES.1, &bundled_path(FIXTURES.0)).expect("bundled fixtures parse")
}

pub fn cafe_instructions() -> InstructionSet {
    parse_instructions(INSTRUCTIONS.1, &bundled_path(INSTRUCTIONS.0)).expect("bundled instructions parse")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Example,
    Preconditions,
    Parameters,
}

impl Suite {
    pub fn of(id: &str) -> Suite {
        if id.starts_with("param-") {
            Suite::Parameters
        } else if id.starts_with("t4-") {
            Suite::Preconditions
        } else {
            Suite::Example
        }
    }
}
