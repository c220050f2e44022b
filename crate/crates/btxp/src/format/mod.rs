//! On-disk formats.
//!
//! | file | format | schema tag |
//! |------|--------|------------|
//! | domain | TOML | `btxp-domain/1` |
//! | scenario | TOML | `btxp-scenario/1` |
//! | scripted answers | TOML | `btxp-fixtures/1` |
//! | goal instruction set | TOML | `btxp-instructions/1` |
//! | tree | JSON | `btxp-tree/1` |
//! | execution trace | JSON lines, one record per tick | `btxp-trace/1` |
//! | resolution log | JSON | `btxp-records/1` |
//!
//! Literals inside every file use the answer grammar of the LLM parser, with
//! `?name` for skill parameters and fault-rule captures.

mod domain;
mod fixtures;
mod records;
mod scenario;
mod trace;
mod tree;

pub use domain::{parse_domain, DomainFile};
pub use fixtures::{parse_fixtures, parse_instructions, Instruction, InstructionSet, Tier};
pub use records::{records_to_json, run_summary};
pub use scenario::{load_scenarios, parse_scenario, DomainResolver};
pub use trace::trace_to_jsonl;
pub use tree::{parse_tree, tree_to_json, TreeParseError};

use std::fmt;
use std::path::{Path, PathBuf};

/// A file that does not follow its schema.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub file: PathBuf,
    /// 1-based line, when the problem can be pinned to one.
    pub line: Option<usize>,
    pub message: String,
}

impl SchemaError {
    pub fn new(file: &Path, line: Option<usize>, message: impl Into<String>) -> Self {
        SchemaError {
            file: file.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn at(file: &Path, text: &str, offset: usize, message: impl Into<String>) -> Self {
        Self::new(file, Some(line_of(text, offset)), message)
    }

    pub(crate) fn from_toml(file: &Path, text: &str, e: &toml::de::Error) -> Self {
        let line = e.span().map(|s| line_of(text, s.start));
        Self::new(file, line, e.message().trim().to_string())
    }
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{l}: {}", self.file.display(), self.message),
            None => write!(f, "{}: {}", self.file.display(), self.message),
        }
    }
}

impl std::error::Error for SchemaError {}

pub(crate) fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}

pub(crate) fn check_schema(
    file: &Path,
    text: &str,
    found: &toml::Spanned<String>,
    expected: &str,
) -> Result<(), SchemaError> {
    if found.get_ref() != expected {
        return Err(SchemaError::at(
            file,
            text,
            found.span().start,
            format!("expected schema `{expected}`, found `{}`", found.get_ref()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_are_one_based() {
        let t = "a\nb\nc";
        assert_eq!(line_of(t, 0), 1);
        assert_eq!(line_of(t, 2), 2);
        assert_eq!(line_of(t, 4), 3);
        assert_eq!(line_of(t, 99), 3);
    }
}
