//! Backend selection shared by the command line and the bench harness.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use btxp_core::llm::{Backend, BackendError, CompletionSettings, OracleBackend, ScriptedBackend};
use btxp_core::sim::Scenario;

use crate::remote::RemoteBackend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BackendChoice {
    Scripted,
    Oracle,
    Remote,
}

pub type SharedBackend = Box<dyn Backend + Send + Sync>;

/// Hands out backends. Scripted and oracle backends are built fresh for each
/// run so that answer sequences and call counts never leak between runs; the
/// remote backend is shared so its in-flight limit applies across workers.
pub enum BackendSource {
    Scripted(BTreeMap<String, Vec<String>>),
    Oracle,
    Remote(Arc<RemoteBackend>),
}

impl BackendSource {
    pub fn fresh(&self, scenario: &Scenario) -> SharedBackend {
        match self {
            BackendSource::Scripted(f) => Box::new(ScriptedBackend::new(f.clone())),
            BackendSource::Oracle => Box::new(OracleBackend::from_scenarios([scenario])),
            BackendSource::Remote(r) => Box::new(Shared(r.clone())),
        }
    }

    pub fn choice(&self) -> BackendChoice {
        match self {
            BackendSource::Scripted(_) => BackendChoice::Scripted,
            BackendSource::Oracle => BackendChoice::Oracle,
            BackendSource::Remote(_) => BackendChoice::Remote,
        }
    }
}

struct Shared(Arc<RemoteBackend>);

impl Backend for Shared {
    fn complete(&self, prompt: &str, settings: &CompletionSettings) -> Result<String, BackendError> {
        self.0.complete(prompt, settings)
    }
}

/// Counts calls that reach the wrapped backend.
pub struct Counting<B> {
    inner: B,
    calls: AtomicUsize,
}

impl<B> Counting<B> {
    pub fn new(inner: B) -> Self {
        Counting {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl<B: Backend> Backend for Counting<B> {
    fn complete(&self, prompt: &str, settings: &CompletionSettings) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.inner.complete(prompt, settings)
    }
}
