//! Objects, predicates and skills, plus the closed-world state they act on.
//!
//! A [`WorldState`] stores only ground positive facts; a negated literal holds
//! when its positive form is absent. The wildcard term `any_object` is
//! existential under a positive literal and universal under negation, so
//! `~on(any_object, blue_cube)` reads "nothing is on the blue cube".

mod syntax;

pub use syntax::{
    parse_action_call, parse_conjunction, parse_literal, parse_value, ActionCall, SyntaxError,
    ValueToken,
};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

pub const WILDCARD: &str = "any_object";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown skill `{0}`")]
    UnknownSkill(String),
    #[error("`{predicate}` takes {expected} argument(s), got {found}")]
    ArityMismatch {
        predicate: String,
        expected: usize,
        found: usize,
    },
    #[error("`{object}` ({category}) is not a valid argument {position} of `{name}`")]
    TypeMismatch {
        name: String,
        position: usize,
        object: String,
        category: String,
    },
    #[error("slot `{slot}` of `{skill}` is unbound")]
    UnboundSlot { skill: String, slot: String },
    #[error("`{0}` is declared twice")]
    Duplicate(String),
    #[error("invalid template in skill `{skill}`: {reason}")]
    InvalidTemplate { skill: String, reason: String },
    #[error("literal `{0}` is not ground")]
    NotGround(String),
}

/// A list of accepted categories in preference order; empty accepts anything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeSpec(pub Vec<String>);

impl TypeSpec {
    pub fn any() -> Self {
        TypeSpec(Vec::new())
    }

    /// Parses `cube|cup`; `any` or the empty string accept every category.
    pub fn parse(text: &str) -> Self {
        let t = text.trim();
        if t.is_empty() || t == "any" {
            return TypeSpec::any();
        }
        TypeSpec(t.split('|').map(|s| s.trim().to_string()).collect())
    }

    fn rank(&self, category: &str) -> Option<usize> {
        if self.0.is_empty() {
            Some(0)
        } else {
            self.0.iter().position(|c| c == category)
        }
    }

    pub fn accepts(&self, category: &str) -> bool {
        self.rank(category).is_some()
    }
}

impl fmt::Display for TypeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            f.write_str("any")
        } else {
            f.write_str(&self.0.join("|"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectRef {
    pub name: String,
    pub category: String,
}

impl ObjectRef {
    pub fn new(name: impl Into<String>, category: impl Into<String>) -> Self {
        ObjectRef {
            name: name.into(),
            category: category.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Object(String),
    Wildcard,
    /// A skill parameter; only valid inside skill templates.
    Param(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Object(o) => f.write_str(o),
            Term::Wildcard => f.write_str(WILDCARD),
            Term::Param(p) => write!(f, "?{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    pub predicate: String,
    pub args: Vec<Term>,
    pub negated: bool,
}

impl Literal {
    pub fn new(predicate: impl Into<String>, args: Vec<Term>, negated: bool) -> Self {
        Literal {
            predicate: predicate.into(),
            args,
            negated,
        }
    }

    /// Positive ground literal over object names.
    pub fn fact(predicate: &str, args: &[&str]) -> Self {
        Literal::new(
            predicate,
            args.iter().map(|a| Term::Object((*a).to_string())).collect(),
            false,
        )
    }

    pub fn negate(&self) -> Self {
        let mut l = self.clone();
        l.negated = !l.negated;
        l
    }

    pub fn positive(&self) -> Self {
        let mut l = self.clone();
        l.negated = false;
        l
    }

    pub fn has_wildcard(&self) -> bool {
        self.args.iter().any(|a| matches!(a, Term::Wildcard))
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|a| matches!(a, Term::Object(_)))
    }

    fn has_params(&self) -> bool {
        self.args.iter().any(|a| matches!(a, Term::Param(_)))
    }

    /// The fact this literal talks about, if it is ground.
    pub fn atom(&self) -> Option<Atom> {
        let args = self
            .args
            .iter()
            .map(|a| match a {
                Term::Object(o) => Some(o.clone()),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(Atom {
            predicate: self.predicate.clone(),
            args,
        })
    }

    fn pattern(&self) -> Vec<Option<&str>> {
        self.args
            .iter()
            .map(|a| match a {
                Term::Object(o) => Some(o.as_str()),
                _ => None,
            })
            .collect()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("~")?;
        }
        f.write_str(&self.predicate)?;
        f.write_str("(")?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

impl FromStr for Literal {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_literal(s)
    }
}

/// A ground positive fact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: &str, args: &[&str]) -> Self {
        Atom {
            predicate: predicate.to_string(),
            args: args.iter().map(|a| (*a).to_string()).collect(),
        }
    }

    pub fn literal(&self) -> Literal {
        Literal::new(
            self.predicate.clone(),
            self.args.iter().cloned().map(Term::Object).collect(),
            false,
        )
    }

    fn matches(&self, predicate: &str, pattern: &[Option<&str>]) -> bool {
        self.predicate == predicate
            && self.args.len() == pattern.len()
            && self
                .args
                .iter()
                .zip(pattern)
                .all(|(a, p)| p.map_or(true, |p| p == a))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(", "))
    }
}

/// Set of true ground facts under the closed-world assumption.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WorldState {
    facts: BTreeSet<Atom>,
}

impl WorldState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Self {
        WorldState {
            facts: atoms.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, atom: Atom) -> bool {
        self.facts.insert(atom)
    }

    pub fn remove(&mut self, atom: &Atom) -> bool {
        self.facts.remove(atom)
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.facts.contains(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.facts.iter()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Truth of `lit` without vocabulary checks; used for hidden facts that
    /// the visible domain does not declare. Parameters never match.
    pub fn satisfies(&self, lit: &Literal) -> bool {
        if lit.has_params() {
            return false;
        }
        let some = self.matching(&lit.predicate, &lit.pattern()).next().is_some();
        some != lit.negated
    }

    fn matching<'a>(
        &'a self,
        predicate: &'a str,
        pattern: &'a [Option<&'a str>],
    ) -> impl Iterator<Item = &'a Atom> + 'a {
        self.facts
            .iter()
            .filter(move |a| a.matches(predicate, pattern))
    }

    fn remove_matching(&mut self, predicate: &str, pattern: &[Option<&str>]) {
        self.facts.retain(|a| !a.matches(predicate, pattern));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredicateDecl {
    pub name: String,
    pub params: Vec<TypeSpec>,
    /// One-line meaning shown to the language model.
    pub description: String,
    /// Scene phrase with `{0}`, `{1}` placeholders, e.g. `{0} is on {1}`.
    pub phrase: Option<String>,
}

impl PredicateDecl {
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BindingValue {
    /// An object name or a categorical choice.
    Symbol(String),
    Quantity { value: f64, unit: String },
}

impl BindingValue {
    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            BindingValue::Symbol(s) => Some(s),
            BindingValue::Quantity { .. } => None,
        }
    }
}

impl fmt::Display for BindingValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BindingValue::Symbol(s) => f.write_str(s),
            BindingValue::Quantity { value, unit } => write!(f, "{value} {unit}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamKind {
    Object(TypeSpec),
    Numeric { unit: String },
    Categorical { choices: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDecl {
    pub name: String,
    pub kind: ParamKind,
    /// Used when grounding unless the scenario clears it.
    pub default: Option<BindingValue>,
    /// Object slots this value depends on; values propagate across actions
    /// that agree on them.
    pub about: Vec<String>,
}

impl ParamDecl {
    pub fn object(name: &str, ty: &str) -> Self {
        ParamDecl {
            name: name.to_string(),
            kind: ParamKind::Object(TypeSpec::parse(ty)),
            default: None,
            about: Vec::new(),
        }
    }

    pub fn is_object(&self) -> bool {
        matches!(self.kind, ParamKind::Object(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkillTemplate {
    pub name: String,
    pub params: Vec<ParamDecl>,
    pub preconditions: Vec<Literal>,
    /// Add (positive) and delete (negated) effects. Delete effects may use
    /// the wildcard to clear every matching fact.
    pub effects: Vec<Literal>,
    /// Side-channel effects on the hidden scenario state.
    pub hidden_effects: Vec<Literal>,
    /// Ticks the action runs before completing.
    pub duration: u32,
    pub description: String,
}

impl SkillTemplate {
    pub fn new(name: &str, params: Vec<ParamDecl>) -> Self {
        SkillTemplate {
            name: name.to_string(),
            params,
            preconditions: Vec::new(),
            effects: Vec::new(),
            hidden_effects: Vec::new(),
            duration: 1,
            description: String::new(),
        }
    }

    pub fn param(&self, name: &str) -> Option<&ParamDecl> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// A skill with (some of) its slots bound, in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundAction {
    pub skill: String,
    pub args: Vec<(String, Option<BindingValue>)>,
}

impl GroundAction {
    pub fn new(skill: &str, args: Vec<(String, Option<BindingValue>)>) -> Self {
        GroundAction {
            skill: skill.to_string(),
            args,
        }
    }

    pub fn value(&self, slot: &str) -> Option<&BindingValue> {
        self.args
            .iter()
            .find(|(s, _)| s == slot)
            .and_then(|(_, v)| v.as_ref())
    }

    pub fn bind(&mut self, slot: &str, value: BindingValue) -> bool {
        match self.args.iter_mut().find(|(s, _)| s == slot) {
            Some((_, v)) => {
                *v = Some(value);
                true
            }
            None => false,
        }
    }

    pub fn unbound_slots(&self) -> impl Iterator<Item = &str> {
        self.args
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(s, _)| s.as_str())
    }
}

impl fmt::Display for GroundAction {
    /// Positional form, e.g. `grasp(blue_cube)` or `PickUp(Egg, ?force)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.skill)?;
        for (i, (slot, v)) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match v {
                Some(v) => write!(f, "{v}")?,
                None => write!(f, "?{slot}")?,
            }
        }
        f.write_str(")")
    }
}

/// How an achiever binds one slot before grounding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SlotBinding {
    Object(String),
    /// The slot must name an object that currently makes the goal false,
    /// e.g. the blocker when achieving `~on(any_object, blue_cube)`.
    Witness {
        predicate: String,
        pattern: Vec<Option<String>>,
        position: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Achiever {
    pub skill: String,
    pub binding: BTreeMap<String, SlotBinding>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub name: String,
    objects: Vec<ObjectRef>,
    predicates: Vec<PredicateDecl>,
    skills: Vec<SkillTemplate>,
}

impl Domain {
    pub fn new(
        name: impl Into<String>,
        objects: Vec<ObjectRef>,
        predicates: Vec<PredicateDecl>,
        skills: Vec<SkillTemplate>,
    ) -> Result<Self, DomainError> {
        let d = Domain {
            name: name.into(),
            objects,
            predicates,
            skills,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<(), DomainError> {
        let mut seen = BTreeSet::new();
        for o in &self.objects {
            if o.name == WILDCARD || !seen.insert(o.name.as_str()) {
                return Err(DomainError::Duplicate(o.name.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for p in &self.predicates {
            if !seen.insert(p.name.as_str()) {
                return Err(DomainError::Duplicate(p.name.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for s in &self.skills {
            if !seen.insert(s.name.as_str()) {
                return Err(DomainError::Duplicate(s.name.clone()));
            }
            self.validate_skill(s)?;
        }
        Ok(())
    }

    fn validate_skill(&self, s: &SkillTemplate) -> Result<(), DomainError> {
        let invalid = |reason: String| DomainError::InvalidTemplate {
            skill: s.name.clone(),
            reason,
        };
        let mut names = BTreeSet::new();
        for p in &s.params {
            if !names.insert(p.name.as_str()) {
                return Err(invalid(format!("parameter `{}` declared twice", p.name)));
            }
            for a in &p.about {
                if !s.param(a).is_some_and(ParamDecl::is_object) {
                    return Err(invalid(format!(
                        "`{}` is about `{a}`, which is not an object parameter",
                        p.name
                    )));
                }
            }
        }
        if s.duration == 0 {
            return Err(invalid("duration must be at least one tick".to_string()));
        }
        let groups = [
            ("precondition", &s.preconditions),
            ("effect", &s.effects),
            ("hidden effect", &s.hidden_effects),
        ];
        for (what, lits) in groups {
            for lit in lits {
                // hidden facts stay out of the vocabulary the planner and prompts see
                if what != "hidden effect" {
                    let decl = self.predicate_decl(&lit.predicate)?;
                    if decl.arity() != lit.args.len() {
                        return Err(DomainError::ArityMismatch {
                            predicate: lit.predicate.clone(),
                            expected: decl.arity(),
                            found: lit.args.len(),
                        });
                    }
                }
                for a in &lit.args {
                    match a {
                        Term::Param(p) => {
                            if !s.param(p).is_some_and(ParamDecl::is_object) {
                                return Err(invalid(format!(
                                    "{what} `{lit}` uses undeclared object parameter `{p}`"
                                )));
                            }
                        }
                        Term::Object(o) => {
                            self.object(o)?;
                        }
                        Term::Wildcard => {
                            if what != "precondition" && !lit.negated {
                                return Err(invalid(format!(
                                    "positive {what} `{lit}` cannot use the wildcard"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn objects(&self) -> &[ObjectRef] {
        &self.objects
    }

    pub fn predicates(&self) -> &[PredicateDecl] {
        &self.predicates
    }

    pub fn skills(&self) -> &[SkillTemplate] {
        &self.skills
    }

    pub fn object(&self, name: &str) -> Result<&ObjectRef, DomainError> {
        self.objects
            .iter()
            .find(|o| o.name == name)
            .ok_or_else(|| DomainError::UnknownObject(name.to_string()))
    }

    pub fn predicate_decl(&self, name: &str) -> Result<&PredicateDecl, DomainError> {
        self.predicates
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| DomainError::UnknownPredicate(name.to_string()))
    }

    pub fn skill(&self, name: &str) -> Result<&SkillTemplate, DomainError> {
        self.skills
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| DomainError::UnknownSkill(name.to_string()))
    }

    /// Same vocabulary and skills, restricted to the named objects.
    pub fn restrict_objects(&self, names: &[String]) -> Result<Domain, DomainError> {
        let mut objects = Vec::new();
        for n in names {
            objects.push(self.object(n)?.clone());
        }
        let mut d = self.clone();
        d.objects = objects;
        // templates may mention fixed objects; they must survive the cut
        d.validate()?;
        Ok(d)
    }

    /// Drops the default of every parameter slot in `slots`, so planning
    /// leaves those slots unbound.
    pub fn clear_defaults(&mut self, slots: &[String]) {
        for s in &mut self.skills {
            for p in &mut s.params {
                if slots.iter().any(|x| *x == p.name) {
                    p.default = None;
                }
            }
        }
    }

    /// Objects accepted by `ty`, ordered by category preference, then name.
    pub fn objects_of(&self, ty: &TypeSpec) -> Vec<&ObjectRef> {
        let mut out: Vec<(usize, &ObjectRef)> = self
            .objects
            .iter()
            .filter_map(|o| ty.rank(&o.category).map(|r| (r, o)))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.name.cmp(&b.1.name)));
        out.into_iter().map(|(_, o)| o).collect()
    }

    /// Checks predicate, arity and argument types of a state-level literal
    /// (objects and wildcards only).
    pub fn check_literal(&self, lit: &Literal) -> Result<(), DomainError> {
        let decl = self.predicate_decl(&lit.predicate)?;
        if decl.arity() != lit.args.len() {
            return Err(DomainError::ArityMismatch {
                predicate: lit.predicate.clone(),
                expected: decl.arity(),
                found: lit.args.len(),
            });
        }
        for (i, (a, ty)) in lit.args.iter().zip(&decl.params).enumerate() {
            match a {
                Term::Object(o) => {
                    let obj = self.object(o)?;
                    if !ty.accepts(&obj.category) {
                        return Err(DomainError::TypeMismatch {
                            name: lit.predicate.clone(),
                            position: i,
                            object: o.clone(),
                            category: obj.category.clone(),
                        });
                    }
                }
                Term::Wildcard => {}
                Term::Param(_) => return Err(DomainError::NotGround(lit.to_string())),
            }
        }
        Ok(())
    }

    /// Truth of `lit` in `state` under the closed world.
    pub fn holds(&self, state: &WorldState, lit: &Literal) -> Result<bool, DomainError> {
        let decl = self.predicate_decl(&lit.predicate)?;
        if decl.arity() != lit.args.len() {
            return Err(DomainError::ArityMismatch {
                predicate: lit.predicate.clone(),
                expected: decl.arity(),
                found: lit.args.len(),
            });
        }
        if lit.has_params() {
            return Err(DomainError::NotGround(lit.to_string()));
        }
        let pattern = lit.pattern();
        let some = state.matching(&lit.predicate, &pattern).next().is_some();
        Ok(some != lit.negated)
    }

    /// Substitutes the action's bindings into a skill template literal.
    pub fn ground_literal(
        &self,
        template: &Literal,
        action: &GroundAction,
    ) -> Result<Literal, DomainError> {
        let mut args = Vec::with_capacity(template.args.len());
        for a in &template.args {
            args.push(match a {
                Term::Param(p) => match action.value(p) {
                    Some(BindingValue::Symbol(o)) => Term::Object(o.clone()),
                    _ => {
                        return Err(DomainError::UnboundSlot {
                            skill: action.skill.clone(),
                            slot: p.clone(),
                        })
                    }
                },
                other => other.clone(),
            });
        }
        Ok(Literal::new(template.predicate.clone(), args, template.negated))
    }

    pub fn preconditions_of(&self, action: &GroundAction) -> Result<Vec<Literal>, DomainError> {
        let skill = self.skill(&action.skill)?;
        skill
            .preconditions
            .iter()
            .map(|p| self.ground_literal(p, action))
            .collect()
    }

    pub fn effects_of(&self, action: &GroundAction) -> Result<Vec<Literal>, DomainError> {
        let skill = self.skill(&action.skill)?;
        skill
            .effects
            .iter()
            .map(|p| self.ground_literal(p, action))
            .collect()
    }

    /// True when every declared precondition of `action` holds.
    pub fn applicable(&self, state: &WorldState, action: &GroundAction) -> Result<bool, DomainError> {
        for p in self.preconditions_of(action)? {
            if !self.holds(state, &p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Delete-then-add application of the action's effects.
    pub fn apply_effects(
        &self,
        state: &WorldState,
        action: &GroundAction,
    ) -> Result<WorldState, DomainError> {
        let effects = self.effects_of(action)?;
        Ok(apply_literals(state, &effects))
    }

    /// Applies the skill's side-channel effects to a hidden state.
    pub fn apply_hidden_effects(
        &self,
        hidden: &WorldState,
        action: &GroundAction,
    ) -> Result<WorldState, DomainError> {
        let skill = self.skill(&action.skill)?;
        let effects = skill
            .hidden_effects
            .iter()
            .map(|p| self.ground_literal(p, action))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(apply_literals(hidden, &effects))
    }

    /// Skills with an effect that unifies with `lit`, in declaration order,
    /// then by binding.
    pub fn achievers(&self, lit: &Literal) -> Vec<Achiever> {
        let mut out = Vec::new();
        for skill in &self.skills {
            let mut found: Vec<BTreeMap<String, SlotBinding>> = Vec::new();
            for eff in &skill.effects {
                if let Some(b) = unify_effect(skill, eff, lit, self) {
                    if !found.contains(&b) {
                        found.push(b);
                    }
                }
            }
            found.sort();
            out.extend(found.into_iter().map(|binding| Achiever {
                skill: skill.name.clone(),
                binding,
            }));
        }
        out
    }

    /// Enumerates ground actions for an achiever. Witness slots take objects
    /// that currently make the goal false; free object slots take every
    /// type-compatible object. Object slots must bind distinct objects.
    pub fn ground_achiever(
        &self,
        achiever: &Achiever,
        state: &WorldState,
    ) -> Result<Vec<GroundAction>, DomainError> {
        let skill = self.skill(&achiever.skill)?;
        let mut choices: Vec<Vec<Option<BindingValue>>> = Vec::new();
        for p in &skill.params {
            let ParamKind::Object(ty) = &p.kind else {
                choices.push(vec![p.default.clone()]);
                continue;
            };
            let opts: Vec<Option<BindingValue>> = match achiever.binding.get(&p.name) {
                Some(SlotBinding::Object(o)) => vec![Some(BindingValue::Symbol(o.clone()))],
                Some(SlotBinding::Witness {
                    predicate,
                    pattern,
                    position,
                }) => {
                    let pat: Vec<Option<&str>> = pattern.iter().map(|x| x.as_deref()).collect();
                    let mut names: Vec<&str> = state
                        .matching(predicate, &pat)
                        .filter_map(|a| a.args.get(*position).map(String::as_str))
                        .collect();
                    names.dedup();
                    self.objects_of(ty)
                        .into_iter()
                        .filter(|o| names.contains(&o.name.as_str()))
                        .map(|o| Some(BindingValue::Symbol(o.name.clone())))
                        .collect()
                }
                None => self
                    .objects_of(ty)
                    .into_iter()
                    .map(|o| Some(BindingValue::Symbol(o.name.clone())))
                    .collect(),
            };
            choices.push(opts);
        }
        Ok(product(skill, &choices))
    }

    /// Every ground action over object slots, for exhaustive search.
    pub fn all_ground_actions(&self) -> Vec<GroundAction> {
        let mut out = Vec::new();
        for skill in &self.skills {
            let choices: Vec<Vec<Option<BindingValue>>> = skill
                .params
                .iter()
                .map(|p| match &p.kind {
                    ParamKind::Object(ty) => self
                        .objects_of(ty)
                        .into_iter()
                        .map(|o| Some(BindingValue::Symbol(o.name.clone())))
                        .collect(),
                    _ => vec![p.default.clone()],
                })
                .collect();
            out.extend(product(skill, &choices));
        }
        out
    }

    /// Validates skill, slot kinds, object types, units and vocabularies.
    pub fn check_action(&self, action: &GroundAction) -> Result<(), DomainError> {
        let skill = self.skill(&action.skill)?;
        let invalid = |reason: String| DomainError::InvalidTemplate {
            skill: skill.name.clone(),
            reason,
        };
        if action.args.len() != skill.params.len()
            || action.args.iter().zip(&skill.params).any(|((s, _), p)| *s != p.name)
        {
            return Err(invalid(format!("slots of `{action}` do not match the declaration")));
        }
        for (i, ((_, v), p)) in action.args.iter().zip(&skill.params).enumerate() {
            let Some(v) = v else {
                if p.is_object() {
                    return Err(DomainError::UnboundSlot {
                        skill: skill.name.clone(),
                        slot: p.name.clone(),
                    });
                }
                continue;
            };
            match (&p.kind, v) {
                (ParamKind::Object(ty), BindingValue::Symbol(o)) => {
                    let obj = self.object(o)?;
                    if !ty.accepts(&obj.category) {
                        return Err(DomainError::TypeMismatch {
                            name: skill.name.clone(),
                            position: i,
                            object: o.clone(),
                            category: obj.category.clone(),
                        });
                    }
                }
                (ParamKind::Numeric { unit }, BindingValue::Quantity { unit: u, .. }) => {
                    if unit != u {
                        return Err(invalid(format!("`{}` expects unit {unit}, got {u}", p.name)));
                    }
                }
                (ParamKind::Categorical { .. }, BindingValue::Symbol(_)) => {}
                _ => return Err(invalid(format!("value `{v}` does not fit slot `{}`", p.name))),
            }
        }
        Ok(())
    }

    /// Natural-language rendering of the visible state, one sentence per fact.
    pub fn scene_description(&self, state: &WorldState) -> String {
        let mut out = String::new();
        for atom in state.iter() {
            if !out.is_empty() {
                out.push(' ');
            }
            let phrase = self
                .predicate_decl(&atom.predicate)
                .ok()
                .and_then(|d| d.phrase.as_deref());
            match phrase {
                Some(p) => {
                    let mut s = p.to_string();
                    for (i, a) in atom.args.iter().enumerate() {
                        s = s.replace(&format!("{{{i}}}"), &format!("<{a}>"));
                    }
                    out.push_str(&s);
                }
                None => out.push_str(&format!("{atom} is true")),
            }
            out.push('.');
        }
        out
    }
}

fn apply_literals(state: &WorldState, effects: &[Literal]) -> WorldState {
    let mut next = state.clone();
    for e in effects.iter().filter(|e| e.negated) {
        next.remove_matching(&e.predicate, &e.pattern());
    }
    for e in effects.iter().filter(|e| !e.negated) {
        if let Some(atom) = e.atom() {
            next.insert(atom);
        }
    }
    next
}

fn unify_effect(
    skill: &SkillTemplate,
    eff: &Literal,
    goal: &Literal,
    domain: &Domain,
) -> Option<BTreeMap<String, SlotBinding>> {
    if eff.predicate != goal.predicate
        || eff.negated != goal.negated
        || eff.args.len() != goal.args.len()
    {
        return None;
    }
    let mut binding: BTreeMap<String, SlotBinding> = BTreeMap::new();
    let mut witnesses: Vec<(String, usize)> = Vec::new();
    for (i, (g, e)) in goal.args.iter().zip(&eff.args).enumerate() {
        match (g, e) {
            (Term::Object(o), Term::Param(p)) => {
                let ty = match skill.param(p).map(|d| &d.kind) {
                    Some(ParamKind::Object(ty)) => ty,
                    _ => return None,
                };
                let obj = domain.object(o).ok()?;
                if !ty.accepts(&obj.category) {
                    return None;
                }
                match binding.get(p) {
                    Some(SlotBinding::Object(prev)) if prev != o => return None,
                    _ => {
                        binding.insert(p.clone(), SlotBinding::Object(o.clone()));
                    }
                }
            }
            (Term::Object(o), Term::Object(o2)) => {
                if o != o2 {
                    return None;
                }
            }
            (Term::Object(_), Term::Wildcard) => {
                if !eff.negated {
                    return None;
                }
            }
            (Term::Wildcard, Term::Param(p)) => {
                if goal.negated {
                    witnesses.push((p.clone(), i));
                }
            }
            (Term::Wildcard, Term::Object(_)) | (Term::Wildcard, Term::Wildcard) => {}
            (Term::Param(_), _) => return None,
        }
    }
    for (p, position) in witnesses {
        if binding.contains_key(&p) {
            continue;
        }
        // the positive form of the goal with the other bound slots filled in
        let pattern = goal
            .args
            .iter()
            .map(|a| match a {
                Term::Object(o) => Some(o.clone()),
                _ => None,
            })
            .collect();
        binding.insert(
            p,
            SlotBinding::Witness {
                predicate: goal.predicate.clone(),
                pattern,
                position,
            },
        );
    }
    Some(binding)
}

fn product(skill: &SkillTemplate, choices: &[Vec<Option<BindingValue>>]) -> Vec<GroundAction> {
    let mut acc: Vec<Vec<Option<BindingValue>>> = vec![Vec::new()];
    for (p, opts) in skill.params.iter().zip(choices) {
        let mut next = Vec::new();
        for prefix in &acc {
            for o in opts {
                if p.is_object() {
                    let dup = prefix.iter().zip(&skill.params).any(|(v, q)| {
                        q.is_object() && v.is_some() && v.as_ref() == o.as_ref()
                    });
                    if dup {
                        continue;
                    }
                }
                let mut row = prefix.clone();
                row.push(o.clone());
                next.push(row);
            }
        }
        acc = next;
    }
    acc.into_iter()
        .map(|row| {
            GroundAction::new(
                &skill.name,
                skill.params.iter().map(|p| p.name.clone()).zip(row).collect(),
            )
        })
        .collect()
}
