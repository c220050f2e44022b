//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::{BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use btxp::backends::BackendSource;
use btxp::bench::{goal_items, run_bench, BenchSuite};
use btxp::library::{bundled_domain, bundled_scenario, bundled_scenarios, cafe_instructions, scripted_fixtures, Suite};
use btxp_core::bt::{tick, to_dot, BehaviorTree, EvaluationError, NodeId, NodeKind, NodeStatus, Spec, TickContext};
use btxp_core::domain::{
    parse_literal, Atom, BindingValue, Domain, GroundAction, Literal, Term, WorldState,
};
use btxp_core::llm::{
    build_prompt, parse_goal_response, parse_precondition_response, OracleBackend, PromptSpec, ScriptedBackend,
};
use btxp_core::planner::{plan, simulate, GoalSpec, PlanConfig};
use btxp_core::resolver::{replay, resolve_until_success, Inserted, Outcome, ResolverConfig, RunReport};
use btxp_core::sim::{execute_from, FaultFilter, FaultMode, Phase, Scenario, SimConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config as PtConfig, TestRunner};

type Verdict = Result<String, String>;

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("tick semantics match the reference evaluator", c1_tick_oracle),
        ("worked cube example reproduces both golden trees", c2_goldens),
        ("all ten failure scenarios succeed, 10 repeats each", c3_precondition_suite),
        ("resolved trees replay without the model", c4_permanence),
        ("inserted conditions are leftmost preconditions", c5_insertion_first),
        ("planner agrees with breadth-first search", c6_planner_completeness),
        ("the cube policy restores deleted facts", c7_reactivity),
        ("parameter values propagate and bind", c8_parameters),
        ("parsers survive fuzzing and round-trip literals", c9_parser_robustness),
        ("goal interpretation costs one call per instruction", c10_single_call),
        ("live-model accuracy is substituted by offline checks", c11_substitution),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({detail}; {took:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({detail}; {took:.2}s)", i + 1)
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, || {
        format!("took {:.2}s, limit {:.0}s", start.elapsed().as_secs_f64(), limit.as_secs_f64())
    })
}

fn oracle_for(s: &Scenario) -> OracleBackend {
    OracleBackend::from_scenarios([s])
}

fn precondition_scenarios() -> Vec<Scenario> {
    bundled_scenarios()
        .into_iter()
        .filter(|s| Suite::of(&s.id) == Suite::Preconditions)
        .collect()
}

// ---------------------------------------------------------------- 1

#[derive(Clone, Debug)]
enum Shape {
    Leaf(NodeStatus),
    Seq(Vec<Shape>),
    Fb(Vec<Shape>),
}

const LEAVES: [NodeStatus; 3] = [NodeStatus::Success, NodeStatus::Failure, NodeStatus::Running];

fn shapes(levels: usize) -> Vec<Shape> {
    let mut out: Vec<Shape> = LEAVES.iter().map(|s| Shape::Leaf(*s)).collect();
    if levels <= 1 {
        return out;
    }
    let sub = shapes(levels - 1);
    let mut kids: Vec<Vec<Shape>> = Vec::new();
    for n in 1..=3 {
        let mut acc: Vec<Vec<Shape>> = vec![Vec::new()];
        for _ in 0..n {
            acc = acc
                .into_iter()
                .flat_map(|prefix| {
                    sub.iter().map(move |s| {
                        let mut p = prefix.clone();
                        p.push(s.clone());
                        p
                    })
                })
                .collect();
        }
        kids.extend(acc);
    }
    for k in kids {
        out.push(Shape::Seq(k.clone()));
        out.push(Shape::Fb(k));
    }
    out
}

fn status_name(s: NodeStatus) -> &'static str {
    match s {
        NodeStatus::Success => "S",
        NodeStatus::Failure => "F",
        NodeStatus::Running => "R",
    }
}

fn to_spec(s: &Shape) -> Spec {
    match s {
        Shape::Leaf(st) => Spec::Action(GroundAction::new(status_name(*st), Vec::new())),
        Shape::Seq(c) => Spec::Sequence(c.iter().map(to_spec).collect()),
        Shape::Fb(c) => Spec::Fallback(c.iter().map(to_spec).collect()),
    }
}

/// Reference semantics: a Sequence returns the first non-Success child
/// status, a Fallback the first non-Failure one. Leaves are numbered in
/// preorder and the visited ones collected.
fn reference(s: &Shape, next: &mut u32, visited: &mut Vec<u32>) -> NodeStatus {
    fn count(s: &Shape) -> u32 {
        match s {
            Shape::Leaf(_) => 1,
            Shape::Seq(c) | Shape::Fb(c) => 1 + c.iter().map(count).sum::<u32>(),
        }
    }
    let me = *next;
    *next += 1;
    match s {
        Shape::Leaf(st) => {
            visited.push(me);
            *st
        }
        Shape::Seq(c) | Shape::Fb(c) => {
            let stop_on = if matches!(s, Shape::Seq(_)) { NodeStatus::Success } else { NodeStatus::Failure };
            let mut result = stop_on;
            let mut rest = c.iter();
            for child in rest.by_ref() {
                result = reference(child, next, visited);
                if result != stop_on {
                    break;
                }
            }
            // skipped children still take their preorder numbers
            *next += rest.map(count).sum::<u32>();
            result
        }
    }
}

struct Scripted {
    visited: Vec<u32>,
}

impl TickContext for Scripted {
    fn condition(&mut self, id: NodeId, _: &Literal) -> Result<bool, EvaluationError> {
        Err(EvaluationError::Other {
            node: id,
            message: "no conditions here".into(),
        })
    }

    fn action(&mut self, id: NodeId, a: &GroundAction) -> Result<NodeStatus, EvaluationError> {
        self.visited.push(id.0);
        Ok(match a.skill.as_str() {
            "S" => NodeStatus::Success,
            "F" => NodeStatus::Failure,
            _ => NodeStatus::Running,
        })
    }
}

fn c1_tick_oracle() -> Verdict {
    let start = Instant::now();
    let all = shapes(3);
    let mut mismatches = 0;
    for s in &all {
        // ids from `BehaviorTree::new` are assigned in preorder from 0
        let tree = BehaviorTree::new(to_spec(s));
        let mut ctx = Scripted { visited: Vec::new() };
        let (got, _) = tick(&tree, &mut ctx).map_err(|e| e.to_string())?;
        let mut visited = Vec::new();
        let want = reference(s, &mut 0, &mut visited);
        if got != want || ctx.visited != visited {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatches over {} trees", all.len()))?;
    within(start, Duration::from_secs(5))?;
    Ok(format!("{} trees, 0 mismatches", all.len()))
}

// ---------------------------------------------------------------- 2

const FIG3A: &str = include_str!("golden/fig3a.dot");
const FIG3B: &str = include_str!("golden/fig3b.dot");

fn c2_goldens() -> Verdict {
    let start = Instant::now();
    let s = bundled_scenario("fig3").ok_or("fig3 missing")?;
    let backend = oracle_for(&s);
    let cfg = ResolverConfig::default();
    let (goal, _) = btxp_core::resolver::interpret_goal(&s, &backend, &cfg).map_err(|e| e.to_string())?;
    let before = plan(&goal, &s.domain, &s.initial, &cfg.plan).map_err(|e| e.to_string())?.tree;
    ensure(to_dot(&before) == FIG3A, || format!("pre-failure tree differs: {}", before.shape()))?;

    let report = resolve_until_success(&s, &oracle_for(&s), &cfg).map_err(|e| e.to_string())?;
    ensure(report.outcome == Outcome::Success, || format!("{:?}", report.outcome))?;
    ensure(report.records.len() == 1, || format!("{} rounds", report.records.len()))?;
    let ev = &report.records[0].event;
    ensure(ev.action.to_string() == "grasp(blue_cube)", || ev.action.to_string())?;
    ensure(to_dot(&report.tree) == FIG3B, || format!("repaired tree differs: {}", report.tree.shape()))?;
    let shape = report.tree.shape();
    for part in [
        "?[~on(any_object, blue_cube)?, ->[~grasped(any_object)?, grasp(red_cube)!]]",
        "?[~grasped(any_object)?, ->[grasped(red_cube)?, place(red_cube, table)!]",
    ] {
        ensure(shape.contains(part), || format!("missing subtree {part}"))?;
    }
    within(start, Duration::from_secs(1))?;
    Ok("both DOT files equal".into())
}

// ---------------------------------------------------------------- 3, 4, 5

fn run_suite() -> Result<Vec<(Scenario, Vec<RunReport>)>, String> {
    let cfg = ResolverConfig::default();
    precondition_scenarios()
        .into_iter()
        .map(|s| {
            let runs = (0..10)
                .map(|_| resolve_until_success(&s, &oracle_for(&s), &cfg).map_err(|e| format!("{}: {e}", s.id)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((s, runs))
        })
        .collect()
}

fn c3_precondition_suite() -> Verdict {
    let start = Instant::now();
    let suite = run_suite()?;
    ensure(suite.len() == 10, || format!("{} scenarios", suite.len()))?;
    let mut solved = 0;
    let mut problems = Vec::new();
    for (s, runs) in &suite {
        let ok = runs.iter().filter(|r| r.outcome == Outcome::Success).count();
        if ok == 10 {
            solved += 1;
        } else {
            problems.push(format!("{} {ok}/10", s.id));
        }
        if let Some(want) = s.expected_rounds {
            if runs.iter().any(|r| r.records.len() != want) {
                problems.push(format!("{} expected {want} rounds", s.id));
            }
        }
    }
    ensure(problems.is_empty(), || problems.join(", "))?;
    within(start, Duration::from_secs(30))?;
    Ok(format!("{solved}/10 scenarios at 10/10"))
}

fn c4_permanence() -> Verdict {
    let cfg = ResolverConfig::default();
    let mut ok = 0;
    let mut problems = Vec::new();
    for s in precondition_scenarios() {
        let report = resolve_until_success(&s, &oracle_for(&s), &cfg).map_err(|e| e.to_string())?;
        // a fresh copy: the bundled scenario parsed again
        let fresh = bundled_scenario(&s.id).ok_or("scenario vanished")?;
        let trace = replay(&report.tree, &fresh, &cfg).map_err(|e| e.to_string())?;
        if trace.status == NodeStatus::Success && trace.failures.is_empty() {
            ok += 1;
        } else {
            problems.push(s.id.clone());
        }
    }
    ensure(ok == 10, || format!("replay failed for {}", problems.join(", ")))?;
    Ok("10/10 replays succeed".into())
}

fn c5_insertion_first() -> Verdict {
    let suite = run_suite()?;
    let mut checked = 0;
    let mut violations = Vec::new();
    for (s, runs) in &suite {
        for r in runs {
            for rec in &r.records {
                let lits: Vec<&Literal> = rec
                    .inserted
                    .iter()
                    .filter_map(|i| match i {
                        Inserted::Precondition(l) => Some(l),
                        Inserted::Parameter(_) => None,
                    })
                    .collect();
                if lits.is_empty() {
                    continue;
                }
                let tree = &rec.tree_after;
                let parent = tree.parent(rec.event.action_id).ok_or("action left the tree")?;
                // preorder: the first children of the action's Sequence are the insertions
                let heads: Vec<&Literal> = parent.children.iter().filter_map(|c| c.headline()).collect();
                checked += lits.len();
                if parent.kind != NodeKind::Sequence || heads.len() < lits.len() || heads[..lits.len()] != lits[..] {
                    violations.push(format!("{}: {}", s.id, rec.event.action));
                }
            }
        }
    }
    ensure(checked > 0, || "nothing was inserted".into())?;
    ensure(violations.is_empty(), || violations.join(", "))?;
    Ok(format!("{checked} insertions, 0 violations"))
}

// ---------------------------------------------------------------- 6

/// Every state reachable from `init` by applying applicable ground actions.
fn reachable(domain: &Domain, init: &WorldState, cap: usize) -> Result<Vec<WorldState>, String> {
    let actions = domain.all_ground_actions();
    let mut seen: BTreeSet<WorldState> = BTreeSet::from([init.clone()]);
    let mut queue = VecDeque::from([init.clone()]);
    while let Some(s) = queue.pop_front() {
        for a in &actions {
            if !domain.applicable(&s, a).map_err(|e| e.to_string())? {
                continue;
            }
            let next = domain.apply_effects(&s, a).map_err(|e| e.to_string())?;
            if seen.insert(next.clone()) {
                if seen.len() > cap {
                    return Err(format!("more than {cap} states"));
                }
                queue.push_back(next);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

fn positive_atoms(domain: &Domain) -> Vec<Literal> {
    let mut out = Vec::new();
    for p in domain.predicates() {
        let mut rows: Vec<Vec<String>> = vec![Vec::new()];
        for ty in &p.params {
            rows = rows
                .into_iter()
                .flat_map(|row| {
                    domain
                        .objects_of(ty)
                        .into_iter()
                        .filter(|o| !row.contains(&o.name))
                        .map(|o| {
                            let mut r = row.clone();
                            r.push(o.name.clone());
                            r
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        for args in rows {
            out.push(Literal::new(p.name.clone(), args.into_iter().map(Term::Object).collect(), false));
        }
    }
    out
}

fn c6_planner_completeness() -> Verdict {
    let start = Instant::now();
    let cfg = PlanConfig::default();
    let mut cases = 0;
    let mut disagreements = Vec::new();
    let mut domains = 0;
    let scenarios = bundled_scenarios();
    for name in btxp::library::domain_names() {
        let domain = bundled_domain(name).ok_or("domain missing")?.domain;
        if domain.objects().len() > 6 {
            continue;
        }
        domains += 1;
        let mut inits: Vec<WorldState> = vec![WorldState::new()];
        for s in scenarios.iter().filter(|s| s.domain.predicates() == domain.predicates()) {
            if s.initial.iter().all(|a| domain.check_literal(&a.literal()).is_ok()) && !inits.contains(&s.initial) {
                inits.push(s.initial.clone());
            }
        }
        let atoms = positive_atoms(&domain);
        let mut goals: Vec<Vec<Literal>> = atoms.iter().map(|a| vec![a.clone()]).collect();
        for (i, a) in atoms.iter().enumerate() {
            for b in &atoms[i + 1..] {
                goals.push(vec![a.clone(), b.clone()]);
            }
        }
        for s in scenarios.iter().filter(|s| s.domain.predicates() == domain.predicates()) {
            if let Some(g) = &s.oracle.goal {
                goals.push(btxp_core::domain::parse_conjunction(g).map_err(|e| e.to_string())?);
            }
        }
        for init in &inits {
            let states = reachable(&domain, init, 200_000)?;
            for g in &goals {
                let spec = GoalSpec::new(g.clone()).map_err(|e| e.to_string())?;
                let bfs = states.iter().any(|st| spec.satisfied(&domain, st).unwrap_or(false));
                let planned = match plan(&spec, &domain, init, &cfg) {
                    Ok(p) => {
                        let sim = simulate(&p.tree, &domain, init, cfg.max_sim_ticks).map_err(|e| e.to_string())?;
                        sim.status == NodeStatus::Success && spec.satisfied(&domain, &sim.state).unwrap_or(false)
                    }
                    Err(_) => false,
                };
                cases += 1;
                if planned != bfs {
                    let g: Vec<String> = g.iter().map(|l| l.to_string()).collect();
                    disagreements.push(format!("{name}: {} (bfs {bfs}, planner {planned})", g.join(" & ")));
                }
            }
        }
    }
    ensure(disagreements.is_empty(), || {
        let n = disagreements.len();
        disagreements.truncate(5);
        format!("{n} disagreements of {cases}, e.g. {}", disagreements.join("; "))
    })?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{domains} domains, {cases} goal/state pairs, 0 disagreements"))
}

// ---------------------------------------------------------------- 7

fn c7_reactivity() -> Verdict {
    let s = bundled_scenario("fig3").ok_or("fig3 missing")?;
    let cfg = ResolverConfig::default();
    let report = resolve_until_success(&s, &oracle_for(&s), &cfg).map_err(|e| e.to_string())?;
    let done = report.last_trace.as_ref().ok_or("no trace")?.final_visible.clone();
    let mut addable: BTreeSet<Atom> = BTreeSet::new();
    for n in report.tree.preorder() {
        if let Some(a) = n.action() {
            for e in s.domain.effects_of(a).map_err(|e| e.to_string())? {
                if !e.negated {
                    addable.extend(e.atom());
                }
            }
        }
    }
    let mut tried = 0;
    let mut failed = Vec::new();
    for atom in done.iter().filter(|a| addable.contains(*a)) {
        let mut state = done.clone();
        state.remove(atom);
        let sim = SimConfig {
            max_ticks: 100,
            faults: FaultFilter::All,
            phase: Phase::Execution,
        };
        let trace = execute_from(&report.tree, &s, &state, &sim).map_err(|e| e.to_string())?;
        tried += 1;
        if trace.status != NodeStatus::Success {
            failed.push(atom.to_string());
        }
    }
    ensure(tried > 0, || "no restorable fact in the final state".into())?;
    ensure(failed.is_empty(), || format!("not restored: {}", failed.join(", ")))?;
    Ok(format!("{tried} deletions restored"))
}

// ---------------------------------------------------------------- 8

fn c8_parameters() -> Verdict {
    let cfg = ResolverConfig::default();
    let fixtures = scripted_fixtures();
    let expect: [(&str, &[(&str, &str, &str)]); 6] = [
        ("param-01-egg-hammer-force", &[("egg", "force", "5.3 N"), ("hammer", "force", "37.2 N")]),
        ("param-02-pillow-speed", &[("pillow", "speed", "0.6 m/s")]),
        ("param-03-first-aid-speed", &[("first_aid_kit", "speed", "1.5 m/s")]),
        ("param-04-baby-speed", &[("baby", "speed", "0.1 m/s")]),
        ("param-05-sand-tool", &[("sand", "tool", "shovel")]),
        ("param-06-plate-tool", &[("plate", "tool", "sponge")]),
    ];
    let mut leaves = 0;
    for (id, wants) in expect {
        let s = bundled_scenario(id).ok_or_else(|| format!("{id} missing"))?;
        let r = resolve_until_success(&s, &ScriptedBackend::new(fixtures.clone()), &cfg)
            .map_err(|e| format!("{id}: {e}"))?;
        ensure(r.outcome == Outcome::Success, || format!("{id}: {:?}", r.outcome))?;
        for (obj, slot, value) in wants {
            let value = btxp_core::domain::parse_value(value).map_err(|e| e.to_string())?;
            // every action on this object that has the slot carries the value
            let relevant: Vec<&GroundAction> = r
                .tree
                .preorder()
                .into_iter()
                .filter_map(|n| n.action())
                .filter(|a| a.args.iter().any(|(k, _)| k == slot))
                .filter(|a| a.args.iter().any(|(_, v)| v.as_ref().and_then(BindingValue::as_symbol) == Some(obj)))
                .collect();
            ensure(!relevant.is_empty(), || format!("{id}: no action on {obj} has {slot}"))?;
            for a in relevant {
                leaves += 1;
                ensure(a.value(slot) == Some(&value), || format!("{id}: {a} lacks {slot} = {value}"))?;
            }
        }
    }
    Ok(format!("{leaves} action leaves carry the resolved values"))
}

// ---------------------------------------------------------------- 9

fn ident() -> impl Strategy<Value = String> {
    "[a-zA-Z_][a-zA-Z0-9_]{0,8}".prop_filter("wildcard spelling", |s| s != "any_object")
}

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        ident().prop_map(Term::Object),
        Just(Term::Wildcard),
        ident().prop_map(Term::Param),
    ]
}

fn literal() -> impl Strategy<Value = Literal> {
    (ident(), prop::collection::vec(term(), 0..4), any::<bool>()).prop_map(|(p, a, n)| Literal::new(p, a, n))
}

fn c9_parser_robustness() -> Verdict {
    let domain = bundled_domain("cube").ok_or("cube missing")?.domain;
    let mut runner = TestRunner::new(PtConfig {
        cases: 10_000,
        failure_persistence: None,
        ..PtConfig::default()
    });
    let noise = prop_oneof![
        any::<String>(),
        "(ANSWER: )?[a-z_~&(), ?]{0,40}(\nREASONING: .{0,20})?",
        prop::collection::vec(any::<u8>(), 0..64).prop_map(|b| String::from_utf8_lossy(&b).into_owned()),
    ];
    runner
        .run(&noise, |raw| {
            let _ = parse_goal_response(&raw, &domain);
            let _ = parse_precondition_response(&raw, &domain);
            Ok(())
        })
        .map_err(|e| format!("fuzz: {e}"))?;

    let mut runner = TestRunner::new(PtConfig {
        cases: 1_000,
        failure_persistence: None,
        ..PtConfig::default()
    });
    runner
        .run(&literal(), |l| {
            prop_assert_eq!(parse_literal(&l.to_string()).ok(), Some(l));
            Ok(())
        })
        .map_err(|e| format!("round trip: {e}"))?;
    Ok("10000 fuzz cases, 1000 round trips".into())
}

// ---------------------------------------------------------------- 10

fn c10_single_call() -> Verdict {
    let set = cafe_instructions();
    let domain = bundled_domain(&set.domain).ok_or("cafe missing")?.domain;
    let items = goal_items(&set, &domain);
    let report = run_bench(BenchSuite::Goals, &items, &BackendSource::Oracle, &ResolverConfig::default(), 1, 4);
    let (ok, n, calls) = report.totals();
    ensure(n == items.len() && calls == n, || format!("{calls} calls for {n} instructions"))?;
    for r in &report.rows {
        ensure(r.backend_calls == r.trials, || format!("{}: {} calls for {} instructions", r.label, r.backend_calls, r.trials))?;
    }
    Ok(format!("{calls} calls for {n} instructions, {ok} goals correct"))
}

// ---------------------------------------------------------------- 11

fn c11_substitution() -> Verdict {
    let mut prompts = 0;
    for s in bundled_scenarios() {
        let d = &s.domain;
        let mut specs = vec![PromptSpec::goal(d, &s.initial, &s.instruction, &s.examples)];
        for f in &s.faults {
            let msg = match &f.mode {
                FaultMode::Fail { message } => message.clone(),
                FaultMode::SuppressEffects => "Postcondition not met".to_string(),
            };
            let action = d
                .all_ground_actions()
                .into_iter()
                .find(|a| f.matcher.match_action(a).is_some())
                .ok_or_else(|| format!("{}: rule {} matches nothing", s.id, f.id))?;
            specs.push(PromptSpec::failure(d, &s.initial, &s.instruction, &s.examples, &action, &msg));
        }
        for spec in specs {
            let text = build_prompt(&spec).map_err(|e| e.to_string())?;
            prompts += 1;
            for p in d.predicates() {
                ensure(text.contains(&p.description), || format!("{}: `{}` missing", s.id, p.description))?;
            }
            for o in d.objects() {
                ensure(text.contains(&o.name), || format!("{}: object {} missing", s.id, o.name))?;
            }
            if let Some(m) = &spec.error_message {
                ensure(text.contains(m.as_str()), || format!("{}: error message missing", s.id))?;
            }
        }
    }
    Ok(format!(
        "accuracy needs a live model and is only reported; {prompts} prompts pass containment"
    ))
}
