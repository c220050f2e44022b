use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SCENARIO: &str = include_str!("../data/scenarios/t4-01-blocked-cube.toml");

fn btxp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btxp"))
        .args(args)
        .env_remove("BTXP_LLM_ENDPOINT")
        .env_remove("BTXP_LLM_API_KEY")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn scenarios_lists_bundled_ids() {
    let o = btxp(&["scenarios"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 17);
    assert!(text.starts_with("fig3 "));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&btxp(&[])), 2);
    assert_eq!(code(&btxp(&["run"])), 2);
    assert_eq!(code(&btxp(&["bench", "nonsense"])), 2);
}

#[test]
fn unknown_scenario_exits_1() {
    assert_eq!(code(&btxp(&["run", "no-such-scenario"])), 1);
}

#[test]
fn bad_state_exits_3() {
    let o = btxp(&["plan", "--domain", "cube", "--state", "ontable(red_cube)", "--instruction", "x"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn unreachable_goal_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("u.toml");
    fs::write(&f, SCENARIO.replace("goal = \"on(blue_cube, green_cube)\"", "goal = \"on(blue_cube, blue_cube)\"")).unwrap();
    let o = btxp(&["run", path(&f)]);
    assert_eq!(code(&o), 4, "{}", stdout(&o));
    assert!(stdout(&o).contains("unsolvable"));
}

#[test]
fn wrong_schema_exits_6() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("s.toml");
    fs::write(&f, SCENARIO.replace("btxp-scenario/1", "btxp-scenario/9")).unwrap();
    assert_eq!(code(&btxp(&["run", path(&f)])), 6);
}

#[test]
fn remote_without_credentials_exits_7() {
    assert_eq!(code(&btxp(&["run", "fig3", "--backend", "remote"])), 7);
}

#[test]
fn no_resolve_reports_first_failure() {
    let o = btxp(&["run", "t4-05-locked-cupboard", "--no-resolve"]);
    assert_eq!(code(&o), 5);
    assert!(stdout(&o).contains("failed: Torque limit exceeded"), "{}", stdout(&o));
}

#[test]
fn repeated_runs_are_identical() {
    let o = btxp(&["run", "fig3", "--repeat", "3"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("repeat: 3/3 runs identical"));
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = btxp(&["run", "t4-02-two-blockers", "--out", path(dir.path())]);
    assert_eq!(code(&o), 0);
    for f in ["tree.json", "tree.dot", "records.json", "trace.jsonl"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let records: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("records.json")).unwrap()).unwrap();
    assert_eq!(records["schema"], "btxp-records/1");
    assert_eq!(records["rounds"].as_array().unwrap().len(), 2);
}

#[test]
fn rewriting_artifacts_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    assert_eq!(code(&btxp(&["plan", "--scenario", "fig3", "--out", out])), 0);
    let first = fs::read(dir.path().join("tree.json")).unwrap();
    assert_eq!(code(&btxp(&["plan", "--scenario", "fig3", "--out", out])), 0);
    assert_eq!(fs::read(dir.path().join("tree.json")).unwrap(), first);
    let leftovers: Vec<_> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 3, "{leftovers:?}");
}

#[test]
fn planned_tree_verifies_and_a_bad_goal_does_not() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    assert_eq!(code(&btxp(&["run", "fig3", "--out", out])), 0);
    let tree = dir.path().join("tree.json");
    assert_eq!(code(&btxp(&["verify", path(&tree), "--scenario", "fig3"])), 0);
    let o = btxp(&["verify", path(&tree), "--domain", "cube", "--goal", "on(red_cube, green_cube)"]);
    assert_eq!(code(&o), 8, "{}", stdout(&o));
}

#[test]
fn verify_rejects_malformed_tree_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("t.json");
    fs::write(&f, "{\n  \"schema\": \"btxp-tree/1\",\n  \"root\": [\n").unwrap();
    let o = btxp(&["verify", path(&f), "--scenario", "fig3"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn empty_bench_filter_succeeds() {
    let o = btxp(&["bench", "preconds", "--filter", "matches-nothing", "--repeat", "1"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn goal_bench_json_counts_one_call_per_trial() {
    let o = btxp(&["bench", "goals", "--repeat", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "btxp-bench/1");
    for row in v["rows"].as_array().unwrap() {
        assert_eq!(row["backend_calls"], row["trials"]);
        assert_eq!(row["successes"], row["trials"]);
    }
}
