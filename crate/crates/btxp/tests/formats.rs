use std::path::Path;

use btxp::format::{load_scenarios, parse_tree, records_to_json, trace_to_jsonl, tree_to_json};
use btxp::library::bundled_scenarios;
use btxp_core::llm::OracleBackend;
use btxp_core::resolver::{replay, resolve_until_success, ResolverConfig};
use serde_json::Value;

#[test]
fn every_resolved_tree_survives_a_file_round_trip() {
    let cfg = ResolverConfig::default();
    for s in bundled_scenarios() {
        let r = resolve_until_success(&s, &OracleBackend::from_scenarios([&s]), &cfg).unwrap();
        let text = tree_to_json(&r.tree);
        let back = parse_tree(&text).unwrap();
        assert_eq!(back, r.tree, "{}", s.id);
        assert_eq!(back.preorder_ids(), r.tree.preorder_ids(), "{}", s.id);
        assert_eq!(tree_to_json(&back), text);
    }
}

#[test]
fn trace_lines_are_header_ticks_footer() {
    let s = btxp::library::bundled_scenario("t4-01-blocked-cube").unwrap();
    let cfg = ResolverConfig::default();
    let r = resolve_until_success(&s, &OracleBackend::from_scenarios([&s]), &cfg).unwrap();
    let trace = replay(&r.tree, &s, &cfg).unwrap();
    let text = trace_to_jsonl(&trace, &s.id);
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["schema"], "btxp-trace/1");
    assert_eq!(lines[0]["scenario"], s.id.as_str());
    let footer = lines.last().unwrap();
    assert_eq!(footer["status"], "success");
    assert_eq!(footer["ticks"].as_u64().unwrap() as usize, lines.len() - 2);
    for (i, tick) in lines[1..lines.len() - 1].iter().enumerate() {
        assert_eq!(tick["tick"].as_u64().unwrap() as usize, i);
        assert!(!tick["visited"].as_array().unwrap().is_empty());
    }
}

#[test]
fn records_list_one_entry_per_round() {
    let s = btxp::library::bundled_scenario("t4-02-two-blockers").unwrap();
    let r = resolve_until_success(&s, &OracleBackend::from_scenarios([&s]), &ResolverConfig::default()).unwrap();
    let v: Value = serde_json::from_str(&records_to_json(&r, &s.id)).unwrap();
    assert_eq!(v["outcome"], "success");
    let rounds = v["rounds"].as_array().unwrap();
    assert_eq!(rounds.len(), r.records.len());
    for (i, round) in rounds.iter().enumerate() {
        assert_eq!(round["round"].as_u64().unwrap() as usize, i + 1);
        assert!(round["exchange"]["prompt"].as_str().unwrap().contains(&s.instruction));
    }
}

#[test]
fn bundled_scenario_directory_loads_from_disk() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenarios");
    let from_disk = load_scenarios(&dir).unwrap();
    let mut ids: Vec<String> = from_disk.iter().map(|s| s.id.clone()).collect();
    ids.sort();
    let mut bundled: Vec<String> = bundled_scenarios().into_iter().map(|s| s.id).collect();
    bundled.sort();
    assert_eq!(ids, bundled);
}
