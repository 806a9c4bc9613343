use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn tmp(name: &str) -> String {
    let dir = std::env::temp_dir().join(format!("tspmd-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name).to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tspmd")).args(args).output().unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn evaluate_reproduces_fixture() {
    let v = json_ok(&["evaluate", "--instance", &fixture("fig3.instance.json"), "--solution", &fixture("fig3.solution.json")]);
    assert!((v["completion_time"].as_f64().unwrap() - 62.42).abs() < 1e-9);
}

#[test]
fn generate_then_validate_then_solve_round_trip() {
    for seed in 0..3 {
        let inst = tmp(&format!("gen{seed}.json"));
        let s = seed.to_string();
        assert!(run(&["generate", "--kind", "euclidean", "--n", "5", "--seed", &s, "--drones", "2", "--out", &inst]).status.success());
        json_ok(&["validate-instance", "--instance", &inst]);
        let solved = json_ok(&["solve", "--instance", &inst, "--mode", "m-circuit", "--deterministic"]);
        assert_eq!(solved["status"], "optimal");
        let sol = tmp(&format!("sol{seed}.json"));
        std::fs::write(&sol, solved["solution"].to_string()).unwrap();
        let rep = json_ok(&["validate", "--instance", &inst, "--solution", &sol]);
        assert_eq!(rep["valid"], true);
        assert!((rep["completion_time"].as_f64().unwrap() - solved["objective"].as_f64().unwrap()).abs() < 1e-9);
        let cls = json_ok(&["classify", "--instance", &inst, "--solution", &sol]);
        assert_eq!(cls["is_arc_retraversing"], false);
    }
}

#[test]
fn generation_is_deterministic() {
    let a = run(&["generate", "--kind", "euclidean", "--n", "7", "--seed", "42", "--deterministic"]);
    let b = run(&["generate", "--kind", "euclidean", "--n", "7", "--seed", "42", "--deterministic"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["generate", "--kind", "euclidean", "--n", "7", "--seed", "43"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(run(&["solve"]).status.code(), Some(2));
    assert_eq!(run(&["solve", "--instance", "/nonexistent.json"]).status.code(), Some(1));
    let mut bad = serde_json::from_str::<Value>(&std::fs::read_to_string(fixture("fig3.solution.json")).unwrap()).unwrap();
    bad["operations"][0]["end_pos"] = Value::from(4);
    let p = tmp("bad.json");
    std::fs::write(&p, bad.to_string()).unwrap();
    let out = run(&["validate", "--instance", &fixture("fig3.instance.json"), "--solution", &p]);
    assert_eq!(out.status.code(), Some(1));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["valid"], false);
}

#[test]
fn repro_small_targets() {
    let v = json_ok(&["repro", "--target", "fig3"]);
    assert_eq!(v["solver"]["pass"], true);
    let v = json_ok(&["repro", "--target", "fig2"]);
    assert_eq!(v["fixture"]["pass"], true);
    let v = json_ok(&["repro", "--target", "chain", "--pretty"]);
    assert_eq!(v["cycle_within_factor"], true);
}

#[test]
fn milp_export_is_stable_and_checks_agree() {
    let inst = fixture("fig3.instance.json");
    let (a, b) = (tmp("a.lp"), tmp("b.lp"));
    let v = json_ok(&["export-milp", "--instance", &inst, "--lp", &a]);
    json_ok(&["export-milp", "--instance", &inst, "--lp", &b]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(v["rows_by_family"]["flow"].as_u64().unwrap() > 0);
    let c = json_ok(&["check-milp", "--instance", &inst, "--solution", &fixture("fig8.solution.json")]);
    assert_eq!(c["agrees"], true);
    assert_eq!(c["milp"]["satisfied"], true);
}

#[test]
fn bounds_transform_heuristic_gantt() {
    let inst = fixture("fig4.instance.json");
    let sol = fixture("fig5.solution.json");
    let b = json_ok(&["bounds", "--instance", &inst, "--solution", &sol, "--lb", "866.18"]);
    assert_eq!(b["lb"].as_f64(), Some(866.18));
    assert_eq!(b["furthest_node"]["preconditions_met"], false);
    let t = json_ok(&["transform", "--instance", &inst, "--solution", &sol, "--op", "m-cycle"]);
    assert_eq!(t["classification"]["is_node_revisiting"], false);
    assert_eq!(run(&["heuristic", "--instance", &inst]).status.code(), Some(1));
    let h = json_ok(&["heuristic", "--instance", &fixture("fig3.instance.json")]);
    assert_eq!(h["basis"], "christofides");
    let svg = run(&["gantt", "--instance", &inst, "--solution", &sol]);
    assert!(svg.status.success());
    assert!(String::from_utf8(svg.stdout).unwrap().starts_with("<svg"));
}

#[test]
fn set_cover_from_cli() {
    let msc = tmp("msc.json");
    std::fs::write(&msc, r#"{"universe":["1","2","3"],"sets":[["1","2"],["2","3"],["3"]]}"#).unwrap();
    let v = json_ok(&["heuristic", "--msc", &msc]);
    assert_eq!(v["optimum"], 2);
    let inst = tmp("msc_inst.json");
    assert!(run(&["generate", "--kind", "msc", "--msc", &msc, "--alpha", "1", "--drones", "6", "--out", &inst]).status.success());
    let h = json_ok(&["heuristic", "--instance", &inst]);
    let sol = tmp("msc_sol.json");
    std::fs::write(&sol, h["solution"].to_string()).unwrap();
    let c = json_ok(&["heuristic", "--msc", &msc, "--solution", &sol]);
    assert!(c["cover_size"].as_u64().unwrap() >= 2);
}
