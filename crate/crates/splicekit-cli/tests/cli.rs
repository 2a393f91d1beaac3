use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn splicekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splicekit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn validate_catalog_fixture() {
    let o = splicekit(&["validate", "catalog:grp_knot"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("valid"));
}

#[test]
fn every_fixture_is_reachable() {
    let names: Vec<String> = serde_json::from_value(json(&splicekit(&["catalog", "list", "--json"]))).unwrap();
    assert!(names.len() >= 7);
    for n in names {
        let o = splicekit(&["validate", &format!("catalog:{n}")]);
        assert_eq!(o.status.code(), Some(0), "{n}: {}", stdout(&o));
    }
    assert_eq!(splicekit(&["catalog", "run"]).status.code(), Some(0));
}

#[test]
fn certify_cand1() {
    let o = splicekit(&["certify", "catalog:cand1", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["structure"]["structure"], "neither");
    assert!(r["kaw_bound"].as_u64().unwrap() <= 1);
    assert!(r["certificate"]["step"]["case"].is_string());
    assert_eq!(r["certificate_ref"]["sha256"].as_str().unwrap().len(), 64);
    assert_eq!(r["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn enumerate_matches_the_small_example() {
    let o = splicekit(&["enumerate", "--atoms", "1,1.5", "--bound", "4", "--json"]);
    let v: Vec<f64> = serde_json::from_value(json(&o)).unwrap();
    assert_eq!(v, vec![0.0, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]);
}

#[test]
fn tolerance_comes_from_the_environment() {
    let args = ["enumerate", "--atoms", "1,1.0000001", "--bound", "1.5", "--json"];
    let strict: Vec<f64> = serde_json::from_value(json(&splicekit(&args))).unwrap();
    assert_eq!(strict.len(), 3);
    let o =
        Command::new(env!("CARGO_BIN_EXE_splicekit")).args(args).env("SPLICEKIT_TOLERANCE", "1e-3").output().unwrap();
    let loose: Vec<f64> = serde_json::from_value(json(&o)).unwrap();
    assert_eq!(loose.len(), 2);
}

#[test]
fn output_is_byte_identical() {
    for args in [
        vec!["certify", "catalog:grp_knot", "--json"],
        vec!["analyze", "catalog:max_special"],
        vec!["export-dot", "catalog:grp_link"],
    ] {
        let (a, b) = (splicekit(&args), splicekit(&args));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(splicekit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(splicekit(&["validate", "catalog:no_such_fixture"]).status.code(), Some(2));
    assert_eq!(splicekit(&["validate", "/nonexistent/graph.json"]).status.code(), Some(2));
    assert_eq!(splicekit(&["enumerate", "--atoms", "1", "--bound", "-1"]).status.code(), Some(2));
}

#[test]
fn invalid_action_exits_1() {
    let show = json(&splicekit(&["catalog", "show", "keychain_swap"]));
    let graph = scratch("swap_graph.json");
    let action = scratch("swap_action.json");
    std::fs::write(&graph, serde_json::to_string(&show["graph"]).unwrap()).unwrap();
    let mut a = show["action"].clone();
    a["external_signs"]["K"] = Value::from(1);
    a["vertex_perm"] = serde_json::json!({});
    std::fs::write(&action, serde_json::to_string(&a).unwrap()).unwrap();
    let (g, a) = (graph.to_str().unwrap(), action.to_str().unwrap());
    let o = splicekit(&["validate", g, a]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("Incidence") || stdout(&o).contains("invalid"));
    assert_eq!(splicekit(&["validate", g]).status.code(), Some(0));
}

#[test]
fn positive_component_is_refused() {
    let o = splicekit(&["analyze", "catalog:hopf_keychain", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o)["error"].as_str().unwrap().starts_with("PositiveComponentPresent"));
}

#[test]
fn emitted_certificate_replays() {
    let cert = scratch("grp_link_cert.json");
    let c = cert.to_str().unwrap();
    assert_eq!(splicekit(&["certify", "catalog:grp_link", "--emit", c]).status.code(), Some(0));
    let o = splicekit(&["replay", "catalog:grp_link", "--certificate", c]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let mut v: Value = serde_json::from_slice(&std::fs::read(&cert).unwrap()).unwrap();
    v["verdict"]["kaw_bound"] = Value::from(0);
    let bad = scratch("grp_link_bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = splicekit(&["replay", "catalog:grp_link", "--certificate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("mismatch at root"));
}

#[test]
fn dot_styles() {
    let d = stdout(&splicekit(&["export-dot", "catalog:max_special"]));
    assert!(d.starts_with("digraph"));
    assert!(d.contains("arrowhead=normalnormal"));
    assert!(d.contains("fillcolor=lightblue"));
    assert!(d.contains("fillcolor=red"));
    let d = stdout(&splicekit(&["export-dot", "catalog:grp_link"]));
    assert!(d.contains("style=dashed, dir=none"));
}

#[test]
fn fox_milnor_command() {
    let o = splicekit(&["foxmilnor", "--coeffs", "-1,3,-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("not satisfiable"));
    let r = json(&splicekit(&["foxmilnor", "--coeffs", "-2,5,-2", "--json"]));
    assert_eq!(r["result"], "satisfiable");
    assert_eq!(splicekit(&["foxmilnor", "--coeffs", "1,2,3"]).status.code(), Some(2));
}

#[test]
fn reduce_prints_the_exponent() {
    let o = splicekit(&["reduce", "catalog:grp_knot", "--json"]);
    assert_eq!(json(&o)["exponent"], 1);
}
