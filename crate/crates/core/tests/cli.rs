mod common;

use std::collections::HashSet;

use serde_json::Value;
use wedge32::groups::greedy_closure;
use wedge32::{MatrixK, TowerElement};

fn shared() -> String {
    common::context();
    common::shared_dir().to_str().unwrap().to_owned()
}

#[test]
fn check_filter_runs_exactly_the_named_checks() {
    let dir = shared();
    let (code, out, err) = common::run_cli(&["--cache-dir", &dir, "--format", "json", "verify", "--checks", "orders,reflections"]);
    assert_eq!(code, 0, "{err}");
    let doc: Value = serde_json::from_str(&out).unwrap();
    let ids: Vec<&str> = doc["checks"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["reflections", "w-orders"]);

    let (code, out, _) = common::run_cli(&["--cache-dir", &dir, "verify", "--checks", "c3"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.starts_with('[')).count(), 1);
    assert!(out.contains("[PASS] c3-class"));
}

#[test]
fn json_report_has_the_documented_shape() {
    let dir = shared();
    let (code, out, _) = common::run_cli(&["--cache-dir", &dir, "--format", "json", "verify", "--checks", "e6-order,transport,properties"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["overall"], "pass");
    assert_eq!(doc["field"], "q12+2+5");
    let checks = doc["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    for c in checks {
        let keys: HashSet<&str> = c.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys, HashSet::from(["id", "description", "expected", "actual", "status", "ms"]));
        for k in ["id", "description", "expected", "actual"] {
            assert!(!c[k].as_str().unwrap().is_empty());
        }
        assert!(["pass", "fail", "warn"].contains(&c["status"].as_str().unwrap()));
        assert!(c["ms"].is_u64());
    }
}

fn matrices(v: &Value) -> Vec<MatrixK> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|m| {
            let rows = m.as_array().unwrap();
            let entries: Vec<TowerElement> = rows
                .iter()
                .flat_map(|r| r.as_array().unwrap().iter().map(|x| TowerElement::from_text(x.as_str().unwrap()).unwrap()))
                .collect();
            MatrixK::new(rows.len(), rows.len(), entries[0].field(), entries)
        })
        .collect()
}

#[test]
fn exported_generators_close_to_w() {
    let dir = shared();
    let out_dir = tempfile::tempdir().unwrap();
    let file = out_dir.path().join("w.json");
    let (code, _, err) = common::run_cli(&["--cache-dir", &dir, "export", "--output", file.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(doc["order"], 155_520);
    let ctx = common::context();

    let p = matrices(&Value::Array(vec![doc["transport"]["p"].clone()])).remove(0);
    assert_eq!(p, ctx.transport.p);
    let reflections = matrices(&doc["reflections"]);
    assert_eq!(reflections, ctx.reflections);
    assert_eq!(matrices(&doc["scalars"]).len(), 2);

    let gens = matrices(&doc["generators"]);
    let f = gens[0].field();
    let w = greedy_closure(MatrixK::identity(4, f), gens, None, 155_520).unwrap();
    assert_eq!(w.order(), 155_520);
    assert!(reflections.iter().all(|s| w.contains(s)));
}

#[test]
fn export_with_nothing_selected_is_an_empty_document() {
    let dir = shared();
    let (code, out, _) = common::run_cli(&["--cache-dir", &dir, "export", "--include", "none"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert!(doc["transport"].is_null());
    for k in ["reflections", "scalars", "generators"] {
        assert_eq!(doc[k].as_array().unwrap().len(), 0);
    }
}

#[test]
fn build_reports_loaded_stages() {
    let dir = shared();
    let (code, out, _) = common::run_cli(&["--cache-dir", &dir, "build"]);
    assert_eq!(code, 0);
    assert!(out.contains("w.cache: loaded"), "{out}");
    assert!(out.contains("W: 155520 elements"));
}
