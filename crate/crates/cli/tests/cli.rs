use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

use troplog::moduli::{ConeComplex, IsomorphismReport, SelfMapNormalForm};
use troplog::pl_function::PLFunction;
use troplog::subdivision::SubdividedComplex;

const PATH_TREE: &str = r#"{"vertices":[1,2],"edges":[{"ends":[1,2],"length":"3"}],
  "legs":[{"label":1,"at":1},{"label":2,"at":1},{"label":3,"at":2}]}"#;
const STAR_TREE: &str = r#"{"vertices":[0],"edges":[],"legs":[{"label":1,"at":0},{"label":2,"at":0}]}"#;
const P1_FAN: &str = r#"{"dim":1,"cones":[{"gens":[[1]]},{"gens":[[-1]]},{"gens":[]}]}"#;

struct Run {
    code: i32,
    stdout: String,
    doc: Value,
}

fn troplog(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_troplog")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let doc = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    Run { code: out.status.code().unwrap(), stdout, doc }
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn extend_examples() {
    let dir = TempDir::new().unwrap();
    let path = file(&dir, "path.json", PATH_TREE);
    let run = troplog(&["extend", s(&path), "--sigma", "2,-1,-1", "--value", "0"]);
    assert_eq!(run.code, 0);
    assert_eq!(run.doc["status"], "ok");
    assert_eq!(run.doc["payload"]["edge_slopes"][0]["slope"], -1);
    let f: PLFunction = serde_json::from_value(run.doc["payload"].clone()).unwrap();
    assert_eq!(f.value_at(troplog::tropical_curve::VertexId(2)).unwrap().to_string(), "-3");

    let run = troplog(&["extend", s(&path), "--sigma", "1,0,0"]);
    assert_eq!((run.code, run.doc["code"].as_str()), (4, Some("non_zero_sum")));

    let star = file(&dir, "star.json", STAR_TREE);
    let run = troplog(&["extend", s(&star), "--sigma", "1,-1"]);
    assert_eq!(run.code, 0);
    assert_eq!(run.doc["payload"]["edge_slopes"], Value::Array(vec![]));
}

#[test]
fn chained_multidegree() {
    let dir = TempDir::new().unwrap();
    let path = file(&dir, "path.json", PATH_TREE);
    let f = file(&dir, "f.json", &troplog(&["extend", s(&path), "--sigma", "2,-1,-1"]).stdout);
    let run = troplog(&["multidegree", s(&f)]);
    assert_eq!(run.code, 0);
    assert_eq!(run.doc["payload"]["balanced"], true);
}

#[test]
fn parse_errors_carry_context() {
    let dir = TempDir::new().unwrap();
    let bad = file(&dir, "bad.json", "{\"vertices\":[1],\n \"edges\":[],\n \"legs\":[{\"label\":\"one\",\"at\":1}]}");
    let run = troplog(&["validate", s(&bad)]);
    assert_eq!((run.code, run.doc["code"].as_str()), (2, Some("parse")));
    assert_eq!(run.doc["payload"]["detail"]["path"], "legs[0].label");
    assert_eq!(run.doc["payload"]["detail"]["line"], 3);

    let run = troplog(&["extend", s(&bad).replace("bad", "missing").as_str(), "--sigma", "0"]);
    assert_eq!(run.code, 2);
}

#[test]
fn validate_reports_violations() {
    let dir = TempDir::new().unwrap();
    let cyc = file(
        &dir,
        "cycle.json",
        r#"{"vertices":[1,2],"edges":[{"ends":[1,2],"length":"1"},{"ends":[2,1],"length":"1"}],"legs":[{"label":1,"at":1}]}"#,
    );
    let run = troplog(&["validate", s(&cyc)]);
    assert_eq!((run.code, run.doc["code"].as_str()), (3, Some("invalid_tree")));
    assert_eq!(run.doc["payload"]["detail"]["violations"][0]["kind"], "cycle");

    let ok = file(&dir, "path.json", PATH_TREE);
    assert_eq!(troplog(&["validate", s(&ok)]).doc["payload"]["valid"], true);
}

#[test]
fn moduli_examples() {
    let run = troplog(&["moduli", "4", "--sigma", "1,1,1,-3"]);
    assert_eq!(run.code, 0);
    let cx: ConeComplex = serde_json::from_value(run.doc["payload"].clone()).unwrap();
    assert_eq!(cx.cones.len(), 4);
    assert_eq!(cx.max_dim(), Some(2));

    let run = troplog(&["moduli", "5", "--sigma", "1,2,-3,4,-4", "--certify-product", "2"]);
    let report: IsomorphismReport = serde_json::from_value(run.doc["payload"].clone()).unwrap();
    assert!(report.certified);
    assert_eq!(report.maximal_cones_checked, 15);

    assert_eq!(troplog(&["moduli", "2", "--certify-product", "1", "--sigma", "1,-1"]).code, 5);
    assert_eq!(troplog(&["moduli", "5"]).doc["payload"]["cones"].as_array().unwrap().len(), 26);
}

#[test]
fn subdivision_examples() {
    let dir = TempDir::new().unwrap();
    let fan = file(&dir, "p1.fan", P1_FAN);
    let run = troplog(&["moduli", "3", "--sigma", "1,1,-2", "--subdivide", s(&fan)]);
    assert_eq!(run.code, 0);
    let sub: SubdividedComplex = serde_json::from_value(run.doc["payload"].clone()).unwrap();
    assert_eq!(sub.statistics.total_maximal_cells, 2);

    let run = troplog(&["--seed", "7", "subdivide", "4", "--sigma", "1,1,1,-3", "--fan", s(&fan), "--samples", "100"]);
    let check = &run.doc["payload"]["sample_check"];
    assert_eq!((check["uncovered"].as_u64(), check["interior_overlaps"].as_u64()), (Some(0), Some(0)));
    assert_eq!(run.doc["payload"]["statistics"]["cells_per_cone"]["(1,2,(3,4))"], 3);

    let half = file(&dir, "half.fan", r#"{"dim":1,"cones":[{"gens":[[1]]},{"gens":[]}]}"#);
    let run = troplog(&["subdivide", "3", "--sigma", "0,0,0", "--fan", s(&half)]);
    assert_eq!((run.code, run.doc["code"].as_str()), (6, Some("incomplete_fan")));
}

#[test]
fn selfmap_examples() {
    let run = troplog(&["selfmap", "3", "0"]);
    assert_eq!(run.doc["payload"]["kernel_order"], 3);
    let run = troplog(&["selfmap", "0", "5"]);
    assert_eq!(run.doc["payload"]["kernel_order"], 0);
    let run = troplog(&["selfmap", "2", "1", "--compose", "3", "4"]);
    let f: SelfMapNormalForm = serde_json::from_value(run.doc["payload"].clone()).unwrap();
    assert_eq!((f.degree, f.translation.to_string().as_str()), (6, "9"));
    let run = troplog(&["selfmap", "-2", "1/2", "--compose", "-1", "-3"]);
    assert_eq!(run.doc["payload"]["translation"], "13/2");
    assert_eq!(troplog(&["selfmap", "2", "x +"]).code, 2);
}

#[test]
fn output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let fan = file(&dir, "p1.fan", P1_FAN);
    let args = ["subdivide", "5", "--sigma", "2,1,-1,-3,1", "--fan", s(&fan), "--samples", "20"];
    let a = troplog(&args);
    let b = troplog(&args);
    let mut single = vec!["--jobs", "1"];
    single.extend_from_slice(&args);
    let c = troplog(&single);
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
    assert!(a.doc.get("timing_ms").is_none());
    assert!(troplog(&["--timing", "selfmap", "1", "0"]).doc["timing_ms"].is_u64());
}

#[test]
fn payloads_round_trip() {
    let run = troplog(&["moduli", "5", "--sigma", "1,1,-1,-2,1", "--sigma", "0,1,0,0,-1"]);
    let cx: ConeComplex = serde_json::from_value(run.doc["payload"].clone()).unwrap();
    assert_eq!(serde_json::to_value(&cx).unwrap(), run.doc["payload"]);
}
