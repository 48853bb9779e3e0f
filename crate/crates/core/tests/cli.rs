use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn conduche(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conduche"))
        .args(args)
        .env_remove("CONDUCHE_SEED")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn write(dir: &Path, name: &str, doc: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn examples_list_names_the_catalog() {
    let out = conduche(&["examples", "--list"]);
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<String> = report(&out)["result"]["examples"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap().to_string())
        .collect();
    for expected in ["o2", "o3", "2-graph", "z2", "z3", "s3", "pair-groupoid-3"] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }
}

#[test]
fn validate_bundled_cuntz_graph() {
    let out = conduche(&["validate", "--fibration", "o2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["command"], "validate");
    assert_eq!(r["passed"], true);
}

#[test]
fn shown_example_round_trips_through_validate() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["2-graph", "s3", "pair-groupoid-3"] {
        let shown = report(&conduche(&["examples", "--show", name]));
        let path = write(dir.path(), &format!("{name}.json"), &shown["result"]);
        let from_catalog = report(&conduche(&["validate", "--fibration", name]));
        let from_file = report(&conduche(&["validate", "--fibration", &path]));
        assert_eq!(from_file["passed"], true, "{name}");
        assert_eq!(from_catalog["result"], from_file["result"], "{name}");
    }
}

#[test]
fn corrupted_squares_fail_with_a_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc = report(&conduche(&["examples", "--show", "2-graph"]))["result"].clone();
    let first = doc["domain"]["squares"][0][0].as_str().unwrap().to_string();
    let swapped = match first.as_str() {
        "b1" => "b2",
        "b2" => "b1",
        "r1" => "r2",
        _ => "r1",
    };
    doc["domain"]["squares"][0][0] = json!(swapped);
    let path = write(dir.path(), "broken.json", &doc);
    let out = conduche(&["validate", "--fibration", &path]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["passed"], false);
    assert!(!r["warnings"].as_array().unwrap().is_empty());
    assert!(r.to_string().contains("counterexample"));
}

#[test]
fn unreadable_input_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbage.json");
    std::fs::write(&path, "{ not json").unwrap();
    let out = conduche(&["validate", "--fibration", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let missing = conduche(&["validate", "--fibration", "no-such-example"]);
    assert_eq!(missing.status.code(), Some(2));
    let usage = conduche(&["validate", "--fibration", "o2", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn algebra_words_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let word = "s(e1)*s(e2.e1)^* + 2*p(v)";
    let first = report(&conduche(&["algebra", "--fibration", "o2", "--word", word]));
    let element = &first["result"]["result"]["element"];
    let path = write(dir.path(), "element.json", element);
    let second = report(&conduche(&[
        "algebra",
        "--fibration",
        "o2",
        "--input",
        &path,
    ]));
    assert_eq!(second["result"]["result"], first["result"]["result"]);
    let compared = conduche(&[
        "algebra",
        "--fibration",
        "o2",
        "--word",
        "s(e1)^**s(e1)",
        "--compare",
        "p(v)",
    ]);
    assert_eq!(compared.status.code(), Some(0));
    let differs = conduche(&[
        "algebra",
        "--fibration",
        "o2",
        "--word",
        "s(e1)",
        "--compare",
        "s(e2)",
    ]);
    assert_eq!(differs.status.code(), Some(1));
}

#[test]
fn regular_representation_satisfies_the_relations() {
    let out = conduche(&[
        "rep-check",
        "--fibration",
        "z3",
        "--builtin",
        "regular",
        "--exact",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["report"]["mode"], "exact");
}

#[test]
fn non_unitary_matrices_fail_relation_six() {
    let dir = tempfile::tempdir().unwrap();
    let matrices = json!({
        "projections": { "*": [["1", "0"], ["0", "1"]] },
        "isometries": {
            "0": [["1", "0"], ["0", "1"]],
            "1": [["0", "1"], ["0", "0"]]
        }
    });
    let path = write(dir.path(), "matrices.json", &matrices);
    let out = conduche(&[
        "rep-check",
        "--fibration",
        "z2",
        "--matrices",
        &path,
        "--exact",
    ]);
    let r = report(&out);
    assert_eq!(out.status.code(), Some(1), "{r}");
    let relations = r["result"]["report"]["relations"].as_array().unwrap();
    let six = relations.iter().find(|x| x["relation"] == 6).unwrap();
    assert_eq!(six["passed"], false);
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "germ",
        "--fibration",
        "pair-groupoid-3",
        "--op",
        "enumerate",
    ];
    let a = conduche(&args);
    let b = conduche(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(report(&a)["result"]["count"], 9);
    let z2 = report(&conduche(&[
        "germ",
        "--fibration",
        "z2",
        "--op",
        "enumerate",
    ]));
    assert_eq!(z2["result"]["count"], 2);
}

#[test]
fn text_format_and_output_file() {
    let out = conduche(&["--format", "text", "validate", "--fibration", "o2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.lines().any(|l| l.starts_with("command: validate")),
        "{text}"
    );
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = conduche(&[
        "--output",
        path.to_str().unwrap(),
        "validate",
        "--fibration",
        "o2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(saved["passed"], true);
}

#[test]
fn cylinder_agrees_with_brute_force() {
    let out = conduche(&[
        "cylinder",
        "--fibration",
        "o2",
        "--alpha",
        "e1",
        "--beta",
        "e1.e2",
        "--oracle",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["cells"], json!(["Z(e1.e2)"]));
    assert_eq!(r["result"]["oracle"]["agrees"], true);
    let disjoint = report(&conduche(&[
        "cylinder",
        "--fibration",
        "o2",
        "--alpha",
        "e1",
        "--beta",
        "e2",
    ]));
    assert_eq!(disjoint["result"]["empty"], true);
}
