use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ambilogic"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

#[test]
fn validate_ok_and_violations() {
    let o = run(&["validate", "--model", &fixture("m_red.json"), "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o)["ok"], true);

    let o = run(&["validate", "--model", &fixture("m_sig_bad.json"), "--json"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["ok"], false);
    let kinds: Vec<&str> = v["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["kind"].as_str().unwrap())
        .collect();
    assert!(kinds.contains(&"A6Membership"), "{kinds:?}");
    let witness = v["violations"]
        .as_array()
        .unwrap()
        .iter()
        .find(|x| x["kind"] == "A6Membership")
        .unwrap();
    assert_eq!(witness["state"], "w2");
    assert_eq!(witness["interpreting_agent"], 2);
}

#[test]
fn malformed_model_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{bad").unwrap();
    let o = run(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("invalid model file"), "{}", stderr(&o));

    let o = run(&["validate", "--model", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn eval_modes_differ_on_ambiguous_model() {
    let m = fixture("m_red.json");
    let o = run(&[
        "eval", "--model", &m, "--formula", "Pr2(p) >= 1/2", "--state", "w1", "--agent", "1", "--mode", "ou",
        "--show-value",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "true\nvalue 1/2\n");

    let o = run(&[
        "eval", "--model", &m, "--formula", "Pr2(p) >= 1", "--state", "w1", "--agent", "1", "--mode", "in",
        "--show-value", "--json",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["value"], true);
    assert_eq!(v["lhs"], "1");

    let o = run(&[
        "eval", "--model", &m, "--formula", "Pr2(p) >= 1", "--state", "w1", "--agent", "1", "--mode", "ou",
    ]);
    assert_eq!(stdout(&o), "false\n");
}

#[test]
fn eval_with_priors() {
    let m = fixture("m_ai.json");
    let o = run(&[
        "eval", "--model", &m, "--formula", "Pr1(p) >= 1/2", "--state", "a", "--agent", "2", "--mode", "ou-ai",
        "--show-value",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o), "true\nvalue 1\n");

    let o = run(&[
        "eval", "--model", &m, "--formula", "Pr1(p) >= 1/2", "--state", "a", "--agent", "2", "--mode", "in-ai",
        "--show-value",
    ]);
    assert_eq!(stdout(&o), "true\nvalue 1/2\n");
}

#[test]
fn eval_errors() {
    let m = fixture("m_red.json");
    let o = run(&["eval", "--model", &m, "--formula", "B1 p", "--state", "w9", "--agent", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("w9"));

    let o = run(&["eval", "--model", &m, "--formula", "B1 (p", "--state", "w1", "--agent", "1"]);
    assert_eq!(code(&o), 2);

    let o = run(&["eval", "--model", &m, "--formula", "p@1", "--state", "w1", "--agent", "1", "--mode", "in"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn transform_disjoint_copies_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dc.json");
    let o = run(&[
        "transform",
        "disjoint-copies",
        "--model",
        &fixture("m_red.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(m["states"].as_array().unwrap().len(), 4);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("dc.json.sidecar.json")).unwrap()).unwrap();
    assert_eq!(sidecar["states"][1]["source"], "w1");
    assert_eq!(sidecar["states"][1]["tag"], 2);

    // The output is itself a valid model.
    let o = run(&["validate", "--model", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn transform_generate_priors_and_fix_interpretation() {
    let o = run(&["transform", "generate-priors", "--model", &fixture("m_red.json")]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    for i in 0..2 {
        assert_eq!(v["priors"][i]["w1"], "1/2");
        assert_eq!(v["priors"][i]["w2"], "1/2");
    }

    let o = run(&["transform", "fix-interpretation", "--model", &fixture("m_red.json"), "--agent", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&o);
    assert_eq!(v["interpretations"][0], v["interpretations"][1]);
}

#[test]
fn transform_preconditions() {
    let o = run(&["transform", "label-partitions", "--model", &fixture("m_red.json"), "--state", "w1"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("common-interpretation"));

    let o = run(&["transform", "label-partitions", "--model", &fixture("m_red.json")]);
    assert_eq!(code(&o), 2);
}

#[test]
fn translate_examples() {
    let m = fixture("m_red.json");
    let o = run(&["translate", "--model", &m, "--formula", "B2 p", "--agent", "1", "--mode", "in"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "B2 p@2");

    let o = run(&["translate", "--model", &m, "--formula", "B2 p", "--agent", "1", "--mode", "ou"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "B2 p@1");

    let o = run(&["translate", "--formula", "p@1", "--agent", "1"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("already contains"));
}

#[test]
fn check_rejects_zero_trials() {
    let o = run(&["check", "--trials", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn check_passes_and_is_deterministic() {
    let args = ["check", "--seed", "11", "--trials", "4", "--checks", "prop1,thm2-ou,thm2-in", "--json"];
    let a = run(&args);
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    let b = run(&args);
    let strip = |mut v: serde_json::Value| {
        for c in v["checks"].as_array_mut().unwrap() {
            c.as_object_mut().unwrap().remove("elapsed_ms");
        }
        v
    };
    let (va, vb) = (strip(json(&a)), strip(json(&b)));
    assert_eq!(va, vb);
    assert_eq!(va["checks"].as_array().unwrap().len(), 3);
    assert!(va["checks"][0]["comparisons"].as_u64().unwrap() > 0);
}

#[test]
fn check_catches_unsound_translation() {
    let o = run(&["check", "--seed", "3", "--trials", "50", "--checks", "thm2-in", "--naive-translation", "--json"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert!(v["checks"][0]["failed"].as_u64().unwrap() > 0);
    assert!(v["checks"][0]["counterexample"].is_object());
}

#[test]
fn unknown_check_name_is_usage_error() {
    let o = run(&["check", "--trials", "1", "--checks", "nope"]);
    assert_eq!(code(&o), 2);
}
