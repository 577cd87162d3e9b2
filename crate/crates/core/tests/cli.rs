use std::process::{Command, Output};

use docalc::corpus;
use docalc::identify::{replay, DerivationRecord};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data");

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_docalc")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    format!("{DATA}/{name}")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn identified_query_exits_zero_with_the_formula() {
    let o = run(&["identify", "--graph", &data("frontdoor.graph"), "--query", "P(y | do(x))"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("formula: Σ_z P(z|x) Σ_x' P(y|x',z) P(x')"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    let bow = run(&["identify", "--graph", &data("bow.graph"), "--query", "P(y|do(x))"]);
    assert_eq!(bow.status.code(), Some(2));
    assert!(stdout(&bow).contains("not identified within depth 16"));
    assert!(stdout(&bow).contains("not a proof"));

    let capped = run(&["identify", "--graph", &data("frontdoor.graph"), "--query", "P(y|do(x))", "--max-states", "5"]);
    assert_eq!(capped.status.code(), Some(3));

    let missing = run(&["identify", "--graph", &data("nope.graph"), "--query", "P(y|do(x))"]);
    assert_eq!(missing.status.code(), Some(1));

    let syntax = run(&["identify", "--graph", &data("frontdoor.graph"), "--query", "P(y|do(x)"]);
    assert_eq!(syntax.status.code(), Some(1));

    let unknown = run(&["identify", "--graph", &data("frontdoor.graph"), "--query", "P(w|do(x))"]);
    assert_eq!(unknown.status.code(), Some(1));

    let no_cpts = run(&["eval", "--graph", &data("frontdoor.graph"), "--query", "P(y|do(x))"]);
    assert_eq!(no_cpts.status.code(), Some(1));

    let bad_order = run(&["identify", "--graph", &data("frontdoor.graph"), "--query", "P(y|do(x))", "--move-order", "r9"]);
    assert_eq!(bad_order.status.code(), Some(1));
}

fn json(args: &[&str]) -> serde_json::Value {
    let o = run(args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn json_reports_replay_to_the_same_formula() {
    let g = corpus::graph("frontdoor").unwrap();
    let path = data("frontdoor.graph");
    for args in [
        vec!["--query", "P(y|do(x))"],
        vec!["--query", "P(y,z|do(x))"],
        vec!["--query", "P(y|do(x))", "--known", "P(z|do(x))", "--known", "P(y|do(z))"],
    ] {
        let mut full = vec!["identify", "--graph", &path, "--format", "json"];
        full.extend(args);
        let v = json(&full);
        assert_eq!(v["schema"], 1);
        assert_eq!(v["outcome"], "identified");
        let rec: DerivationRecord = serde_json::from_value(v.clone()).unwrap();
        let d = replay(&g, &rec).unwrap();
        assert_eq!(d.final_expr.render_with(&g), v["formula"].as_str().unwrap());
        assert_eq!(d.to_record(&g), rec);
    }
}

#[test]
fn eval_reports_values_next_to_the_oracle() {
    let v = json(&[
        "eval", "--graph", &data("frontdoor.graph"), "--cpts", &data("frontdoor_cpts.json"), "--query", "P(y|do(x))", "--format", "json",
    ]);
    let rows = v["numeric"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r["equal"] == true));
    assert_eq!(v["oracle"]["agree"], true);

    let o = run(&["eval", "--graph", &data("frontdoor.graph"), "--cpts", &data("frontdoor_cpts.json"), "--query", "P(y=1|do(x=0))"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("equal within 1e-9"));
}

#[test]
fn policy_subcommand() {
    for file in ["backdoor_policy_map.json", "backdoor_policy_table.json", "backdoor_policy_strips.json"] {
        let v = json(&[
            "policy", "--graph", &data("backdoor.graph"), "--cpts", &data("backdoor_cpts.json"),
            "--policy", &data(file), "--query", "P(y)", "--format", "json",
        ]);
        assert_eq!(v["outcome"], "identified");
        assert_eq!(v["oracle"]["agree"], true);
        let total: f64 = v["numeric"].as_array().unwrap().iter().map(|r| r["oracle"].as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn selftest_passes_and_is_reproducible() {
    let a = run(&["selftest"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    let text = stdout(&a);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS criterion")).count(), 8);
    assert!(text.contains("PASS loader warning surfaced"));
    let b = run(&["selftest"]);
    assert_eq!(text, stdout(&b));
}
