use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ijtamari"))
        .args(args)
        .env_remove("IJTAMARI_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const RUNNING: [&str; 4] = ["--I", "1,2,3,5,9", "--Jbar", "2,7,8,9"];

#[test]
fn verify_running_pair() {
    let o = run(&[&["verify"], &RUNNING[..]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("dimensions F/U/S/P: 7/7/5/5"));
    assert!(text.contains("16 facets of dim 7"));
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn count_from_word_and_pair() {
    let o = run(&["count", "--nu", "ENEENNE"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("catalan: 16"));
    let from_pair = run(&[&["count"], &RUNNING[..]].concat());
    assert!(stdout(&from_pair).contains("nu: ENEENNE"));
    let csv = run(&["count", "--nu", "ENN", "--format", "csv"]);
    assert_eq!(stdout(&csv), "nu,catalan,narayana,schroeder\nENN,3,1 2,3 2\n");
}

#[test]
fn reduce_small_graph() {
    let o = run(&["reduce", "--I", "1,2", "--Jbar", "2,3,4", "--order", "length"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains(
        "reduced form: x_{12}x_{13}x_{14} + x_{13}x_{14}x_{23} + x_{14}x_{23}x_{24} + x_{13}x_{14}β + x_{14}x_{23}β"
    ));
    assert!(text.contains("at x = 1: 3 + 2β"));
}

#[test]
fn json_is_tagged_and_deterministic() {
    let args = ["sweep", "--max-n", "3", "--random", "5", "--seed", "11", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["format"], "ijtamari/v1");
    assert_eq!(doc["command"], "sweep");
    assert_eq!(doc["failing"], 0);
}

#[test]
fn exhaustive_sweep_passes() {
    let o = run(&["sweep", "--max-n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("453 pairs, 0 failing\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["verify", "--I", "2", "--Jbar", "1"]).status.code(), Some(2));
    assert_eq!(run(&["reduce", "--I", "1,2"]).status.code(), Some(2));
    assert_eq!(run(&["count", "--nu", "ENX"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--max-n", "0"]).status.code(), Some(2));
    let limited = run(&[&["reduce"], &RUNNING[..], &["--max-reductions", "3"]].concat());
    assert_eq!(limited.status.code(), Some(3));
    // normalization rescues a pair whose extra elements lie on no arc
    assert_eq!(run(&["construct", "--I", "1,4", "--Jbar", "2,3"]).status.code(), Some(2));
    assert_eq!(run(&["construct", "--I", "1,4", "--Jbar", "2,3", "--normalize"]).status.code(), Some(0));
}

#[test]
fn dot_output_is_stable() {
    let o = run(&[&["construct"], &RUNNING[..], &["--format", "dot"]].concat());
    let text = stdout(&o);
    assert_eq!(text.matches("digraph").count(), 4);
    assert_eq!(text, stdout(&run(&[&["construct"], &RUNNING[..], &["--format", "dot"]].concat())));
    let tri = run(&["triangulate", "--I", "1,2", "--Jbar", "2,3,4", "--format", "dot"]);
    assert_eq!(stdout(&tri).matches(" -- ").count(), 2);
}

#[test]
fn writes_into_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_ijtamari"))
        .args(["count", "--nu", "EN", "--format", "json"])
        .env("IJTAMARI_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let written = std::fs::read_to_string(dir.path().join("count.json")).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&written).unwrap();
    assert_eq!(doc["schroeder"], serde_json::json!(["2", "1"]));
}
