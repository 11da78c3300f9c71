use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conerisk")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_reports_and_compares_verdicts() {
    let o = run(&["check", "--corpus", "avar4-unit"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("time-consistent false"));
    assert!(text.contains("pasted (1, 0, 0, 0)"));

    assert_eq!(run(&["check", "--corpus", "avar4-paper", "--expect", "true,true,true"]).status.code(), Some(0));
    assert_eq!(run(&["check", "--corpus", "avar4-unit", "--expect", "true,true,true"]).status.code(), Some(1));
    assert_eq!(run(&["check", "--corpus", "haezendonck4-unit", "--expect", "true"]).status.code(), Some(0));
    assert_eq!(run(&["check", "--corpus", "haezendonck4-paper", "--expect", "true"]).status.code(), Some(1));
}

#[test]
fn check_json_is_machine_readable() {
    let o = run(&["check", "--corpus", "avar4-paper", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["time_consistent"], true);
    assert_eq!(v["agreement"], true);
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(run(&["check", "--scenario", "/does/not/exist.json"]).status.code(), Some(2));
    assert_eq!(run(&["check", "--corpus", "no-such-scenario"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--corpus", "avar4-unit", "--t", "1", "--claim", "[1, 2]"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "--corpus", "avar4-unit", "--t", "7", "--claim", "[1, 2, 3, 4]"]).status.code(), Some(2));
    let o = run(&["paste", "--corpus", "avar4-unit", "--q", "[\"1/2\", \"1/2\", 0, 0]", "--q-prime", "[0, 0, 0, 1]", "--tau", "[1, 1, 1, 1]"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn eval_and_decompose() {
    let o = run(&["eval", "--corpus", "avar4-unit", "--t", "0", "--claim", "[1, -1, -1, -1]"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("epsilon_0 (1, 1, 1, 1)"));

    let o = run(&["decompose", "--corpus", "avar4-paper", "--claim", "[1, -1, -1, -1]"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("validated"));
    assert_eq!(run(&["decompose", "--corpus", "avar4-unit", "--claim", "[1, -1, -1, -1]"]).status.code(), Some(1));
}

#[test]
fn paste_and_witness() {
    let o = run(&["paste", "--corpus", "avar4-unit", "--q", "[\"1/2\", \"1/2\", 0, 0]", "--q-prime", "[\"1/2\", 0, \"1/2\", 0]", "--tau", "[1, 1, 1, 1]"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pasted (1, 0, 0, 0)"));

    let o = run(&["witness", "--corpus", "haezendonck4-paper", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["witness"].is_null());
}

#[test]
fn duals_and_corpus() {
    let o = run(&["duals", "--corpus", "avar4-paper", "--t", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["corpus", "list"]);
    assert!(stdout(&o).lines().any(|l| l == "txcost4"));
    let o = run(&["corpus", "emit", "random-7"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = std::env::temp_dir().join("conerisk-cli-test.json");
    std::fs::write(&dir, &o.stdout).unwrap();
    assert_eq!(run(&["check", "--scenario", dir.to_str().unwrap()]).status.code(), Some(0));
}
