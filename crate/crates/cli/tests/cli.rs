use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coinweigh"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("coinweigh-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_then_verify() {
    for inst in ["5,5", "4,4,5", "2^3", "7"] {
        let file = scratch(&format!("{inst}.json"));
        let out = run(&["solve", inst, "--emit", file.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{inst}");
        let out = run(&["verify", file.to_str().unwrap(), "--json"]);
        assert_eq!(out.status.code(), Some(0), "{inst}");
        let v = json(&out);
        assert_eq!(v["sound"], true);
        assert_eq!(v["complete"], true);
        assert_eq!(v["depth"], v["information_bound"]);
    }
}

#[test]
fn solve_json_schema() {
    let out = run(&["solve", "5,5", "--json", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "optimal");
    assert_eq!(v["depth"], 3);
    assert_eq!(v["candidates"], "25");
    assert!(v.get("wall_time_ms").is_none());
    let with_tree = json(&run(&["solve", "2", "--json", "--tree"]));
    assert!(with_tree["tree"]["weigh"]["left"].is_array());
}

#[test]
fn solve_is_deterministic() {
    let a = run(&["solve", "8,10", "--json", "--no-timing", "--tree"]);
    let b = run(&["solve", "8,10", "--json", "--no-timing", "--tree"]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "solve",
        "8,10",
        "--json",
        "--no-timing",
        "--tree",
        "--threads",
        "3",
    ]);
    let (a, c) = (json(&a), json(&c));
    assert_eq!(a["tree"], c["tree"]);
    assert_eq!(a["depth"], c["depth"]);
}

#[test]
fn exhausted_budget_exits_3() {
    let out = run(&["solve", "4,4,5", "--node-limit", "1", "--json"]);
    assert_eq!(out.status.code(), Some(3));
    let v = json(&out);
    assert_eq!(v["status"], "exhausted");
    assert_eq!(v["depth"], Value::Null);
    assert!(v["upper_bound"].as_u64().unwrap() >= 4);
}

#[test]
fn impossible_depth_exits_1() {
    let out = run(&["solve", "3,3", "--max-depth", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn broken_strategy_fails_verification() {
    let file = scratch("broken.json");
    run(&["solve", "3", "--emit", file.to_str().unwrap()]);
    let text = std::fs::read_to_string(&file).unwrap();
    let broken = text
        .replacen("\"s1\": 2", "\"s1\": 7", 1)
        .replacen("\"s1\": 3", "\"s1\": 2", 1);
    std::fs::write(&file, broken).unwrap();
    assert_eq!(
        run(&["verify", file.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let text = text.replacen("\"s1\": 3", "\"s1\": 2", 1);
    std::fs::write(&file, text).unwrap();
    let out = run(&["verify", file.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["sound"], false);
}

#[test]
fn bounds_for_large_n() {
    let out = run(&["bounds", "100", "2", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["information_bound"], 9);
    assert_eq!(v["prop1"], Value::Null);
    assert_eq!(v["prop2_stated"], 9);
    assert_eq!(v["prop2_derived"], 9);
    let small = json(&run(&["bounds", "10", "8", "--json"]));
    assert_eq!(small["prop1"]["value"], 17);
    assert_eq!(small["mu"], "17/8");
}

#[test]
fn table_reports_the_two_printed_misses() {
    let out = run(&["table", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 81);
    let off: Vec<u64> = rows
        .iter()
        .filter(|r| r["printed_within"] == false)
        .map(|r| r["n"].as_u64().unwrap())
        .collect();
    assert_eq!(off, [8, 26]);
}

#[test]
fn audit_is_certified() {
    let out = run(&["audit", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["audit"]["certified"], true);
    assert_eq!(v["gaps"]["exceeds_stated"], true);
    let text = String::from_utf8(run(&["audit"]).stdout).unwrap();
    assert!(text.contains("at d = 28"));
}

#[test]
fn audit_flags_a_non_tight_claim() {
    let file = scratch("claims.json");
    std::fs::write(
        &file,
        r#"[{"tag":"x1","subject":[5,5],"kind":"exact","value":4,"status":"PaperClaimed"}]"#,
    )
    .unwrap();
    let out = run(&["audit", "--claims", file.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["audit"]["claims"][0]["it_tight"], false);
}

#[test]
fn arrow_found_and_closed() {
    let file = scratch("arrow.json");
    let out = run(&[
        "arrow",
        "3,3",
        "--profile",
        "one-rep:3@1",
        "--emit",
        file.to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "found");
    assert_eq!(v["closed_verified"], true);
    assert_eq!(
        run(&["verify", file.to_str().unwrap()]).status.code(),
        Some(0)
    );
    let none = run(&["arrow", "5,5", "--profile", "one-rep:9@1"]);
    assert_eq!(none.status.code(), Some(1));
}

fn play(file: &str, input: &str) -> Output {
    let mut child = bin()
        .args(["play", file])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn play_session() {
    let file = scratch("play.json");
    run(&["solve", "5,5", "--emit", file.to_str().unwrap()]);
    let f = file.to_str().unwrap();
    let out = play(f, "X\nB\nB\nB\n");
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("unrecognised answer \"X\""));
    assert!(text.contains("counterfeits: ("));
    assert_eq!(play(f, "B\n").status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["solve", "0,3"]).status.code(), Some(2));
    assert_eq!(
        run(&["verify", "/nonexistent/file.json"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}
