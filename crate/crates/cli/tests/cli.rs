use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const STREAM: &str = "step\nnode a\nnode b\nnode c\nedge a b\nstep\nnode d\nedge a c\nedge a d\nedge b c\nstep\nnode e\nedge a e\nedge d e\n";

fn dpgs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dpgs"))
        .args(args)
        .env_remove("DPGS_SEED")
        .output()
        .unwrap()
}

fn input(dir: &Path, text: &str) -> String {
    let p = dir.join("s.gs");
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn manifest(text: &str) -> Value {
    let first = text.lines().next().unwrap();
    serde_json::from_str(first.strip_prefix("# manifest: ").unwrap()).unwrap()
}

#[test]
fn exact_edge_counts() {
    let dir = tempfile::tempdir().unwrap();
    let i = input(dir.path(), STREAM);
    let o = dpgs(&["stats", "--input", &i, "--statistic", "edges", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(body, ["t,value", "1,1", "2,4", "3,6"]);
    assert_eq!(manifest(&text)["derived"]["statistic"], "edges");
}

#[test]
fn exact_triangles_and_components() {
    let dir = tempfile::tempdir().unwrap();
    let i = input(dir.path(), STREAM);
    let o = dpgs(&["stats", "--input", &i, "--statistic", "triangles", "--exact"]);
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(body, ["1,0", "2,1", "3,2"]);
    let o = dpgs(&["stats", "--input", &i, "--statistic", "cc", "--exact"]);
    let text = stdout(&o);
    let body: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(body, ["1,2", "2,1", "3,1"]);
}

#[test]
fn projection_drops_edges_over_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let i = input(dir.path(), STREAM);
    let o = dpgs(&["project", "--input", &i, "--degree-bound", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let edges: Vec<&str> = text.lines().filter(|l| l.starts_with("edge")).collect();
    assert_eq!(edges, ["edge a b"]);
    assert_eq!(text.lines().filter(|l| *l == "step").count(), 3);
}

#[test]
fn json_output_has_a_manifest_and_one_object_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let i = input(dir.path(), STREAM);
    let o = dpgs(&["stats", "--input", &i, "--statistic", "edges", "--exact", "--format", "json"]);
    let text = stdout(&o);
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["manifest"]["format"], "json");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[3]["value"].as_f64(), Some(6.0));
}

#[test]
fn private_runs_record_their_seed() {
    let dir = tempfile::tempdir().unwrap();
    let i = input(dir.path(), STREAM);
    let args = ["stats", "--input", &i, "--statistic", "edges", "--epsilon", "1", "--degree-bound", "3"];
    let o = dpgs(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let seed = manifest(&text)["seed"].as_u64().unwrap();
    let mut again = args.to_vec();
    let s = seed.to_string();
    again.extend(["--seed", &s]);
    assert_eq!(stdout(&dpgs(&again)), text);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let i = input(dir.path(), STREAM);
    let out = dir.path().join("out.csv");
    let base = ["transform", "--input", &i, "--statistic", "edges", "--epsilon", "1", "--delta", "1e-6", "--degree-bound", "3", "--seed", "3"];
    let o = dpgs(&base);
    let mut to_file = base.to_vec();
    to_file.extend(["--output", out.to_str().unwrap()]);
    let f = dpgs(&to_file);
    assert_eq!(f.status.code(), Some(0));
    assert!(f.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout(&o));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let i = input(dir.path(), STREAM);
    assert_eq!(dpgs(&["stats", "--input", &i, "--statistic", "paths", "--exact"]).status.code(), Some(1));
    assert_eq!(dpgs(&["stats", "--input", "/nonexistent/s.gs", "--statistic", "edges", "--exact"]).status.code(), Some(1));
    assert_eq!(dpgs(&["stats", "--input", &i]).status.code(), Some(2));
    assert_eq!(dpgs(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(dpgs(&["bench", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn duplicate_edges_need_lenient_mode() {
    let dir = tempfile::tempdir().unwrap();
    let i = input(dir.path(), "step\nnode a\nnode b\nedge a b\nedge b a\n");
    let args = ["stats", "--input", &i, "--statistic", "edges", "--exact"];
    assert_eq!(dpgs(&args).status.code(), Some(1));
    let mut lenient = args.to_vec();
    lenient.push("--lenient");
    let o = dpgs(&lenient);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("1,1\n"));
}

#[test]
fn distance_to_unboundedness_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let i = input(dir.path(), STREAM);
    let o = dpgs(&["stability-check", "--input", &i, "--degree-bound", "2", "--ell", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows[0], "t,dist");
    // a reaches degree 3 at step 2
    assert!(rows[1].starts_with("1,") && rows[1] != "1,0");
    assert_eq!(rows[2], "2,0");
    assert_eq!(rows[3], "3,0");
}

#[test]
fn small_exhaustive_sweep_passes() {
    let o = dpgs(&["stability-check", "--exhaustive", "--max-nodes", "3", "--max-steps", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
