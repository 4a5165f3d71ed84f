use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use nsbox::rational::{parse_rational, Rational};
use serde_json::Value;

fn nsbox(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nsbox")).args(args).output().expect("binary runs")
}

fn nsbox_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_nsbox"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn rational(v: &Value) -> Rational {
    parse_rational(v.as_str().expect("rational string")).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nsbox-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn gen_to(path: &Path, args: &[&str]) {
    let mut full = vec!["gen"];
    full.extend_from_slice(args);
    let out = nsbox(&full);
    assert_eq!(out.status.code(), Some(0));
    fs::write(path, &out.stdout).unwrap();
}

#[test]
fn gen_pr_matches_library() {
    let out = nsbox(&["gen", "pr", "--n", "2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let cli_box = nsbox::boxes::BellBox::from_json(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(cli_box, nsbox::boxes::pr_box(2, 2).unwrap());
    assert!(!out.stderr.is_empty());
}

#[test]
fn witness_on_pr_violates_by_quarter_epsilon() {
    let path = scratch("pr22.json");
    gen_to(&path, &["pr"]);
    let out = nsbox(&["witness", "--box", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let w = json(&out);
    assert_eq!(w["j"], 0);
    let eps = rational(&w["epsilon"]);
    assert!(eps > Rational::from_integer(0.into()));
    assert_eq!(rational(&w["violation"]), eps / Rational::from_integer(4.into()));
}

#[test]
fn game_graph_xor_counts() {
    let out = nsbox(&["game-graph", "--xor", "--n", "2", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let g = json(&out);
    assert_eq!((g["vertices"].as_u64(), g["edges"].as_u64()), (Some(8), Some(8)));
    assert_eq!(g["connected"], true);
    assert_eq!(g["winning_boxes"], 1);
}

#[test]
fn disconnected_game_exits_one() {
    let out = nsbox(&["game-graph", "--constant"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["connected"], false);
}

#[test]
fn game_file_round_trip() {
    let path = scratch("xor32.json");
    fs::write(&path, nsbox::games::xor_game(3, 2).unwrap().to_json()).unwrap();
    let out = nsbox(&["game-graph", "--game", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["vertices"], 32);
}

#[test]
fn gen_validate_analyse_round_trip() {
    let path = scratch("iso.json");
    gen_to(&path, &["iso", "--eps", "3/5"]);
    let p = path.to_str().unwrap();
    assert_eq!(nsbox(&["validate", "--box", p]).status.code(), Some(0));
    assert_eq!(nsbox(&["vertex-cert", "--box", p]).status.code(), Some(1));
    let classical = nsbox(&["classical", "--box", p]);
    assert_eq!(classical.status.code(), Some(1));
    assert!(!json(&classical).is_null());
    assert_eq!(nsbox(&["orthograph", "--box", p]).status.code(), Some(0));
    assert_eq!(nsbox(&["aq-check", "--box", p]).status.code(), Some(0));
    assert_eq!(nsbox(&["witness", "--box", p]).status.code(), Some(1));
}

#[test]
fn stdin_box_and_out_file() {
    let pr = nsbox(&["gen", "pr"]).stdout;
    let out_path = scratch("vertex.json");
    let out = nsbox_stdin(&["vertex-cert", "--box", "-", "--out", out_path.to_str().unwrap()], &pr);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["is_vertex"], true);
    assert_eq!(v["rank"], 16);
}

#[test]
fn pr_is_outside_almost_quantum_set() {
    let pr = nsbox(&["gen", "pr"]).stdout;
    let out = nsbox_stdin(&["aq-check", "--box", "-"], &pr);
    assert_eq!(out.status.code(), Some(1));
    let fixture = nsbox(&["aq-check", "--fixture", "tsirelson_chsh"]);
    assert_eq!(fixture.status.code(), Some(0));
    assert_eq!(json(&fixture)["box"]["approximate"], true);
}

#[test]
fn invalid_box_exits_two() {
    let path = scratch("bad.json");
    let mut b: Value = serde_json::from_slice(&nsbox(&["gen", "pr"]).stdout).unwrap();
    b["entries"][0] = "1/1".into();
    fs::write(&path, b.to_string()).unwrap();
    let p = path.to_str().unwrap();
    let v = nsbox(&["validate", "--box", p]);
    assert_eq!(v.status.code(), Some(1));
    assert_eq!(json(&v)["valid"], false);
    assert_eq!(nsbox(&["classical", "--box", p]).status.code(), Some(2));

    fs::write(&path, "{ not json").unwrap();
    assert_eq!(nsbox(&["validate", "--box", p]).status.code(), Some(2));
    assert_eq!(nsbox(&["gen", "iso", "--eps", "0.5"]).status.code(), Some(2));
    assert_eq!(nsbox(&["gen", "unknown"]).status.code(), Some(2));
}

#[test]
fn capacity_exits_three() {
    let path = scratch("pr-cap.json");
    gen_to(&path, &["pr"]);
    let out = nsbox(&["classical", "--box", path.to_str().unwrap(), "--det-cap", "15"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
}

#[test]
fn sweeps_are_deterministic_across_jobs() {
    let one = nsbox(&["distill", "--eps", "1/10,1/2,3/4", "--rounds", "8", "--jobs", "1"]);
    let three = nsbox(&["distill", "--eps", "1/10,1/2,3/4", "--rounds", "8", "--jobs", "3"]);
    assert_eq!(one.status.code(), Some(1));
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(json(&one)["schedules"][1]["distilled"], true);

    let a = nsbox(&["extend", "--eps", "0/1,1/4,9/10", "--jobs", "2"]);
    let b = nsbox(&["extend", "--eps", "0/1,1/4,9/10"]);
    assert_eq!(a.stdout, b.stdout);
    let ext = json(&a);
    assert_eq!(ext["extensions"][1]["cut_value"], "15/4");
}

#[test]
fn aq_check_output_is_byte_identical() {
    let path = scratch("iso7.json");
    gen_to(&path, &["iso", "--eps", "7/10"]);
    let run = || nsbox(&["aq-check", "--box", path.to_str().unwrap()]).stdout;
    let first = run();
    assert_eq!(first, run());
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["threads"], 1);
}

#[test]
fn orthograph_edge_list_parses_back() {
    let edges = scratch("g223.txt");
    let out = nsbox(&["orthograph", "--n", "2", "--m", "2", "--k", "3", "--edges", edges.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let (n, parsed) = nsbox::orthograph::parse_edge_list(&fs::read_to_string(&edges).unwrap()).unwrap();
    let g = nsbox::orthograph::build_orthogonality_graph(&nsbox::scenario::BellScenario::uniform(2, 2, 3).unwrap());
    assert_eq!(n, g.vertex_count());
    assert_eq!(parsed.len(), g.edge_count());
}
