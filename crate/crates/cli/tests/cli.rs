use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tencoder::frontend::{compile, SourceProgram};
use tencoder::refinterp::interpret;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_t-encoder"));
    c.env_remove("T_ENCODER_SOLVER");
    c
}

fn program(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/programs").join(format!("{name}.alg"))
}

fn fixture_solver() -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/brute_solver.py");
    format!("python3 {}", p.display())
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn encode(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(format!("{name}.cnf"));
    let src = program(name);
    let mut args = vec!["encode", src.to_str().unwrap(), "-o", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

fn metrics(summary: &str) -> (u64, u64) {
    let w: Vec<&str> = summary.split_whitespace().collect();
    let at = |k: &str| w[w.iter().position(|x| *x == k).unwrap() + 1].parse().unwrap();
    (at("vars"), at("clauses"))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn encode_lfsr_to_stdout() {
    let o = run(&["encode", path(&program("lfsr19"))]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("c t-encoding v1\n"));
    assert!(text.contains("\np cnf 27 "));
    assert_eq!(metrics(&stderr(&o)).0, 27);
}

#[test]
fn encode_bivium_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.cnf");
    let o = run(&["encode", path(&program("bivium")), "-o", path(&out)]);
    assert_eq!(code(&o), 0);
    let (v, c) = metrics(&stdout(&o));
    assert!((586..=2344).contains(&v), "{v}");
    assert!((3703..=14810).contains(&c), "{c}");
}

#[test]
fn encode_errors() {
    assert_eq!(code(&run(&["encode", "/no/such/file.alg"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.alg");
    fs::write(&bad, "__in bit x; __out bit y; void main() { y = q; }").unwrap();
    let o = run(&["encode", path(&bad)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("undeclared identifier"));
    assert_eq!(code(&run(&["encode"])), 2);
    assert_eq!(code(&run(&["encode", path(&program("adder4")), "--max-arity", "13"])), 1);
}

#[test]
fn aiger_output() {
    let o = run(&["encode", path(&program("adder4")), "--format", "aiger"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let head: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!((head[0], head[2], head[3], head[4]), ("aag", "4", "0", "3"));
}

#[test]
fn preimage_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = encode(dir.path(), "toyhash6to3", &[]);
    let r = compile(&SourceProgram::from_file(&program("toyhash6to3")).unwrap()).unwrap();
    let x = [true, false, true, true, false, false];
    let y = interpret(&r, &x).unwrap().outputs;
    let ybits: String = y.iter().map(|&b| if b { '1' } else { '0' }).collect();
    let yfile = dir.path().join("y.txt");
    fs::write(&yfile, format!("{ybits}\n")).unwrap();
    let inst = dir.path().join("inst.cnf");
    let at = format!("@{}", path(&yfile));
    let o = run(&["instantiate", path(&t), "--output", &at, "-o", path(&inst)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(fs::read_to_string(&inst).unwrap().contains(&format!("c bound output {ybits}\n")));

    let jsonl = dir.path().join("solve.jsonl");
    let o = run(&["solve", path(&inst), "--embedded", "--jsonl", path(&jsonl)]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("s SATISFIABLE\n"));
    let xline = out.lines().find(|l| l.starts_with("x = ")).unwrap();
    let bin = xline.split('(').nth(1).unwrap().trim_end_matches(')');
    let found: Vec<bool> = bin.chars().map(|c| c == '1').collect();
    assert_eq!(interpret(&r, &found).unwrap().outputs, y);
    let rec: serde_json::Value = serde_json::from_str(fs::read_to_string(&jsonl).unwrap().trim()).unwrap();
    assert_eq!(rec["status"], "SAT");
    assert_eq!(rec["x"]["bin"], bin);
}

#[test]
fn length_mismatch_is_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let t = encode(dir.path(), "adder4", &[]);
    assert_eq!(code(&run(&["instantiate", path(&t), "--output", "1111"])), 1);
}

#[test]
fn hex_and_binary_outputs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let t = encode(dir.path(), "adder4", &[]);
    let a = run(&["instantiate", path(&t), "--output", "101"]);
    let b = run(&["instantiate", path(&t), "--output", "0x5"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn collision_and_unsat() {
    let dir = tempfile::tempdir().unwrap();
    let toy = encode(dir.path(), "toyhash6to3", &[]);
    let inst = dir.path().join("col.cnf");
    assert_eq!(code(&run(&["instantiate", path(&toy), "--collision", "-o", path(&inst)])), 0);
    let o = run(&["solve", path(&inst)]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let grab = |k: &str| out.lines().find(|l| l.starts_with(k)).unwrap().split_whitespace().nth(2).unwrap().to_string();
    assert_ne!(grab("x = "), grab("x2 = "));
    assert_eq!(grab("y = "), grab("y2 = "));

    let perm = encode(dir.path(), "perm6", &[]);
    let inst = dir.path().join("perm.cnf");
    assert_eq!(code(&run(&["instantiate", path(&perm), "--collision", "-o", path(&inst)])), 0);
    let o = run(&["solve", path(&inst)]);
    assert_eq!(code(&o), 20);
    assert!(stdout(&o).starts_with("s UNSATISFIABLE"));
}

#[test]
fn budget_exhaustion_is_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let t = encode(dir.path(), "bivium", &[]);
    let inst = dir.path().join("b.cnf");
    let y = "0".repeat(200);
    assert_eq!(code(&run(&["instantiate", path(&t), "--output", &y, "-o", path(&inst)])), 0);
    let o = run(&["solve", path(&inst), "--max-propagations", "1"]);
    assert_eq!(code(&o), 10);
    assert!(stdout(&o).contains("UNKNOWN"));
}

#[test]
fn guessed_family_files() {
    let dir = tempfile::tempdir().unwrap();
    let t = encode(dir.path(), "toyhash6to3", &[]);
    let fam = dir.path().join("fam");
    let o = run(&["instantiate", path(&t), "--output", "010", "--guess", "1,2,3", "--exhaustive", "--out-dir", path(&fam)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let mut names: Vec<String> = fs::read_dir(&fam).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names.len(), 8);
    assert_eq!(names[0], "instance_000.cnf");
    let stream = run(&["instantiate", path(&t), "--output", "010", "--guess", "in[0],in[1]", "--exhaustive"]);
    assert_eq!(stdout(&stream).matches("c --- instance ").count(), 4);
    assert_eq!(code(&run(&["instantiate", path(&t), "--guess", "1"])), 2);
}

#[test]
fn switching_file() {
    let dir = tempfile::tempdir().unwrap();
    let t = encode(dir.path(), "toyhash6to3", &[]);
    let sw = dir.path().join("sw.txt");
    fs::write(&sw, "1 0\n-2 0 3 0\n").unwrap();
    let o = run(&["instantiate", path(&t), "--switch", path(&sw), "--activate", "1,2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("c switch 10\n") && text.contains("c switch 11\n"));
    assert!(text.contains("c activate 10\n"));
    assert_eq!(code(&run(&["instantiate", path(&t), "--switch", path(&sw), "--activate", "3"])), 1);
}

#[test]
fn missing_header() {
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("plain.cnf");
    fs::write(&plain, "p cnf 2 1\n1 -2 0\n").unwrap();
    let o = run(&["solve", path(&plain)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("not a t-encoding template"));
}

#[test]
fn verify_command() {
    let lfsr = program("lfsr19");
    let o = run(&["verify", path(&lfsr), "-k", "100", "--seed", "4"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("100/100 passed"));
    let o = run(&["verify", path(&lfsr), "-k", "100", "--mutate"]);
    assert_ne!(code(&o), 0);
    assert!(stdout(&o).contains("FAIL"));
    assert_eq!(code(&run(&["verify", path(&lfsr), "-k", "0"])), 2);
}

#[test]
fn estimate_command() {
    let dir = tempfile::tempdir().unwrap();
    let t = encode(dir.path(), "toyhash6to3", &[]);
    let j1 = dir.path().join("a.jsonl");
    let j2 = dir.path().join("b.jsonl");
    let a = run(&["estimate", path(&t), "--guess", "1-6", "-N", "50", "--seed", "3", "--jsonl", path(&j1)]);
    let b = run(&["estimate", path(&t), "--guess", "1-6", "-N", "50", "--seed", "3", "--jsonl", path(&j2)]);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(fs::read(&j1).unwrap(), fs::read(&j2).unwrap());
    let out = stdout(&a);
    assert!(out.contains("rho 1.000000"));
    assert!(out.contains("simplified estimator"));
    let rec: serde_json::Value = serde_json::from_str(fs::read_to_string(&j1).unwrap().trim()).unwrap();
    assert_eq!(rec["report"]["rho"], 1.0);
    assert_eq!(rec["report"]["seed"], 3);
    assert_eq!(code(&run(&["estimate", path(&t), "--guess", "1", "-N", "0"])), 2);
}

#[test]
fn external_solver_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let t = encode(dir.path(), "toyhash6to3", &[]);
    let inst = dir.path().join("i.cnf");
    assert_eq!(code(&run(&["instantiate", path(&t), "--output", "110", "-o", path(&inst)])), 0);
    let emb = run(&["solve", path(&inst)]);
    let ext = bin()
        .args(["solve", path(&inst), "--external"])
        .env("T_ENCODER_SOLVER", fixture_solver())
        .output()
        .unwrap();
    assert_eq!(code(&ext), code(&emb), "{}", stderr(&ext));
    assert_eq!(code(&run(&["solve", path(&inst), "--external"])), 2);
    let explicit = run(&["solve", path(&inst), "--external", &fixture_solver()]);
    assert_eq!(code(&explicit), code(&emb));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut texts = BTreeMap::new();
    for round in 0..2 {
        let t = encode(dir.path(), "geffe_small", &[]);
        let enc = fs::read(&t).unwrap();
        let fam = run(&["instantiate", path(&t), "--output", &"1".repeat(40), "--guess", "1-4", "--sample", "5", "--seed", "8"]);
        let est = run(&["estimate", path(&t), "--guess", "1-8", "-N", "20", "--seed", "8"]);
        texts.insert(round, (enc, fam.stdout, est.stdout));
    }
    assert_eq!(texts[&0], texts[&1]);
}

#[test]
fn corpus_command() {
    let o = run(&["corpus"]);
    assert!(stdout(&o).lines().any(|l| l == "bivium"));
    let o = run(&["corpus", "adder4"]);
    assert_eq!(stdout(&o), fs::read_to_string(program("adder4")).unwrap());
    assert_eq!(code(&run(&["corpus", "nope"])), 2);
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["corpus", "--out", path(dir.path())])), 0);
    assert!(dir.path().join("grain_v1.alg").exists());
}
