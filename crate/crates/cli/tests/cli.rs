use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn cpsh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpsh"))
        .args(args)
        .output()
        .expect("cpsh runs")
}

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn program_file(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn run_prefix_first_on_every_backend() {
    for b in ["cps", "env", "subst", "redsem"] {
        let o = cpsh(&["run", &corpus("prefix_first.cps"), "--backend", b]);
        assert_eq!(o.status.code(), Some(0), "{b}: {}", stderr(&o));
        assert_eq!(stdout(&o).trim(), "[0, 3]");
        assert!(stderr(&o).contains(&format!("backend={b}")));
    }
}

#[test]
fn run_prefix_all() {
    let o = cpsh(&["run", &corpus("prefix_all.cps")]);
    assert_eq!(stdout(&o).trim(), "[[0, 3], [0, 3, 1, 4], [0, 3, 1, 4, 2, 5]]");
}

#[test]
fn static_and_dynamic_traversal() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.txt");
    let o = cpsh(&["run", &corpus("traverse.cps"), "--backend", "subst"]);
    assert_eq!(stdout(&o).trim(), "[1, 2]");
    let o = cpsh(&[
        "run",
        &corpus("traverse.cps"),
        "--backend",
        "subst",
        "--dynamic",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "[2, 1]");
    let lines = fs::read_to_string(&trace).unwrap();
    assert!(lines.lines().next().unwrap().starts_with("0: eval |"));
    assert!(lines.contains("CONS(1), CONS(2)"));
}

#[test]
fn dynamic_needs_the_substitution_machine() {
    let o = cpsh(&["run", &corpus("traverse.cps"), "--backend", "env", "--dynamic"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn trace_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.txt");
    let o = cpsh(&["run", &corpus("reset2_demo.cps"), "--trace", trace.to_str().unwrap()]);
    assert_eq!(stdout(&o).trim(), "14");
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.lines().count() > 30);
    let lines: Vec<&str> = text.lines().collect();
    let (last, rest) = lines.split_last().unwrap();
    assert_eq!(*last, format!("{}: final [ 14 ]", rest.len()));
    assert!(rest.iter().all(|l| l.contains(" | ")), "{text}");
}

#[test]
fn exit_codes() {
    let o = cpsh(&["run", &corpus("loop.cps"), "--fuel", "100"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cpsh(&["run", &corpus("stuck.cps")]);
    assert_eq!(o.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = program_file(&dir, "bad.cps", "(reset 1 (succ 0)");
    let o = cpsh(&["run", &bad]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("syntax error"));
    let o = cpsh(&["run", "/nonexistent/file.cps"]);
    assert_eq!(o.status.code(), Some(3));
    let o = cpsh(&["run", &corpus("stuck.cps"), "--backend", "nope"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn free_variables_and_levels_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let open = program_file(&dir, "open.cps", "(succ x)");
    assert_eq!(cpsh(&["run", &open]).status.code(), Some(3));
    let deep = program_file(&dir, "deep.cps", "(reset 3 1)");
    assert_eq!(cpsh(&["run", &deep, "--level", "2"]).status.code(), Some(3));
    assert_eq!(cpsh(&["run", &deep, "--level", "3"]).status.code(), Some(0));
}

#[test]
fn compare_agrees_and_catches_a_fault() {
    let o = cpsh(&["compare", &corpus("shift2_demo.cps")]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let dir = tempfile::tempdir().unwrap();
    let p = program_file(&dir, "succ.cps", "(add 1 (succ 0))");
    let o = cpsh(&["compare", &p, "--inject-fault"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("first divergence"), "{}", stdout(&o));
}

#[test]
fn step_prints_the_reduction_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let p = program_file(&dir, "s.cps", "(succ (succ 0))");
    let o = cpsh(&["step", &p]);
    assert_eq!(stdout(&o), "(succ (succ 0))\n(succ 1)\nvalue: 2\n");
    let p = program_file(&dir, "r.cps", "(reset 1 5)");
    let o = cpsh(&["step", &p]);
    assert_eq!(stdout(&o), "(reset 1 5)\nvalue: 5\n");
}

#[test]
fn nbe_normalizes() {
    let o = cpsh(&["nbe", "--expr", "(prod 1 x (prod 2 y z))"]);
    assert_eq!(
        stdout(&o).trim(),
        "(prod 2 (prod 1 x (prod 1 y (unit 1))) (prod 2 (prod 1 x (prod 1 z (unit 1))) (unit 2)))"
    );
    let o = cpsh(&["nbe", "--n", "1", "--expr", "(prod 1 (prod 1 x (unit 1)) y)"]);
    assert_eq!(stdout(&o).trim(), "(prod 1 x (prod 1 y (unit 1)))");
}

#[test]
fn arith_modes() {
    for mode in ["eval", "cps", "step"] {
        let o = cpsh(&["arith", mode, "--expr", "(+ (+ 1 2) 3)"]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).lines().last(), Some("6"), "{mode}");
    }
    let o = cpsh(&["arith", "machine", "--expr", "(+ 1 2)"]);
    assert_eq!(stdout(&o).trim(), "3");
    assert!(stderr(&o).contains("transitions=6"));
}

#[test]
fn gen_output_parses_back() {
    let o = cpsh(&["gen", "--seed", "5", "--count", "5", "--level", "2"]);
    let dir = tempfile::tempdir().unwrap();
    for (i, line) in stdout(&o).lines().enumerate() {
        let p = program_file(&dir, &format!("g{i}.cps"), line);
        let c = cpsh(&["compare", &p, "--level", "2"]);
        assert_eq!(c.status.code(), Some(0), "{line}: {}", stdout(&c));
    }
}

#[test]
fn test_corpus_passes() {
    let dir = corpus("");
    let o = cpsh(&["test-corpus", &dir, "--count", "10"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn level_defaults_to_the_header() {
    let o = cpsh(&["run", &corpus("shift2_demo.cps")]);
    assert_eq!(stdout(&o).trim(), "[11, 21, 12, 22]");
    assert!(stderr(&o).contains("level=2"), "{}", stderr(&o));
    let o = cpsh(&["run", &corpus("shift2_demo.cps"), "--level", "4"]);
    assert!(stderr(&o).contains("level=4"));
}
