use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn mslh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mslh")).args(args).output().expect("run mslh")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn solve_reports_unsat_with_core() {
    let o = mslh(&["solve", fixture("intro.p").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("% SZS status Unsatisfiable for intro"), "{s}");
    assert!(s.contains("% SZS output start ConflictingCore"));
}

#[test]
fn solve_answers_queries_and_dumps_model() {
    let f = fixture("parity.p");
    let o = mslh(&["solve", f.to_str().unwrap(), "--query", "p(f(f(f(f(a)))))", "--query", "p(f(a))", "--dump-model", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("% SZS status Satisfiable"), "{s}");
    assert!(s.contains("% query p(f(f(f(f(a))))): true"), "{s}");
    assert!(s.contains("% query p(f(a)): false"), "{s}");
    assert!(s.contains("p(f(f(a)))"), "{s}");
}

#[test]
fn model_subcommand() {
    let o = mslh(&["model", fixture("parity.p").to_str().unwrap(), "--query", "p(a)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("% query p(a): true"));
}

#[test]
fn approximate_then_lift() {
    let dir = std::env::temp_dir().join(format!("mslh-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let trace = dir.join("trace.txt");
    let f = fixture("intro.p");
    let o = mslh(&["approximate", f.to_str().unwrap(), "--emit-trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("S_0(X2), s(X0) -> T(f_p(X0,X2))."), "{s}");
    assert!(!s.contains("% trace"));

    let core = dir.join("core.txt");
    std::fs::write(
        &core,
        "[1] -> s(a).\n[2] -> s(b).\n[7] T(f_p(a,g(b))) -> .\n\
         [10] S_0(g(b)), s(a) -> T(f_p(a,g(b))).\n[11] s(b) -> S_0(g(b)).\n",
    )
    .unwrap();
    let o = mslh(&["lift", f.to_str().unwrap(), "--trace", trace.to_str().unwrap(), "--core", core.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("% failed at step 3: linear"), "{}", stdout(&o));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn explain_log_and_dot_outputs() {
    let dir = std::env::temp_dir().join(format!("mslh-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (log, dot, trace) = (dir.join("log.txt"), dir.join("p.dot"), dir.join("t.txt"));
    let f = fixture("lift_horn.p");
    let o = mslh(&[
        "solve",
        f.to_str().unwrap(),
        "--explain",
        "--log",
        log.to_str().unwrap(),
        "--dot",
        dot.to_str().unwrap(),
        "--emit-trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!std::fs::read_to_string(&log).unwrap().is_empty());
    assert!(std::fs::read_to_string(&dot).unwrap().contains("digraph"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn iteration_budget_gives_unknown() {
    let o = mslh(&["solve", fixture("pigeon.p").to_str().unwrap(), "--max-iterations", "0"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("% SZS status Unknown"));
}

#[test]
fn bad_input_exits_2() {
    let bad = std::env::temp_dir().join(format!("mslh-bad-{}.p", std::process::id()));
    std::fs::write(&bad, "p(X -> .\n").unwrap();
    let o = mslh(&["solve", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":1:"));
    std::fs::remove_file(&bad).ok();
    assert_eq!(mslh(&["solve", "/nonexistent/x.p"]).status.code(), Some(2));
    assert_eq!(mslh(&["solve", "--sigma", "f", "x.p"]).status.code(), Some(2));
}
