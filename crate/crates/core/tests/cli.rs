use std::io::Write;
use std::process::{Command, Output, Stdio};

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_quatforms"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const OMEGA_N1: &str = r#"{"n": 1, "terms": [{"gens": ["z1", "z2"], "re": "1"}]}"#;
const INDEFINITE_N2: &str = r#"{"n": 2, "terms": [{"gens": ["z1", "z2"], "re": "1"}, {"gens": ["z3", "z4"], "re": "-1"}]}"#;
const OMEGA_SQUARED_N3: &str = r#"{"n": 3, "terms": [
  {"gens": ["z1", "z2", "z3", "z4"], "re": "2"},
  {"gens": ["z1", "z2", "z5", "z6"], "re": "2"},
  {"gens": ["z3", "z4", "z5", "z6"], "re": "2"}]}"#;

#[test]
fn decompose_reports_weight_and_bidegree() {
    let o = run(&["decompose"], OMEGA_N1);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("# quatforms ") && out.contains("mode=exact") && out.contains("config="), "{out}");
    assert!(out.contains("weight 2, bidegree (2,0)"), "{out}");

    let o = run(&["decompose"], r#"{"n": 1, "terms": [{"gens": ["z1", "zb1"], "re": "1"}]}"#);
    assert_eq!(stdout(&o).matches("weight").count(), 2);
}

#[test]
fn malformed_input_exits_with_input_error() {
    let o = run(&["decompose"], "{\"n\": 1,\n \"terms\": [{\"gens\": [\"q9\"]}]}");
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 1, column 1"), "{err}");
}

#[test]
fn positivity_verdicts_and_exit_codes() {
    let o = run(&["positivity", "--weak"], OMEGA_N1);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("PositiveCertified"));

    let o = run(&["positivity", "--weak"], INDEFINITE_N2);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("NegativeCertified") && out.contains("witness x1"), "{out}");

    let o = run(&["--mode", "float", "--seed", "7", "--samples", "512", "positivity", "--weak"], OMEGA_SQUARED_N3);
    let out = stdout(&o);
    assert!(out.contains("Unknown") && out.contains("seed 7") && out.contains("search samples 512"), "{out}");
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["positivity", "--omega-q", "1"], OMEGA_N1);
    assert_eq!(o.status.code(), Some(2), "flag needs a (1,1)-form");
    let o = run(&["positivity", "--weak", "--strong"], OMEGA_N1);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn constants_tables() {
    let o = run(&["constants", "--n", "1"], "");
    assert!(stdout(&o).contains("gamma,1\n"));
    let o = run(&["constants", "--n", "2"], "");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("lambda_two_path,OK"));
    let o = run(&["constants", "--n", "10"], "");
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside 1..=3"));
}

#[test]
fn verify_named_suites() {
    for suite in ["intertwining", "lambda-two-path"] {
        let o = run(&["verify", suite, "--seed", "1", "--trials", "10"], "");
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        assert!(stdout(&o).contains(&format!("PASS {suite}")));
    }
    assert_eq!(run(&["verify", "no-such-suite", "--seed", "1"], "").status.code(), Some(2));
    assert_eq!(run(&["verify", "intertwining"], "").status.code(), Some(2), "seed is mandatory");
    let o = run(&["verify", "--list"], "");
    assert!(stdout(&o).lines().count() > 30);
}

#[test]
fn experiments_are_reproducible() {
    let dir = std::env::temp_dir().join(format!("quatforms-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    for path in [&a, &b] {
        let o = run(
            &["experiment", "sibony", "--seed", "3", "--levels", "5", "--samples", "2000", "--out", path.to_str().unwrap()],
            "",
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ra, rb) = (std::fs::read_to_string(&a).unwrap(), std::fs::read_to_string(&b).unwrap());
    assert_eq!(ra, rb);
    assert!(ra.contains("mode=float seed=3") && ra.contains("verdict,Consistent"), "{ra}");
    std::fs::remove_dir_all(&dir).unwrap();

    let o = run(&["--mode", "exact", "--seed", "3", "experiment", "sibony"], "");
    assert_eq!(o.status.code(), Some(2));
}
