use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn netmech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netmech"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn repro_proposition_prints_trace_and_verdicts() {
    let o = netmech(&["repro", "proposition"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("u_a = 0"), "{text}");
    assert!(text.contains("a gets 11 for 4, u_a = 1"), "{text}");
    assert!(text.contains("check_ic MetaMSN o DNS: FAIL"), "{text}");
    assert!(text.contains("check_ic MetaMSN-m o DNS: PASS"), "{text}");
    assert!(text.contains("verdict: reproduced"));
}

#[test]
fn repro_los_example() {
    let o = netmech(&["repro", "los-example"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(
        text.contains("buyer 1: demands 110 for 10, gets 110, pays 8"),
        "{text}"
    );
    assert!(text.contains("SW = 13, RV = 8"));
}

#[test]
fn run_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("small.scn");
    fs::write(
        &scn,
        "network = er:80:0.05\nm = 3\nmechanism = los\nseed = 4\nrepeats = 3\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = netmech(&["run", scn.to_str().unwrap(), "-o", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert!(text.starts_with("run_id,seller,mechanism,m,sw,revenue,joined,winners,iterations,ms\n"));
}

#[test]
fn bundled_scenarios_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        netmech::bench::Scenario::from_file(&path)
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn errors_exit_nonzero_with_context() {
    let dir = tempfile::tempdir().unwrap();
    let scn = dir.path().join("bad.scn");
    fs::write(&scn, "network = er:10:0.5\nm = 0\nmechanism = los\n").unwrap();
    let out = dir.path().join("x.csv");
    let o = netmech(&["run", scn.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.scn") && err.contains("m = 0"), "{err}");
    assert!(!out.exists());

    let o = netmech(&["check", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_reports_pass_and_fail() {
    let o = netmech(&["check", "lp", "--seeds", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("PASS"));

    // MetaMSN over LOS has a known IC counterexample at seed 1
    let o = netmech(&["check", "ic", "--seeds", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("msn:los") && text.contains("FAIL"), "{text}");

    let o = netmech(&["check", "welfare", "--seeds", "4", "--json"]);
    assert!(o.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
}
