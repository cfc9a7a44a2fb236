use std::path::PathBuf;
use std::process::{Command, Output};

const HOMOGENEOUS: &str = "phi1 = 0 1
phi2 = 0 0 1
domain = -1,1
theta1 = 0
theta2 = 0
weights = 1/2,1/2
R = 32
center = 1/10
q_max = 17
rules = measure,dangerous-window
frontier = diverse:64
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_badcantor"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("badcantor-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(cmd: &mut Command) -> (i32, String, String) {
    let Output { status, stdout, stderr } = cmd.output().unwrap();
    (status.code().unwrap_or(-1), String::from_utf8_lossy(&stdout).into(), String::from_utf8_lossy(&stderr).into())
}

fn construct_homogeneous(tag: &str) -> PathBuf {
    let cfg = scratch(&format!("{tag}.cfg"));
    std::fs::write(&cfg, HOMOGENEOUS).unwrap();
    let cert = scratch(&format!("{tag}.cert"));
    let (code, out, err) = run(bin().args(["construct", "-c"]).arg(&cfg).arg("-o").arg(&cert));
    assert_eq!(code, 0, "stdout {out} stderr {err}");
    assert!(out.contains("alive=64"), "{out}");
    cert
}

#[test]
fn oracle_on_a_rational_point_is_zero() {
    let (code, out, err) = run(bin().args([
        "oracle",
        "--set",
        "phi1=0 1",
        "--set",
        "domain=-1,1",
        "--set",
        "theta1=0",
        "--set",
        "weights=1",
        "--set",
        "oracle_x=2/3",
        "--set",
        "oracle_Q=50",
    ]));
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("argmin_m\t3"), "{out}");
    assert!(out.contains("estimate\t0.0"), "{out}");
}

#[test]
fn unknown_config_key_exits_2() {
    let cfg = scratch("bad.cfg");
    std::fs::write(&cfg, "phi1 = 0 1\nbogus = 3\n").unwrap();
    let (code, _, err) = run(bin().args(["construct", "-c"]).arg(&cfg));
    assert_eq!(code, 2);
    assert!(err.contains("bogus"), "{err}");
}

#[test]
fn unknown_strategy_lists_alternatives() {
    let cfg = scratch("strategy.cfg");
    std::fs::write(&cfg, HOMOGENEOUS.replace("diverse:64", "widest")).unwrap();
    let (code, _, err) = run(bin().args(["construct", "-c"]).arg(&cfg));
    assert_eq!(code, 2);
    assert!(err.contains("beam") && err.contains("diverse"), "{err}");
}

#[test]
fn construct_verify_and_tamper() {
    let a = construct_homogeneous("a");
    let b = construct_homogeneous("b");
    let body = std::fs::read_to_string(&a).unwrap();
    assert_eq!(body, std::fs::read_to_string(&b).unwrap(), "certificates differ between runs");

    let report = scratch("a.report");
    let (code, out, err) = run(bin().arg("verify").arg(&a).arg("-o").arg(&report));
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("pass: "), "{out}");
    assert!(std::fs::read_to_string(&report).unwrap().contains("verdict=pass"));

    // Move the point onto 1/12 and widen the last chain interval to hold it;
    // both coordinates are then integers times 1/144, so the quality vanishes
    // at m = 144.
    let mut lines: Vec<String> = body.lines().map(String::from).collect();
    let point = lines.iter().position(|l| l.starts_with("x=")).unwrap();
    lines[point] = "x=1/12".into();
    let last_chain = lines[..point].iter().rposition(|l| l.contains(',') && !l.contains('=')).unwrap();
    lines[last_chain] = "1/12,7/60".into();
    let tampered = scratch("tampered.cert");
    std::fs::write(&tampered, lines.join("\n") + "\n").unwrap();
    let (code, _, err) = run(bin().arg("verify").arg(&tampered));
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("failure_m144"), "{err}");

    // A point outside the chain is malformed, not a quality failure.
    lines[last_chain] = "1/11,7/60".into();
    std::fs::write(&tampered, lines.join("\n") + "\n").unwrap();
    let (code, _, err) = run(bin().arg("verify").arg(&tampered));
    assert_eq!(code, 2, "{err}");
}

#[test]
fn transfer_test_finds_every_dual() {
    let (code, out, err) = run(bin().args(["transfer-test", "--set", "transfer_count=60"]));
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("systems=60") && out.contains("missing=0"), "{out}");
}

#[test]
fn lattice_probe_writes_a_table() {
    let (code, out, err) = run(bin().args([
        "lattice-probe",
        "--set",
        "phi1=0 1",
        "--set",
        "phi2=0 0 1",
        "--set",
        "domain=-1,1",
        "--set",
        "R=32",
        "--set",
        "weights=1/2,1/2",
        "--set",
        "probe_x=0",
        "--set",
        "probe_q_max=3",
    ]));
    assert_eq!(code, 0, "{err}");
    let mut rows = out.lines();
    assert_eq!(rows.next(), Some("q\tl\tx\tshortest_norm\tescapes"));
    assert!(rows.count() >= 4, "{out}");
}
