use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn infocost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infocost")).args(args).output().expect("spawn infocost")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn run_writes_schema_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tq");
    let o = infocost(&["run", "two_qubit_charges", "--out", out.to_str().unwrap(), "--grid-points", "101"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,lhs,U_M,margin,dS,D,lnZr,lambda0,lambda1");
    assert_eq!(csv.lines().count(), 102);
    let r = report(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["artifacts"], serde_json::json!(["series.csv", "report.json"]));
}

#[test]
fn invalid_parameter_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = infocost(&["run", "erasure", "--set", "tau=-1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("series.csv").exists());
    assert_eq!(infocost(&["run", "nope"]).status.code(), Some(1));
    assert_eq!(infocost(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(infocost(&["--help"]).status.code(), Some(0));
}

#[test]
fn quasistatic_gap_in_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = infocost(&["run", "quasistatic", "--set", "n_steps=10000", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let gap = report(dir.path())["summary"]["gap"].as_f64().unwrap();
    assert!(gap.abs() <= 5e-4, "{gap}");
    let o = infocost(&["run", "quasistatic", "--grid-points", "10", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = infocost(&["run", "erasure", "--grid-points", "201", "--plot", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["series.csv", "report.json", "plot.svg"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_file_with_unknown_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, r#"{"scenario": "erasure", "params": {"tau": 10, "gamma3": 1}}"#).unwrap();
    let o = infocost(&["run", "--config", path.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gamma3"));
}

#[test]
fn degraded_erasure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = infocost(&["run", "erasure", "--set", "eps_tau=0.05", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let r = report(dir.path());
    assert_eq!(r["passed"], false);
    assert!(r["flags"].as_array().unwrap().iter().any(|f| f == "lambda_clamp"));
}

#[test]
fn verify_selects_suites() {
    assert_eq!(infocost(&["verify", "bogus"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("v.json");
    let o = infocost(&["verify", "erasure", "--json", json.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("2/2 criteria passed"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    let ids: Vec<u64> = v.as_array().unwrap().iter().map(|r| r["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![3, 9]);
}

#[test]
fn verify_all_runs_nine_criteria() {
    let o = infocost(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("9/9 criteria passed"));
}

#[test]
fn list_names_every_scenario() {
    let s = stdout(&infocost(&["list"]));
    for id in ["two_qubit_charges", "quasistatic", "erasure", "dqd", "reset"] {
        assert!(s.contains(id));
    }
}

#[test]
fn plot_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("e");
    let o = infocost(&["run", "erasure", "--grid-points", "101", "--out", run_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let series = run_dir.join("series.csv");
    let svg = dir.path().join("p.svg");
    let o = infocost(&[
        "plot",
        series.to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
        "--panel",
        "margin",
        "--title",
        "margin only",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    assert!(text.contains("margin only"));

    let o = infocost(&["plot", series.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--panel", "missing"]);
    assert_eq!(o.status.code(), Some(1));

    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "t,x\n").unwrap();
    let o = infocost(&["plot", empty.to_str().unwrap(), "--out", svg.to_str().unwrap(), "--panel", "x"]);
    assert_eq!(o.status.code(), Some(1));
}
