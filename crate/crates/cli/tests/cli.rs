use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_codedcast"));
    c.env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &[&str] = &["--m", "21", "--lambda", "4.5"];

#[test]
fn simulate_extremes() {
    let none = json(&ok(&[&["simulate", "--n", "7", "--k", "3", "--p", "0"], SMALL].concat()));
    assert_eq!(none["total_transmissions"], 7);
    assert_eq!(none["successful_receivers"].as_u64().unwrap(), 1 + none["source_degree"].as_u64().unwrap());

    let all = json(&ok(&[&["simulate", "--n", "4", "--k", "4", "--p", "1"], SMALL].concat()));
    assert_eq!(all["successful_receivers"], all["source_component_size"]);
    assert_eq!(all["per_packet"].as_array().unwrap().len(), 4);
    assert_eq!(all["seed"]["packet_streams"], serde_json::json!([1, 4]));
}

#[test]
fn simulate_writes_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    let out = json(&ok(&[&["simulate", "--p", "0.5", "--graph-out", path(&g)], SMALL].concat()));
    let text = std::fs::read_to_string(&g).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# n={} m=21 lambda=4.5", out["point_count"]));
    for l in lines {
        let (a, b) = l.split_once(' ').unwrap();
        assert!(a.parse::<u32>().unwrap() < b.parse::<u32>().unwrap());
    }
}

#[test]
fn theta_table_and_mean_field_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("t.csv");
    let grid = ["--lambda-min", "1", "--lambda-max", "5", "--lambda-step", "0.5", "--trials", "3", "--m", "31"];
    ok(&[&["theta", "--preset", "fast", "--out", path(&table)], &grid[..]].concat());
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("# m=31 trials=3 seed=1 smoothed=true\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 9);

    let sweep = ok(&["sweep", "--method", "mean-field", "--theta-table", path(&table), "--n", "20..22"]);
    let csv = String::from_utf8(sweep.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "n,p_min,success_at_p,tau,tau_per_node,method");
    assert_eq!(rows.len(), 4);
    assert!(rows[1..].iter().all(|r| r.ends_with(",mean_field")));
    assert!(csv.contains("# theta_table="));
}

#[test]
fn unreachable_rows_are_nan() {
    let out = ok(&["sweep", "--lambda", "1.6", "--m", "21", "--k", "1", "--n", "1..2", "--graph-trials", "2", "--fwd-trials", "2"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows, vec!["1,NaN,NaN,NaN,NaN,simulated", "2,NaN,NaN,NaN,NaN,simulated"]);
}

#[test]
fn diagnostics_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("half.csv");
    std::fs::write(&table, "# m=1 trials=2 seed=0 smoothed=false\nlambda,theta_hat,std_err\n1,0.5,0.001\n5,0.5,0.001\n").unwrap();
    let base = ["diagnostics", "--theta-table", path(&table), "--trials", "4", "--m", "41"];
    let good = ok(&[&base[..], &["--p", "0.2"]].concat());
    let report = json(&good);
    assert_eq!(report["regime"], "subcritical");
    let rows = report["rows"].as_array().unwrap();
    assert!(rows.iter().filter(|r| r["name"].as_str().unwrap().contains("giant")).all(|r| r["applicable"] == false && r["z"].is_null()));

    let bad = run(&[&base[..], &["--p", "0.6"]].concat());
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["pass"], false);
}

#[test]
fn failed_write_leaves_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.json");
    let out = run(&[&["simulate", "--out", path(&target)], SMALL].concat());
    assert!(!out.status.success());
    assert!(!target.exists());
    let bad = run(&["sweep", "--k", "30", "--n", "20"]);
    assert!(!bad.status.success());
    let bad = run(&["sweep", "--theta-table", "/nonexistent/t.csv"]);
    assert!(!bad.status.success());
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# experiment\npreset=fast\nk=3\nn=4..6\ntrials=9\n").unwrap();
    let printed = String::from_utf8(ok(&["sweep", "--config", path(&cfg), "--k", "2", "--print-config"]).stdout).unwrap();
    assert!(printed.contains("k=2\n"));
    assert!(printed.contains("n=4..6\n"));
    assert!(printed.contains("trials=9\n"));
    assert!(printed.contains("theta_m=101\n"));
    // the printed form is itself a valid config that resolves to the same thing
    let again = dir.path().join("again.cfg");
    std::fs::write(&again, &printed).unwrap();
    let reprinted = String::from_utf8(ok(&["sweep", "--config", path(&again), "--print-config"]).stdout).unwrap();
    assert_eq!(printed, reprinted);
}

#[test]
fn worker_count_does_not_change_output() {
    let args = ["sweep", "--m", "31", "--k", "3", "--n", "3..5", "--graph-trials", "3", "--fwd-trials", "3", "--seed", "5"];
    let one = ok(&[&args[..], &["--workers", "1"]].concat()).stdout;
    let four = ok(&[&args[..], &["--workers", "4"]].concat()).stdout;
    assert_eq!(one, four);
    let again = ok(&[&args[..], &["--workers", "1"]].concat()).stdout;
    assert_eq!(one, again);
}
