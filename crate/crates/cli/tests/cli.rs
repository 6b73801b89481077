use std::path::Path;
use std::process::{Command, Output};

fn ftqem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ftqem"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn parse_reports_census() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "c.txt",
        "qubits 2\nclbits 1\nh 0\ncx 0 1\nmeasure 1 -> 0\n",
    );
    let o = ftqem(&["parse", &f]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["qubits"], 2);
    assert_eq!(v["t"], 1);
    assert_eq!(v["h"], 1);
    assert_eq!(v["c"], 4);

    let bad = write(dir.path(), "bad.txt", "qubits 1\ncx 0 0\n");
    let o = ftqem(&["parse", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(
        ftqem(&["parse", "/nonexistent/file"]).status.code(),
        Some(2)
    );
}

#[test]
fn encode_prints_physical_circuit_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "c.txt", "qubits 2\ncx 0 1\n");
    let side = dir.path().join("layout.json");
    let o = ftqem(&[
        "encode",
        &f,
        "--code",
        "rep:2",
        "--hmode",
        "ft",
        "--sidecar",
        side.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "qubits 4\ncx 0 1\ncx 2 3\n");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&side).unwrap()).unwrap();
    assert_eq!(v["layout"]["0"], serde_json::json!([0, 2]));
    assert_eq!(v["layout"]["1"], serde_json::json!([1, 3]));

    let o = ftqem(&["encode", &f, "--code", "rep:2", "--blocked"]);
    assert_eq!(stdout(&o), "qubits 4\ncx 0 2\ncx 1 3\n");

    // Steane has no non-FT Hadamard; bad code strings are rejected by clap.
    let h = write(dir.path(), "h.txt", "qubits 1\nh 0\n");
    assert_eq!(
        ftqem(&["encode", &h, "--code", "steane", "--hmode", "nonft"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ftqem(&["encode", &h, "--code", "rep:0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ftqem(&["encode", &h, "--code", "steane", "--hmode", "ft"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn run_emits_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bell.txt", "qubits 2\nh 0\ncx 0 1\n");
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"circuit": {"path": "bell.txt"}, "hmode": "ft", "sweep": [1, 2],
            "noise": {"p1": 0.001, "p2": 0.01}, "backend": "tableau_mc", "shots": 2000, "seed": 5}"#,
    );
    let o = ftqem(&["run", &cfg]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "d,strategy,policy,backend,shots,accepted,post_rate,sso,seed,wall_ms"
    );
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,DM,postselect,tableau_mc,2000,2000,1.0,"));

    let out = dir.path().join("out.json");
    let o = ftqem(&[
        "run",
        &cfg,
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert_eq!(v[1]["d"], 2);
}

#[test]
fn config_and_simulation_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = write(dir.path(), "a.json", "{ not json");
    assert_eq!(ftqem(&["run", &bad_json]).status.code(), Some(2));
    let bad_field = write(
        dir.path(),
        "b.json",
        r#"{"circuit": {"inline": "qubits 1"}, "shots": -1}"#,
    );
    assert_eq!(ftqem(&["run", &bad_field]).status.code(), Some(2));
    let bad_noise = write(
        dir.path(),
        "c.json",
        r#"{"circuit": {"inline": "qubits 1"}, "noise": {"p1": 3}}"#,
    );
    assert_eq!(ftqem(&["run", &bad_noise]).status.code(), Some(2));
    // Too many qubits for a noisy exact run.
    let big = write(
        dir.path(),
        "d.json",
        r#"{"circuit": {"inline": "qubits 5\nx 0"}, "code": "rep:3", "noise": {"p1": 0.01}}"#,
    );
    assert_eq!(ftqem(&["run", &big]).status.code(), Some(3));
    assert_eq!(ftqem(&["repro", "fig9"]).status.code(), Some(2));
}

#[test]
fn repro_with_overrides() {
    let o = ftqem(&["repro", "fig7b"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 6);
    let o = ftqem(&["repro", "hdw11", "--shots", "300", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 31);
    assert!(text
        .lines()
        .skip(1)
        .all(|l| l.contains(",300,") && l.contains(",2,")));
}

#[test]
fn bounds_output() {
    let o = ftqem(&[
        "bounds",
        "--d",
        "3",
        "--t",
        "35",
        "--h",
        "0",
        "--p",
        "0.01",
        "--epsilon",
        "1e-3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["c"], 35);
    assert_eq!(v["below_threshold"], true);
    assert!(v["min_d"].as_u64().unwrap() % 2 == 1);

    let o = ftqem(&[
        "bounds", "--d", "1", "--t", "1", "--h", "0", "--p", "0.1", "--format", "csv",
    ]);
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    let pl: f64 = row[4].parse().unwrap();
    assert!((pl - 0.1).abs() < 1e-12);

    assert_eq!(
        ftqem(&["bounds", "--d", "0", "--t", "1", "--h", "0", "--p", "0.1"])
            .status
            .code(),
        Some(2)
    );
    let o = ftqem(&[
        "bounds",
        "--d",
        "3",
        "--t",
        "37",
        "--h",
        "0",
        "--p",
        "0.01",
        "--epsilon",
        "1e-3",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(ftqem(&["bounds", "--d", "3"]).status.code(), Some(2));
}
