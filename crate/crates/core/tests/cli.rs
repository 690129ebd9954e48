use std::process::{Command, Output};

use serde_json::Value;

fn cmising(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cmising"))
        .args(args)
        .env_remove("CMISING_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

// experiment reports are top-level documents carrying their own config
fn strip_runtime(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("runtime_seconds");
    v
}

#[test]
fn exact_emits_versioned_json() {
    let v = stdout_json(&cmising(&[
        "exact", "--model", "cm2", "--N", "1000", "--beta", "0.5", "--B", "0.2", "--seed", "7",
    ]));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "exact");
    assert_eq!(v["config"]["seed"], 7);
    for key in ["logZ", "meanS", "varS", "chiN"] {
        assert!(v["result"][key].is_f64(), "missing {key}");
    }
    let chi = v["result"]["chiN"].as_f64().unwrap();
    assert!((chi - 1.8717).abs() < 1e-3);
}

#[test]
fn variance_table_rows() {
    let out = cmising(&[
        "variance-table",
        "--p",
        "0.5",
        "--beta",
        "0.5",
        "--B",
        "0.2",
        "--T",
        "60",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| {
        row[header.iter().position(|h| *h == name).unwrap()]
            .parse::<f64>()
            .unwrap()
    };
    assert_eq!(col("T"), 60.0);
    assert!((col("chi") - 1.615927112618228).abs() < 1e-12);
    assert!((col("sigma_G2") - 8.690761360370765e-5).abs() < 1e-14);
    assert!((col("sigma_aq2") - col("chi") - col("sigma_G2")).abs() < 1e-14);
}

#[test]
fn graph_file_round_trip_is_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let path = path.to_str().unwrap();
    let model = ["--model", "cm12", "--p", "0.5", "--N", "500", "--seed", "7"];
    let gen: Vec<&str> = ["generate"]
        .iter()
        .chain(&model)
        .copied()
        .chain(["--out", path])
        .collect();
    assert!(cmising(&gen).status.success());
    let from_file = stdout_json(&cmising(&[
        "exact", "--graph", path, "--beta", "0.7", "--B", "-0.3",
    ]));
    let args: Vec<&str> = ["exact"]
        .iter()
        .chain(&model)
        .copied()
        .chain(["--beta", "0.7", "--B", "-0.3"])
        .collect();
    let in_memory = stdout_json(&cmising(&args));
    assert_eq!(from_file["result"], in_memory["result"]);
}

#[test]
fn seed_determines_output_and_threads_do_not() {
    let base = [
        "clt", "--mode", "aq", "--model", "cm12", "--p", "0.5", "--N", "1000", "--R", "8", "--M",
        "20", "--seed", "3",
    ];
    let run = |extra: &[&str]| {
        let args: Vec<&str> = base.iter().chain(extra).copied().collect();
        let out = cmising(&args);
        strip_runtime(serde_json::from_slice(&out.stdout).unwrap())
    };
    let a = run(&["--threads", "1"]);
    assert_eq!(a, run(&["--threads", "2"]));
    assert_eq!(a, run(&[]));
    let mut other: Vec<&str> = base.to_vec();
    *other.last_mut().unwrap() = "4";
    let b = strip_runtime(serde_json::from_slice(&cmising(&other).stdout).unwrap());
    assert_eq!(a["experiment"], "aq_clt");
    assert_ne!(a["quantities"], b["quantities"]);
}

#[test]
fn csv_output_carries_config_line() {
    let out = cmising(&["exact", "--N", "50", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let first = text.lines().next().unwrap();
    let cfg: Value = serde_json::from_str(first.strip_prefix("# config: ").unwrap()).unwrap();
    assert_eq!(cfg["command"], "exact");
}

#[test]
fn exit_codes() {
    assert_eq!(cmising(&["exact", "--beta", "-1"]).status.code(), Some(1));
    assert_eq!(cmising(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(
        cmising(&[
            "clt",
            "--mode",
            "rq",
            "--N",
            "1000",
            "--M",
            "200",
            "--tolerance",
            "1e-9"
        ])
        .status
        .code(),
        Some(2)
    );
    let out = cmising(&["exact", "--out", "/nonexistent/dir/x.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot write output file"));
}

#[test]
fn failing_report_still_prints_verdicts() {
    let out = cmising(&[
        "clt",
        "--mode",
        "rq",
        "--N",
        "1000",
        "--M",
        "200",
        "--tolerance",
        "1e-9",
    ]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL"));
}
