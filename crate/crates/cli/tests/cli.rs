use std::process::{Command, Output};

use serde_json::Value;

fn bht(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bht"))
        .args(args)
        .env_remove("BHT_THREADS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = bht(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn norm_of_two_terms() {
    let v = json(&[
        "norm",
        "--poly",
        "1:1,2:1",
        "--p",
        "4",
        "--method",
        "exact",
        "--reproducible",
    ]);
    let value = v["result"]["value"].as_f64().unwrap();
    assert!((value - 6f64.powf(0.25)).abs() < 1e-14);
    assert_eq!(v["result"]["error_bound"]["kind"], "rigorous");
}

#[test]
fn lift_of_six() {
    let v = json(&["lift", "--poly", "6:5", "--reproducible"]);
    assert_eq!(
        v["result"],
        serde_json::json!([{ "beta": [1, 1], "re": 5.0, "im": 0.0 }])
    );
    assert_eq!(v["config"]["run"]["command"], "lift");
    assert!(v["config"].get("timestamp").is_none());
}

#[test]
fn carlson_on_single_term() {
    let out = bht(&[
        "carlson",
        "--poly",
        "3:2",
        "--sigma",
        "1",
        "--T",
        "100",
        "--format",
        "csv",
        "--reproducible",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config: {"));
    assert_eq!(
        lines.next().unwrap(),
        "T,sigma,p,value,target,error_kind,error_bound,flag"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!((row[4].parse::<f64>().unwrap() - 4.0 / 9.0).abs() < 1e-15);
    assert_eq!(row[5], "rigorous");
    assert_eq!(row[7], "true");
}

#[test]
fn polynomial_from_file_and_output_path() {
    let dir = std::env::temp_dir().join(format!("bht-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let input = dir.join("f.json");
    std::fs::write(
        &input,
        r#"[{"n": 1, "re": 1.0, "im": 0.0}, {"n": 2, "re": 1.0, "im": 0.0}]"#,
    )
    .unwrap();
    let output = dir.join("out.json");
    let out = bht(&[
        "norm",
        "--input",
        input.to_str().unwrap(),
        "--p",
        "2",
        "--reproducible",
        "-o",
        output.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert!((v["result"]["value"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bht(args).status.code().unwrap();
    assert_eq!(code(&["norm", "--poly", "1:1", "--p", "3", "--method", "exact"]), 2);
    assert_eq!(code(&["lift", "--poly", "104743:1"]), 3);
    assert_eq!(code(&["norm", "--bogus"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["weyl", "--threads", "0"]), 1);
    assert_eq!(code(&["norm", "--input", "/nonexistent/f.json", "--p", "2"]), 1);
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["lift", "--poly", "0:1"]), 2);
}

#[test]
fn thread_count_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_bht"))
        .args(["weyl", "--d", "1", "--T", "10", "--samples", "1000", "--reproducible"])
        .env("BHT_THREADS", "3")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["threads"], 3);
}

#[test]
fn repeated_runs_are_identical() {
    for args in [
        [
            "norm",
            "--poly",
            "1:1,2:0.5,3:-1",
            "--p",
            "3",
            "--method",
            "mc",
            "--samples",
            "100000",
            "--seed",
            "5",
        ]
        .as_slice(),
        &[
            "embed",
            "--search",
            "--n",
            "8",
            "--restarts",
            "2",
            "--steps",
            "5",
            "--seed",
            "1",
        ],
        &[
            "adjoint",
            "--poly",
            "1:1,4:2",
            "--samples",
            "513",
            "--n",
            "8",
            "--seed",
            "2",
            "--format",
            "csv",
        ],
    ] {
        let run = |threads: &str| {
            let mut all = args.to_vec();
            all.extend(["--reproducible", "--threads", threads]);
            bht(&all).stdout
        };
        let one = run("1");
        assert_eq!(one, run("1"));
        let many = run("4");
        assert_eq!(many, run("4"));
        let strip = |b: &[u8]| {
            String::from_utf8(b.to_vec())
                .unwrap()
                .replace("\"threads\":4", "\"threads\":1")
                .replace("\"threads\": 4", "\"threads\": 1")
        };
        assert_eq!(strip(&one), strip(&many), "{args:?}");
    }
}
