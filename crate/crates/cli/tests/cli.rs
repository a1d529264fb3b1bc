use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncp-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let code = out.status.code().expect("exit code");
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));
    (code, v)
}

#[test]
fn identity_channel_passes() {
    let (code, v) = run_json(&[
        "check-channel",
        "--channel",
        &fixture("identity_channel.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["result"]["cp"], true);
    assert_eq!(v["result"]["unital"], true);
    assert!(v["tolerances"]["choi"].is_number());
}

#[test]
fn transpose_map_is_flagged() {
    let (code, v) = run_json(&[
        "check-channel",
        "--channel",
        &fixture("transpose_channel.json"),
    ]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["cp"], false);
    assert!((v["result"]["min_choi_eig"].as_f64().unwrap() + 0.5).abs() < 1e-12);
}

#[test]
fn simplex_pullback_matches_oracle() {
    let (code, v) = run_json(&[
        "pullback",
        "--model",
        "simplex:2",
        "--theta",
        "0.5,0.3333333333",
        "--kind",
        "gns",
    ]);
    assert_eq!(code, 0);
    assert!(v["result"]["deviation"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["result"]["metric"].as_array().unwrap().len(), 2);
}

#[test]
fn finite_difference_pullback() {
    let (code, v) = run_json(&[
        "pullback",
        "--model",
        "qubit",
        "--theta",
        "0.4,1.0,0.2",
        "--fd-step",
        "1e-5",
        "--tol",
        "1e-6",
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["tolerances"]["oracle"], 1e-6);
}

#[test]
fn monotonicity_report() {
    let m = fixture("depolarizing_morphism.json");
    let (code, v) = run_json(&[
        "monotonicity",
        "--kind",
        "sld",
        "--morphism",
        &m,
        "--samples",
        "1000",
        "--seed",
        "7",
    ]);
    assert_eq!(code, 0);
    let r = &v["result"];
    assert!(r["worst_ratio"].as_f64().unwrap() <= 1.0 + 1e-9);
    assert!(r["exact_max_eig"].as_f64().unwrap() <= 1.0 + 1e-9);
    assert_eq!(r["pass"], true);
}

#[test]
fn corrupted_gram_fails_with_witness() {
    let m = fixture("markov_morphism.json");
    let (code, v) = run_json(&[
        "monotonicity",
        "--kind",
        "gns",
        "--morphism",
        &m,
        "--corrupt-gram",
        "1.5",
    ]);
    assert_eq!(code, 1);
    assert!(v["result"]["worst_ratio"].as_f64().unwrap() > 1.0);
    assert_eq!(v["pass"], false);
}

#[test]
fn malformed_json_is_an_input_error() {
    let out = run(&["gns", "--state", &fixture("malformed.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    let last: Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(last["line"], 2);
    assert!(last["column"].is_number());
}

#[test]
fn invalid_inputs_exit_2() {
    let pure = fixture("pure_state.json");
    assert_eq!(
        run(&[
            "pullback",
            "--model",
            "qubit-pure",
            "--theta",
            "1,0.3",
            "--kind",
            "sld"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(&["pullback", "--model", "simplex:2", "--theta", "0.7,0.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["pullback", "--model", "torus", "--theta", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["check-channel", "--channel", "/nonexistent.json"])
            .status
            .code(),
        Some(2)
    );
    let (code, v) = run_json(&["gns", "--state", &pure]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["dim"], 2);
}

#[test]
fn gns_contraction_of_morphism() {
    let (code, v) = run_json(&["gns", "--morphism", &fixture("depolarizing_morphism.json")]);
    assert_eq!(code, 0);
    let s: Vec<f64> = v["result"]["singular_values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect();
    assert!((s[0] - 1.0).abs() < 1e-12);
}

#[test]
fn batch_commands_pass() {
    for args in [
        vec!["tracial-uniqueness", "--samples", "30"],
        vec![
            "congruence-invariance",
            "--model",
            "simplex:3",
            "--seed",
            "1",
        ],
        vec!["omf-catalog"],
        vec![
            "gaussian-demo",
            "--bins",
            "1024",
            "--mu",
            "0.5",
            "--sigma",
            "2",
        ],
    ] {
        let (code, v) = run_json(&args);
        assert_eq!(code, 0, "{args:?}: {v}");
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 3] = [
        &["tracial-uniqueness", "--samples", "40", "--seed", "9"],
        &[
            "congruence-invariance",
            "--model",
            "simplex:2",
            "--seed",
            "4",
        ],
        &["monotonicity", "--kind", "kmb", "--seed", "3"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let mut args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        if args[0] == "monotonicity" {
            args.extend(["--morphism".into(), fixture("depolarizing_morphism.json")]);
        }
        let mut outputs = Vec::new();
        for threads in ["1", "4"] {
            let path = dir.path().join(format!("{i}-{threads}.json"));
            let status = Command::new(env!("CARGO_BIN_EXE_ncp-lab"))
                .args(&args)
                .args(["--out", path.to_str().unwrap()])
                .env("NCP_LAB_THREADS", threads)
                .status()
                .unwrap();
            assert!(status.success());
            outputs.push(std::fs::read(&path).unwrap());
        }
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}
