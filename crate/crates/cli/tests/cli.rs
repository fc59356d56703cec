use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_csext")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).expect("UTF-8 output"))
}

fn run_on(command: &str, file: &str, extra: &[&str]) -> (i32, Value) {
    let path = data(file);
    let mut args = vec![command, "--input", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let (code, out) = run(&args);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")))
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

fn close(v: &Value, re: f64, im: f64) -> bool {
    let (a, b) = complex(v);
    (a - re).abs() < 1e-12 && (b - im).abs() < 1e-12
}

#[test]
fn validate_e1() {
    let (code, out) = run_on("validate", "e1.json", &[]);
    assert_eq!(code, 0);
    assert_eq!(out["c_symmetric"], true);
    assert_eq!(out["contraction"], true);
}

#[test]
fn unique_e1() {
    let (code, out) = run_on("unique", "e1.json", &[]);
    assert_eq!(code, 0);
    assert_eq!(out["unique"], true);
    assert_eq!(out["intersection_dim"], 0);
    assert_eq!(out["radius_norm"].as_f64(), Some(0.0));
    let (_, out) = run_on("unique", "e2.json", &[]);
    assert_eq!(out["unique"], false);
    assert_eq!(out["intersection_dim"], 1);
}

#[test]
fn glazman_default_center() {
    let (code, out) = run_on("glazman", "glazman.json", &[]);
    assert_eq!(code, 0, "{out}");
    let m = &out["extension"];
    assert!(close(&m[0][0], 0.0, 1.0) && close(&m[1][1], 0.0, 1.0));
    assert!(close(&m[0][1], 0.0, 0.0) && close(&m[1][0], 0.0, 0.0));
    assert_eq!(out["certificate"]["passed"], true);
}

#[test]
fn contractive_parameter_on_e2() {
    let param = data("e2_param.json");
    let (code, out) = run_on("extend-contractive", "e2.json", &["--param", param.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}");
    // W = diag(0, conj(y)) for the parameter y = 0.5 + 0.25i.
    let w = &out["extension"];
    assert!(close(&w[1][1], 0.5, -0.25), "{w}");
    assert!(close(&w[0][0], 0.0, 0.0));
    assert_eq!(out["certificate"]["passed"], true);
}

#[test]
fn output_is_byte_identical() {
    for (cmd, file) in [("fuzz", "e2.json"), ("unique", "e2.json"), ("glazman", "glazman.json")] {
        let path = data(file);
        let args = [cmd, "--input", path.to_str().unwrap(), "--trials", "64", "--seed", "7"];
        let (c1, a) = run(&args);
        let (c2, b) = run(&args);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b);
    }
}

#[test]
fn floats_use_seventeen_digits() {
    let (_, out) = run(&["validate", "--input", data("e1.json").to_str().unwrap()]);
    assert!(out.contains("\"norm\":1.0000000000000000e0"), "{out}");
}

#[test]
fn reported_extensions_revalidate() {
    let dir = std::env::temp_dir().join(format!("csext-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let param = data("e2_param.json");
    let cases = [
        ("extend-contractive", "e2.json", vec!["--param", param.to_str().unwrap()]),
        ("extend-bounded", "e2.json", vec!["--param", param.to_str().unwrap()]),
        ("center", "e1.json", vec![]),
        ("ball", "e2.json", vec![]),
        ("glazman", "glazman.json", vec![]),
    ];
    for (i, (cmd, file, extra)) in cases.iter().enumerate() {
        let (code, out) = run_on(cmd, file, extra);
        assert_eq!(code, 0, "{cmd}: {out}");
        let path = dir.join(format!("ext{i}.json"));
        std::fs::write(&path, out["extension_instance"].to_string()).unwrap();
        let (code, report) = run(&["validate", "--input", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{cmd}: {report}");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn exit_codes() {
    let (code, out) = run_on("validate", "not_symmetric.json", &[]);
    assert_eq!(code, 1);
    assert_eq!(out["code"], "NotCSymmetric");
    assert!(out["residual"].as_f64().unwrap() > 0.4);

    let (code, out) = run(&["validate", "--input", "/definitely/missing.json"]);
    assert_eq!(code, 2);
    assert!(out.contains("ParseError"));
    let (code, _) = run(&["no-such-command"]);
    assert_eq!(code, 2);
    let (code, _) = run(&["unique", "--input", data("e1.json").to_str().unwrap(), "--lambda", "nope"]);
    assert_eq!(code, 2);

    // y = 1 makes 1 an eigenvalue of the Cayley-side contraction.
    let dir = std::env::temp_dir().join(format!("csext-cli-exit-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("one.json");
    std::fs::write(&p, "[[[0,0],[0,0]],[[0,0],[1,0]]]").unwrap();
    let (code, out) = run_on("glazman", "glazman.json", &["--param", p.to_str().unwrap()]);
    assert_eq!(code, 3, "{out}");
    assert_eq!(out["code"], "OneInSpectrum");
    std::fs::remove_dir_all(&dir).ok();

    let (code, out) = run_on("cayley", "glazman.json", &["--lambda", "0,-1"]);
    assert_eq!(code, 1);
    assert_eq!(out["code"], "LambdaNotUpperHalfPlane");
}

#[test]
fn fuzz_with_grid() {
    let (code, out) = run_on("fuzz", "e1.json", &["--trials", "100", "--grid-step", "0.1"]);
    assert_eq!(code, 0);
    assert_eq!(out["passed"], true);
    assert_eq!(out["grid"]["classified"], 1);
    assert!(out["search"]["max_distance_to_center"].as_f64().unwrap() <= 1e-9);
}
