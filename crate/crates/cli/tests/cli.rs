use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rearrange"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.push("--json");
    let o = run(&a);
    (
        o.status.code().unwrap(),
        serde_json::from_str(&stdout(&o)).unwrap(),
    )
}

#[test]
fn apply_prints_bracket_notation() {
    let o = run(&["apply", "d0", "generic:1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "f([x0,x1],[x2])");
    assert_eq!(
        stdout(&run(&["apply", "t t t", "generic:2"])).trim(),
        "f([x0],[x1],[x2])"
    );
    assert_eq!(
        stdout(&run(&["apply", "s0 d0", "generic:1"])).trim(),
        "f([x0,x0],[x1])"
    );
    assert_eq!(
        stdout(&run(&["apply", "d1", "generic:0:g"])).trim(),
        "g([x0,x1])"
    );
}

#[test]
fn exit_codes() {
    let o = run(&["apply", "x7", "generic:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 0"));
    assert_eq!(run(&["apply", "d0 q", "generic:1"]).status.code(), Some(2));
    assert_eq!(run(&["apply", "d9", "generic:1"]).status.code(), Some(3));
    assert_eq!(run(&["apply", "s0", "generic:0"]).status.code(), Some(3));
    assert_eq!(run(&["apply", "d0", "exp:1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--n-max", "2"]).status.code(), Some(0));
    // the dual table as stated fails at the last face
    assert_eq!(run(&["dual-verify", "--n-max", "2"]).status.code(), Some(1));
}

#[test]
fn json_reports_carry_schema_and_seed() {
    let (code, v) = json(&["apply", "d0", "generic:1", "--seed", "9"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["target"], 2);
    let (code, v) = json(&["verify", "--n-max", "2", "--mode", "numeric", "--seed", "4"]);
    assert_eq!(code, 0);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["seed"], 4);
    assert_eq!(v["passed"], true);
    let (_, v) = json(&["dual-verify", "--n-max", "3", "--semantic", "--corrected"]);
    let failing: Vec<(u64, u64)> = v["reports"][0]["instances"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|i| i["passed"] == false)
        .map(|i| (i["n"].as_u64().unwrap(), i["j"].as_u64().unwrap()))
        .collect();
    assert_eq!(failing, vec![(1, 1), (2, 2), (3, 3)]);
    assert_eq!(v["reports"][1]["suite"], "corrected");
}

#[test]
fn reports_are_deterministic() {
    let args = [
        "grad-check",
        "--preset",
        "cubic-square",
        "-d",
        "4",
        "--directions",
        "3",
        "--seed",
        "5",
        "--json",
    ];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn matrix_mode_and_taylor() {
    let (code, v) = json(&[
        "verify", "--n-max", "2", "--mode", "matrix", "-d", "3", "--seed", "2",
    ]);
    assert_eq!(code, 0, "{v}");
    let (code, v) = json(&["taylor", "--order", "1"]);
    assert_eq!(code, 0);
    assert!((v["slope"].as_f64().unwrap() - 2.0).abs() < 0.1);
    let (code, v) = json(&["taylor", "--function", "square", "--order", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["terminated"], true);
}

#[test]
fn omega_and_simplicial() {
    assert_eq!(
        stdout(&run(&["omega", "--alpha", "1", "--word", "p0"])).trim(),
        "-ω(2)"
    );
    assert_eq!(
        stdout(&run(&["omega", "--alpha", "1,1,1,1", "--word", "s0"])).trim(),
        "ω(2,1,1)"
    );
    assert_eq!(
        stdout(&run(&["omega", "--alpha", "1,1,1,1", "--word", "s1"])).trim(),
        "ω(1,2,1)"
    );
    assert_eq!(run(&["omega", "--alpha", "1,0"]).status.code(), Some(3));
    let (_, v) = json(&["simplicial", "--values", "0,0,1,3", "--target", "3"]);
    assert_eq!(v["missing_points"], serde_json::json!([2]));
    assert_eq!(v["stationary_points"], serde_json::json!([0]));
    let (_, v) = json(&["simplicial", "--word", "t d0", "--source", "1"]);
    assert_eq!(v["cyclic_power"], 0);
    assert_eq!(v["set_map"], serde_json::json!([0, 1]));
    assert_eq!(
        run(&["simplicial", "--word", "d7", "--source", "1"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn out_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("rearrange-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let o = run(&[
        "apply",
        "d1",
        "generic:1",
        "--json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout(&o));
    std::fs::remove_dir_all(&dir).unwrap();
}
