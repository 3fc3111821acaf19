use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commoninfo")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

/// Writes `body` to a per-test file under the target tmp dir.
fn file(name: &str, body: &str) -> String {
    let path: PathBuf = [env!("CARGO_TARGET_TMPDIR"), name].iter().collect();
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn generated(name: &str, args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success());
    file(name, std::str::from_utf8(&out.stdout).unwrap())
}

#[test]
fn gen_dsbs_is_exact() {
    let v = json(&run(&["gen", "dsbs", "--p", "0.1"]));
    let pmf: Vec<f64> = v["pmf"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(pmf, [0.45, 0.05, 0.05, 0.45]);
}

#[test]
fn gen_is_deterministic_and_round_trips() {
    let args = ["gen", "random", "--shape", "3", "2", "--seed", "11"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let other = run(&["gen", "random", "--shape", "3", "2", "--seed", "12"]);
    assert_ne!(a.stdout, other.stdout);
    let path = file("random.json", std::str::from_utf8(&a.stdout).unwrap());
    let info = run(&["info", "--dist", &path]);
    assert!(info.status.success(), "{}", String::from_utf8_lossy(&info.stderr));
}

#[test]
fn info_mutual_information_of_dsbs() {
    let path = generated("dsbs.json", &["gen", "dsbs", "--p", "0.1"]);
    let v = json(&run(&["info", "--dist", &path, "--mi", "X1", "X2"]));
    // 1 - h(0.1)
    assert!((v["mi_bits"].as_f64().unwrap() - 0.531004).abs() < 1e-6);
}

#[test]
fn info_csv_lists_marginal_entropies() {
    let path = generated("dsbs_csv.json", &["gen", "dsbs", "--p", "0.1"]);
    let out = run(&["info", "--dist", &path, "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("quantity,bits"));
    assert!(text.contains("H(X1),1.000000"));
}

#[test]
fn malformed_pmf_exits_2() {
    let path = file("bad.json", r#"{"variables":[{"name":"X","alphabet":["a","b"]}],"pmf":[0.6,0.5]}"#);
    let out = run(&["info", "--dist", &path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sum"));
    let body = r#"{"variables":[{"name":"X1","alphabet":["0","1"]},{"name":"X2","alphabet":["0","1"]}],"pmf":[0.5,0.1,0.1,0.4]}"#;
    let pair = file("bad_pair.json", body);
    let out = run(&["verify", "--dist", &pair, "--d1", "0", "--d2", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1.1"));
    assert_eq!(run(&["gen", "dsbs", "--p", "0.7"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn rd_csv_on_uniform_bit() {
    let path = file("bit.json", r#"{"variables":[{"name":"X","alphabet":["0","1"]}],"pmf":[0.5,0.5]}"#);
    let out = run(&["rd", "--dist", &path, "--d1", "0.1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "D,rate_bits,distortion,iterations,converged");
    let fields: Vec<&str> = lines[1].split(',').collect();
    // 1 - h(0.1)
    assert!((fields[1].parse::<f64>().unwrap() - 0.531004).abs() < 1e-4);
    assert_eq!(fields[4], "true");
}

#[test]
fn missing_file_and_bad_grid_exit_2() {
    assert_eq!(run(&["info", "--dist", "/nonexistent/p.json"]).status.code(), Some(2));
    let path = generated("dsbs_grid.json", &["gen", "dsbs", "--p", "0.2"]);
    assert_eq!(run(&["sweep", "--dist", &path, "--d1", "0:1", "--d2", "0:0:1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--dist", &path, "--d1", "0", "--d2", "0", "--restarts", "0"]).status.code(), Some(2));
}

#[test]
fn verify_shared_source_at_zero_distortion() {
    let path = generated("shared.json", &["gen", "shared", "--w", "2", "--x1", "2", "--x2", "2", "--seed", "3"]);
    let out = run(&["verify", "--dist", &path, "--d1", "0", "--d2", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["equality_left"], Value::Bool(true));
    assert_eq!(v["equality_right"], Value::Bool(true));
    assert_eq!(v["left"], "holds");
    assert_eq!(v["right"], "holds");
    let (k, i, c) = (v["k_lower"].as_f64().unwrap(), v["i_mid"].as_f64().unwrap(), v["c_upper"].as_f64().unwrap());
    assert!(k <= i + 1e-6 && i <= c + 1e-6);
}

#[test]
fn iteration_cap_exits_3() {
    let path = generated("dsbs_cap.json", &["gen", "dsbs", "--p", "0.1"]);
    let out = run(&["rd", "--dist", &path, "--d1", "0.05", "--d2", "0.05", "--max-iter", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["converged"], Value::Bool(false));
}

#[test]
fn sweep_csv_rows_follow_grid_order() {
    let path = generated("dsbs_sweep.json", &["gen", "dsbs", "--p", "0.1"]);
    let out = run(&["sweep", "--dist", &path, "--d1", "0:0.1:2", "--d2", "0:0.05:2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "D1,D2,k_lower,i_mid,c_upper,slack_left,slack_right");
    let keys: Vec<(&str, &str)> = rows[1..]
        .iter()
        .map(|r| {
            let mut f = r.split(',');
            (f.next().unwrap(), f.next().unwrap())
        })
        .collect();
    assert_eq!(
        keys,
        [("0.000000", "0.000000"), ("0.000000", "0.050000"), ("0.100000", "0.000000"), ("0.100000", "0.050000")]
    );
}

#[test]
fn wyner_and_gk_report_objectives() {
    let path = generated("dsbs_wg.json", &["gen", "dsbs", "--p", "0.1"]);
    let w = json(&run(&["wyner", "--dist", &path, "--d1", "0", "--d2", "0"]));
    let g = json(&run(&["gk", "--dist", &path, "--d1", "0", "--d2", "0"]));
    // lossless DSBS: Wyner's C = 1 + h(p) - 2h(a), a = (1 - sqrt(1 - 2p)) / 2
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let a = (1.0 - (1.0f64 - 0.2).sqrt()) / 2.0;
    assert!((w["objective_bits"].as_f64().unwrap() - (1.0 + h(0.1) - 2.0 * h(a))).abs() < 1e-4);
    assert_eq!(w["feasible"], Value::Bool(true));
    assert_eq!(g["objective_bits"].as_f64(), Some(0.0));
}

#[test]
fn equality_demo_prints_both_chains() {
    let out = run(&["equality-demo", "--w", "0.3,0.7", "--encoders", "shared"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("upper chain") && text.contains("lower chain") && text.contains("implications"));
    assert!(text.contains("equality: left true, right true"));
}
