use serde_json::Value;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbitcl")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn black_scholes_atm_price() {
    let v = json(&["price", "--preset", "black-scholes", "--strike", "1", "--maturity", "1"]);
    let r = &v["results"][0];
    assert!((r["price"].as_f64().unwrap() - 0.0796557).abs() < 1e-6);
    assert!((r["implied_vol"].as_f64().unwrap() - 0.2).abs() < 1e-9);
    assert_eq!(v["model_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn several_strikes() {
    let v = json(&["price", "--preset", "heston", "--strike", "0.8,1,1.2", "--maturity", "0.5"]);
    let p: Vec<f64> = v["results"].as_array().unwrap().iter().map(|r| r["price"].as_f64().unwrap()).collect();
    assert_eq!(p.len(), 3);
    assert!(p[0] > p[1] && p[1] > p[2]);
}

#[test]
fn moments_beyond_the_explosion_boundary() {
    let v = json(&["moments", "--preset", "alpha-cir", "--u3", "1.2"]);
    assert_eq!(v["lifetime"].as_f64(), Some(0.0));
    let v = json(&["moments", "--preset", "alpha-cir", "--u3", "0.5"]);
    assert_eq!(v["lifetime"].as_str(), Some("inf"));
}

#[test]
fn zero_tilt_reproduces_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.toml");
    let o = run(&["transform-measure", "--preset", "tempered-cgmy", "--zeta", "0", "--lambda", "0", "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let a = json(&["moments", "--preset", "tempered-cgmy"]);
    let b = json(&["moments", "--model", out.to_str().unwrap()]);
    assert_eq!(a["model_hash"], b["model_hash"]);
}

#[test]
fn simulation_is_deterministic() {
    let args = ["simulate", "--preset", "tempered-cgmy", "--paths", "3", "--step", "0.125", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("# model_hash = "));
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 3 * 9);
    let c = run(&["simulate", "--preset", "tempered-cgmy", "--paths", "3", "--step", "0.125", "--seed", "8"]);
    assert_ne!(text.as_bytes(), c.stdout.as_slice());
}

#[test]
fn char_fn_at_zero_is_one() {
    let v = json(&["char-fn", "--preset", "heston", "--maturity", "1", "--w3", "0,0"]);
    assert_eq!(v["value"]["re"].as_f64(), Some(1.0));
}

#[test]
fn wings_csv() {
    let o = run(&["wings", "--preset", "heston", "--maturity", "1", "--k-max", "1", "--k-points", "5", "--csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6);
}

#[test]
fn exit_codes() {
    let o = run(&["price", "--preset", "heston", "--strike", "1", "--maturity", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("E-DOMAIN"));

    let o = run(&["price", "--preset", "nope", "--strike", "1", "--maturity", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("E-CONFIG"));

    let o = run(&["price", "--strike", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("E-CONFIG"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("m.toml");
    std::fs::write(&bad, "[initial_state]\nx0 = 1\n[bogus]\n").unwrap();
    let o = run(&["moments", "--model", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bogus"));

    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn thread_count_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_cbitcl"))
        .env("CBITCL_THREADS", "2")
        .args(["simulate", "--preset", "heston", "--paths", "2", "--step", "0.5"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
}
