use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_richset"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn richset")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("richset-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn construct_emits_sorted_members() {
    let o = run(&["construct", "thick_no_kxy", "2", "--emit-upto", "2^33"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "256\n257\n4294967296\n4294967297\n4294967298\n");
}

#[test]
fn construct_validate_reports_hypotheses() {
    let o = run(&["construct", "thick_no_kxy", "5", "--validate"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["kxy_pattern"].is_null());
    assert!(v["report"]["checks"].as_array().unwrap().iter().all(|c| c["holds"] == true));
}

#[test]
fn ip_certificate_verifies_and_tampering_fails() {
    let cert = tmp("ip3.json");
    let o = run(&["--out", cert.to_str().unwrap(), "largeness", "ip", "--set", "evens", "--r", "3", "--bound", "100"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(run(&["verify", cert.to_str().unwrap(), "evens"]).status.success());

    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    v["values"][2]["value"] = serde_json::json!("7");
    let bad = tmp("ip3-bad.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = run(&["verify", bad.to_str().unwrap(), "evens"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[1,2]") || stdout(&o).contains("1, 2"), "{}", stdout(&o));
}

#[test]
fn density_csv_columns() {
    let o = run(&["density", "--set", "residue(3,1)", "--window", "add:300,0", "--pool", "0..3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("window_descriptor,best_shift,numerator,denominator"));
    assert_eq!(lines.next(), Some("\"add:300,0\",0,100,300"));
}

#[test]
fn equidist_disc_table() {
    let o = run(&["equidist", "disc", "--poly", "0,sqrt(2)", "--n", "100,1000", "--h", "1000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1][1] < rows[0][1]);
    assert!(rows.iter().all(|r| r[1] <= r[2]));
}

#[test]
fn normform_enum_is_sorted_csv() {
    let o = run(&["normform", "enum", "--preset", "cubic:a=2", "--box", "6", "--limit", "200"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let vals: Vec<i64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(vals[0], 1);
}

#[test]
fn ff_witness_round_trip() {
    let cert = tmp("ff.json");
    let o = run(&["--out", cert.to_str().unwrap(), "ff", "witness", "--q", "13", "--k", "2", "--f", "0,1"]);
    assert!(o.status.success());
    assert!(run(&["verify", cert.to_str().unwrap()]).status.success());
}

#[test]
fn run_config_writes_artifacts() {
    let dir = tmp("run-out");
    let cfg = tmp("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"name":"evens_ap","set":"window(evens,[0,10000))","analysis":{"verb":"patterns.longest_ap","lo":"0","hi":"10000"}}"#,
    )
    .unwrap();
    let o = run(&["--out", dir.to_str().unwrap(), "run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cert = dir.join("evens_ap.cert.json");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cert).unwrap()).unwrap();
    assert_eq!(v["start"], "0");
    assert_eq!(v["step"], "2");
    assert_eq!(v["length"], 5000);
    assert!(run(&["verify", cert.to_str().unwrap(), "evens"]).status.success());
}

#[test]
fn bad_config_lists_fields() {
    let cfg = tmp("bad.json");
    std::fs::write(&cfg, r#"{"name":"x","analysis":{"verb":"nope"},"colour":1}"#).unwrap();
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn run_divisible_union_profile() {
    let dir = tmp("du-out");
    let cfg = tmp("du.json");
    std::fs::write(
        &cfg,
        r#"{"name":"du","set":"divisible_union()","analysis":{"verb":"density.lower_density_profile","n_max":"10^6"}}"#,
    )
    .unwrap();
    let o = run(&["--out", dir.to_str().unwrap(), "run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.join("du.csv")).unwrap();
    let last = text.lines().last().unwrap();
    let ratio: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!(last.starts_with("1000000,") && ratio < 1e-3, "{last}");
}

#[test]
fn run_ff_threshold_and_determinism() {
    let cfg = tmp("ff.json");
    std::fs::write(&cfg, r#"{"name":"thr","analysis":{"verb":"ff.threshold","n":1,"k":2,"qmax":500}}"#).unwrap();
    let mut outputs = Vec::new();
    for d in ["ff-a", "ff-b"] {
        let dir = tmp(d);
        assert!(run(&["--out", dir.to_str().unwrap(), "run", cfg.to_str().unwrap()]).status.success());
        outputs.push(std::fs::read(dir.join("thr.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let v: serde_json::Value = serde_json::from_slice(&outputs[0]).unwrap();
    assert_eq!(v["threshold"], 7);
    assert!(v["failures"].as_array().unwrap().iter().any(|f| f["q"] == 3));
}

#[test]
fn geo_arithmetic_round_trip() {
    let cert = tmp("geo.json");
    let o = run(&["--out", cert.to_str().unwrap(), "patterns", "geoarith", "--set", "fg(gens=2|3, bound=10^6)", "--n", "2", "--bound", "20"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(run(&["verify", cert.to_str().unwrap(), "fg(gens=2|3, bound=10^6)"]).status.success());
}
