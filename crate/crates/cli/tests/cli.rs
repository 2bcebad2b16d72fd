use std::process::{Command, Output};

use serde_json::Value;

fn qinfo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qinfo"))
        .args(args)
        .env_remove("QINFO_SEED")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

#[test]
fn compute_bell_entropies() {
    let v = json_of(&qinfo(&["compute", "--state", "bell", "--quantities", "S,Sc"]));
    assert_eq!(v["S"].as_f64().unwrap(), 0.0);
    assert!((v["Sc"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn compute_maximally_mixed_has_no_coherent_entropy() {
    let v = json_of(&qinfo(&["compute", "--state", "mixed:4", "--quantities", "Sc"]));
    assert!(v["Sc"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn compute_w_tripartite_ledger() {
    let v = json_of(&qinfo(&["compute", "--state", "w3", "--parts", "0|1|2", "--quantities", "ledger"]));
    assert!(v["ledger"]["residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(v["ledger"]["holds"], Value::Bool(true));
    assert_eq!(v["ledger"]["parts"].as_array().unwrap().len(), 3);
    assert_eq!(v["ledger"]["correlations"].as_array().unwrap().len(), 2);
}

#[test]
fn compute_mutual_information_on_bipartition() {
    let v = json_of(&qinfo(&["compute", "--state", "ghz3", "--parts", "01|2", "--quantities", "I"]));
    assert!((v["I"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let v = json_of(&qinfo(&["compute", "--state", "ghz3", "--quantities", "I"]));
    assert!((v["I"]["0:1"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn compute_from_file_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.json");
    std::fs::write(&path, r#"{"dims":[2],"matrix":[[[0.75,0],[0,0]],[[0,0],[0.25,0]]]}"#).unwrap();
    let arg = format!("file:{}", path.display());
    let out = qinfo(&["compute", "--state", &arg, "--quantities", "S", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("quantity,value"));
    let value: f64 = lines.next().unwrap().strip_prefix("S,").unwrap().parse().unwrap();
    assert!((value - h2(0.75)).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    assert_eq!(qinfo(&["compute", "--state", "nonsense"]).status.code(), Some(2));
    assert_eq!(qinfo(&["compute", "--state", "bell", "--quantities", "X"]).status.code(), Some(2));
    assert_eq!(qinfo(&["compute", "--state", "bell", "--parts", "0|0"]).status.code(), Some(2));
    assert_eq!(qinfo(&["compute", "--state", "bloch:1,1,1"]).status.code(), Some(3));
    assert_eq!(qinfo(&["tcorr", "--spectrum", "0.5,0.6"]).status.code(), Some(2));
    assert_eq!(qinfo(&["tcorr", "--spectrum", "0.5,abc"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dims":[2],"matrix":[[[1.2,0],[0,0]],[[0,0],[-0.2,0]]]}"#).unwrap();
    let arg = format!("file:{}", bad.display());
    assert_eq!(qinfo(&["compute", "--state", &arg]).status.code(), Some(3));
    let garbled = dir.path().join("garbled.json");
    std::fs::write(&garbled, "{not json").unwrap();
    let arg = format!("file:{}", garbled.display());
    assert_eq!(qinfo(&["compute", "--state", &arg]).status.code(), Some(2));
}

#[test]
fn tcorr_analytic() {
    let v = json_of(&qinfo(&["tcorr", "--spectrum", "0.8,0.2"]));
    assert!((v["I_analytic"].as_f64().unwrap() - (1.0 - h2(0.8))).abs() < 1e-12);
    let v = json_of(&qinfo(&["tcorr", "--spectrum", "0.25,0.25,0.25,0.25"]));
    assert!(v["I_analytic"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn tcorr_monte_carlo_within_three_standard_errors() {
    let v = json_of(&qinfo(&[
        "tcorr", "--spectrum", "0.5,0.3,0.2", "--mode", "mc", "--n", "1000000", "--seed", "7",
    ]));
    let analytic = v["I_analytic"].as_f64().unwrap();
    let est = v["mc"]["I_estimate"].as_f64().unwrap();
    let se = v["mc"]["standard_error"].as_f64().unwrap();
    assert!(se > 0.0);
    assert!((est - analytic).abs() <= 3.0 * se, "{est} vs {analytic} ± {se}");
}

#[test]
fn tcorr_is_deterministic_and_honours_seed_env() {
    let args = ["tcorr", "--spectrum", "0.6,0.4", "--mode", "mc", "--n", "5000", "--format", "csv"];
    let a = qinfo(&args);
    let b = qinfo(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("s1,s2,count\n"));

    let with_env = Command::new(env!("CARGO_BIN_EXE_qinfo"))
        .args(args)
        .env("QINFO_SEED", "99")
        .output()
        .unwrap();
    let with_flag = qinfo(&[&args[..], &["--seed", "99"]].concat());
    assert_eq!(with_env.stdout, with_flag.stdout);
    assert_ne!(with_env.stdout, a.stdout);
}

#[test]
fn tcorr_exports_channel() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("channel.json");
    let out = qinfo(&["tcorr", "--spectrum", "0.7,0.2,0.1", "--channel-out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let ch: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let kraus = ch["kraus"].as_array().unwrap();
    assert_eq!(kraus.len(), 9);
    let json: qinfo::timechannel::ChannelJson = serde_json::from_value(ch).unwrap();
    let channel = qinfo::timechannel::KrausChannel::from_json(&json).unwrap();
    assert!(channel.completeness_defect() < 1e-9);
}

#[test]
fn table_ghz_analytic_rows() {
    let out = qinfo(&["table", "ghz3", "--no-optimize", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |q: &str, m: &str| -> f64 {
        let prefix = format!("{q},{m},");
        let line = text.lines().find(|l| l.starts_with(&prefix)).unwrap();
        line.split(',').nth(2).unwrap().parse().unwrap()
    };
    for (m, sc) in [("A", 0.0), ("B", 0.0), ("C", 0.0), ("AB", 1.0), ("AC", 1.0), ("BC", 1.0), ("ABC", 3.0)] {
        assert!((value("S_c", m) - sc).abs() < 1e-6, "S_c {m}");
    }
}

#[test]
fn table_w_markdown_layout() {
    let out = qinfo(&["table", "w3", "--no-optimize"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "| w3 | ρ_A | ρ_B | ρ_C | ρ_AB | ρ_AC | ρ_BC | ρ_ABC |");
    let i_row = text.lines().find(|l| l.starts_with("| I |")).unwrap();
    assert_eq!(i_row.matches("0.918296").count(), 3);
}

#[test]
fn table_bell_with_optimizer() {
    let out = qinfo(&["table", "bell", "--format", "json", "--restarts", "4"]);
    let v = json_of(&out);
    let rows = ["S", "S_c", "G", "L", "I", "E_f"];
    let cell = |row: &str| &v["cells"][rows.iter().position(|r| *r == row).unwrap()][2];
    assert!((cell("I")["value"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((cell("G")["value"].as_f64().unwrap() - 1.0).abs() < 2e-2);
    assert_eq!(cell("G")["optimized"], Value::Bool(true));
}

#[test]
fn table_rejects_other_states() {
    assert_eq!(qinfo(&["table", "mixed:2"]).status.code(), Some(2));
}

#[test]
fn optimize_local_bell() {
    let v = json_of(&qinfo(&[
        "optimize-local", "--state", "bell", "--parts", "0|1", "--config", r#"{"restarts": 4, "seed": 3}"#, "--trace",
    ]));
    assert!((v["G"].as_f64().unwrap() - 1.0).abs() < 2e-2);
    assert!((v["L"].as_f64().unwrap() - 1.0).abs() < 2e-2);
    assert_eq!(v["config"]["restarts"], 4);
    assert_eq!(v["max_search"]["restarts"].as_array().unwrap().len(), 5);
}

#[test]
fn optimize_local_rejects_bad_config() {
    let out = qinfo(&["optimize-local", "--state", "bell", "--config", "{\"restarts\": \"many\"}"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_fast_passes() {
    let v = json_of(&qinfo(&["validate", "fast"]));
    assert_eq!(v["passed"], Value::Bool(true));
    assert!(v["checks"].as_array().unwrap().len() >= 10);
}

#[test]
fn validate_rejects_unknown_suite() {
    assert_eq!(qinfo(&["validate", "slow"]).status.code(), Some(2));
}
