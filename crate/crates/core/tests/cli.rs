//! End-to-end tests of the command-line interface: exit-code contract,
//! state round-trips, and CSV emission.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_counterpair"))
}

fn construct(dir: &Path, steps: u32) -> std::path::PathBuf {
    let state = dir.join("state.json");
    let out = bin()
        .args([
            "construct",
            "--profile",
            "scaled",
            "--steps",
            &steps.to_string(),
            "--seed",
            "0",
            "--out",
        ])
        .arg(&state)
        .output()
        .expect("spawn");
    assert!(out.status.success(), "construct failed: {out:?}");
    state
}

#[test]
fn constants_succeeds_and_reports_certificates() {
    let out = bin().args(["constants", "--bits", "128"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["sigma_sign_change_certificate"], true);
    assert_eq!(json["root_identity_within_width"], true);
}

#[test]
fn construct_then_verify_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let state = construct(dir.path(), 3);
    let report = dir.path().join("report.json");
    let out = bin()
        .args(["verify", "--in"])
        .arg(&state)
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "verify: {out:?}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["overall"], true);
    assert!(json["derived"]["chain"].as_array().unwrap().len() >= 3);
}

#[test]
fn construct_deterministic_and_round_trip_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let s1 = construct(dir.path(), 2);
    let raw1 = std::fs::read_to_string(&s1).unwrap();
    let s2 = dir.path().join("state2.json");
    let out = bin()
        .args([
            "construct", "--profile", "scaled", "--steps", "2", "--seed", "0", "--out",
        ])
        .arg(&s2)
        .output()
        .unwrap();
    assert!(out.status.success());
    let raw2 = std::fs::read_to_string(&s2).unwrap();
    assert_eq!(raw1, raw2, "same profile/seed must be byte-identical");

    // parse → serialize is also byte-identical
    let state = counterpair::construction::ConstructionState::from_json(&raw1).unwrap();
    assert_eq!(state.to_json(), raw1);
}

#[test]
fn verify_tampered_state_exits_one_and_names_condition() {
    let dir = tempfile::tempdir().unwrap();
    let state_path = construct(dir.path(), 3);
    let raw = std::fs::read_to_string(&state_path).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&raw).unwrap();
    // flip the sign of m2 in the last step: breaks the m1*m2 < 0 condition
    let m2 = json["steps"][3]["m"][2].as_str().unwrap().to_string();
    let flipped = if let Some(rest) = m2.strip_prefix('-') {
        rest.to_string()
    } else {
        format!("-{m2}")
    };
    json["steps"][3]["m"][2] = serde_json::Value::String(flipped);
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&json).unwrap()).unwrap();

    let report = dir.path().join("report.json");
    let out = bin()
        .args(["verify", "--in"])
        .arg(&tampered)
        .arg("--out")
        .arg(&report)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "tampered verify: {out:?}");
    // the report is still written and names a failing condition
    let rep: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["overall"], false);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("iv_signs") || stderr.contains("signs"), "{stderr}");
}

#[test]
fn scan_emits_csv_with_header_and_chain() {
    let dir = tempfile::tempdir().unwrap();
    let state = construct(dir.path(), 3);
    let csv_path = dir.path().join("scan.csv");
    let out = bin()
        .args(["scan", "--in"])
        .arg(&state)
        .args(["--height-max", "200", "--threads", "2", "--out"])
        .arg(&csv_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "scan: {out:?}");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.contains("# floor_log2: -24"));
    assert!(csv.contains("m1,m2,height,form_lo,form_hi,normalized_lo,normalized_hi"));
    assert!(csv.contains("# below_floor_count: 0"));
    // exactly one data row (the minimum) when nothing is below the floor
    let data_rows = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("m1,"))
        .count();
    assert_eq!(data_rows, 1);
}

#[test]
fn approx_emits_csv_and_plot_script() {
    let dir = tempfile::tempdir().unwrap();
    let state = construct(dir.path(), 3);
    let csv_path = dir.path().join("approx.csv");
    let plot_path = dir.path().join("approx.gp");
    let out = bin()
        .args(["approx", "--in"])
        .arg(&state)
        .args(["--height-max", "300", "--out"])
        .arg(&csv_path)
        .arg("--plot")
        .arg(&plot_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "approx: {out:?}");
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(csv.contains(
        "x1,x2,height,form_lo,form_hi,exponent_lo,exponent_hi,product_phi_lo,product_phi_hi"
    ));
    assert!(csv.contains("# best_exponent:"));
    assert!(csv.contains("# g_of_sigma:"));
    let plot = std::fs::read_to_string(&plot_path).unwrap();
    assert!(plot.contains("plot") && plot.contains(csv_path.display().to_string().as_str()));
}

#[test]
fn usage_errors_exit_two() {
    // unknown subcommand
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // missing required flag
    let out = bin().args(["construct", "--profile", "scaled"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // unreadable input file
    let out = bin()
        .args(["verify", "--in", "/nonexistent/state.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // invalid height
    let dir = tempfile::tempdir().unwrap();
    let state = construct(dir.path(), 2);
    let out = bin()
        .args(["scan", "--in"])
        .arg(&state)
        .args(["--height-max", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
