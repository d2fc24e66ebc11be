use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn regcert(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regcert"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A temporary directory holding the assets of `name` under `assets/`.
fn scenario(name: &str, params: Option<&str>) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["generate", name, "-o", "assets"];
    if let Some(p) = params {
        std::fs::write(dir.path().join("params.toml"), p).unwrap();
        args.extend(["--params", "params.toml"]);
    }
    let out = regcert(&args, dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir
}

const INPUTS: [&str; 6] = [
    "--domain",
    "assets/domain.json",
    "--target",
    "assets/target.json",
    "--mapping",
    "assets/mapping.json",
];

fn with_inputs<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(INPUTS.iter()).chain(tail).copied().collect()
}

#[test]
fn fields_are_reproducible_to_the_bit() {
    let dir = scenario("scaling", None);
    for out in ["a", "b"] {
        let o = regcert(&with_inputs(&["fields"], &["--stride", "3", "-o", out]), dir.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = std::fs::read(dir.path().join("a/fields.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/fields.csv")).unwrap();
    assert_eq!(a, b);

    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "point,x1,x2,Lip,H,Lip_spread,Lip_growth,Lip_diverging,H_spread,H_growth,H_diverging"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 11);
    // floats carry 17 significant digits and parse back exactly
    let lip = row[3];
    let mantissa = lip.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{lip}");
    let v: f64 = lip.parse().unwrap();
    assert!((v - 2.0).abs() < 0.2, "{v}");
    assert!(row[7] == "false" || row[7] == "true");
}

#[test]
fn config_file_with_flag_override() {
    let dir = scenario("identity", None);
    std::fs::write(
        dir.path().join("run.toml"),
        r#"
        output = "from-config"
        [input]
        domain = "assets/domain.json"
        target = "assets/target.json"
        mapping = "assets/mapping.json"
        [fields]
        kinds = ["Lip", "lip"]
        stride = 5
        "#,
    )
    .unwrap();
    let o = regcert(&["fields", "-c", "run.toml", "--kinds", "H"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("from-config/fields.csv")).unwrap();
    assert!(text.starts_with("point,x1,x2,H,H_spread,"), "{}", text.lines().next().unwrap());

    std::fs::write(dir.path().join("bad.toml"), "[fields]\nkind = [\"Lip\"]\n").unwrap();
    let o = regcert(&["fields", "-c", "bad.toml"], dir.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn identity_certificate_passes() {
    let dir = scenario("identity", None);
    let o = regcert(&with_inputs(&["certify"], &["--theorem", "sobolev-lip", "--p", "1.5", "-o", "c"]), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
    let json = std::fs::read_to_string(dir.path().join("c/certificate.json")).unwrap();
    let cert: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(cert["theorem"], "sobolev-lip");
    assert_eq!(cert["verdict"]["pass"], true);
}

#[test]
fn strips_certificate_fails() {
    let dir = scenario("strips", Some("strips = 4\nresolution = 0.01\n"));
    let o = regcert(
        &with_inputs(&["certify"], &["--theorem", "bv", "--stride", "4", "--levels", "8,16,32", "-o", "c"]),
        dir.path(),
    );
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    assert!(dir.path().join("c/certificate.json").exists());
}

#[test]
fn missing_input_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = regcert(
        &["fields", "--domain", "nope.json", "--target", "nope.json", "--mapping", "nope.json", "-o", "out"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("input error"));
    assert!(!dir.path().join("out").exists());

    let o = regcert(&["reproduce", "spiral"], dir.path());
    assert_eq!(code(&o), 2, "{}", stderr(&o));
}

#[test]
fn out_of_range_parameters_exit_three() {
    let dir = scenario("identity", None);
    let o = regcert(&with_inputs(&["certify"], &["--epsilon", "2", "-o", "c"]), dir.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(!dir.path().join("c").exists());
    let o = regcert(&with_inputs(&["fields"], &["--radii", "0.02,0.04", "-o", "f"]), dir.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let o = regcert(&["modulus", "--domain", "assets/domain.json", "--axis", "0", "--p", "0.5"], dir.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn exhausted_solver_budget_exits_four() {
    let dir = scenario("identity", None);
    let args = [
        "modulus", "--domain", "assets/domain.json", "--axis", "0", "--p", "3", "--max-sweeps", "1",
        "--tolerance", "1e-14", "-o", "m",
    ];
    let o = regcert(&args, dir.path());
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).contains("budget"));
    // the best feasible density is still written
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m/modulus.json")).unwrap())
            .unwrap();
    assert_eq!(report["converged"], false);
    assert!(dir.path().join("m/density.csv").exists());

    let o = regcert(&["modulus", "--domain", "assets/domain.json", "--axis", "0", "-o", "m2"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m2/modulus.json")).unwrap())
            .unwrap();
    let value = report["feasible_value"].as_f64().unwrap();
    assert!((value - 1.0).abs() < 0.05, "{value}");
}

#[test]
fn content_of_a_segment() {
    let dir = scenario("identity", None);
    let o = regcert(
        &[
            "hausdorff", "--domain", "assets/domain.json", "--lo", "0.2,0.49", "--hi", "0.8,0.51",
            "--dimension", "1", "-o", "h",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("h/content.json")).unwrap())
            .unwrap();
    let estimate = report["estimate"].as_f64().unwrap();
    assert!(estimate > 0.3 && estimate < 1.2, "{estimate}");
}

#[test]
fn reproduce_reports_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = regcert(&["reproduce", "constant", "-o", "r"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("all expectations met"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r/report.json")).unwrap())
            .unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(stdout.lines().count(), checks.len() + 1);
}
