//! End-to-end tests of the ergolab binary: exit codes, report shapes, and
//! byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ergolab"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

#[test]
fn phi_table_matches_enumeration() {
    let out = bin()
        .args([
            "phitable",
            "--system",
            fixture("odometer2.sys").to_str().unwrap(),
            "--set",
            "cyl(\"00\")",
            "--m",
            "0..4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for row in [
        "phi-table,0,1/4,1/4,true,0,",
        "phi-table,1,1/2,1/2,true,1,",
        "phi-table,2,3/4,3/4,true,2,",
        "phi-table,3,1,1,true,3,",
        "phi-table,4,1,1,true,4,",
    ] {
        assert!(text.contains(row), "missing {row} in:\n{text}");
    }
}

#[test]
fn phi_reports_certificate() {
    let out = bin()
        .args([
            "phi",
            "--system",
            fixture("odometer2.sys").to_str().unwrap(),
            "--set",
            "cyl(\"0\") | cyl(\"11\")",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("stabilized(step="), "{text}");
    assert!(text.contains(",1,1,true,"), "{text}");
    // Exact scalars only; no decimal column unless asked.
    assert!(!text.contains("lower_decimal"), "{text}");
}

#[test]
fn phistar_reports_profile_and_decimals_opt_in() {
    let out = bin()
        .args([
            "phistar",
            "--system",
            fixture("odometer2.sys").to_str().unwrap(),
            "--set",
            "cyl(\"0\")",
            "--decimals",
            "4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("invariance-attained(m=2)"), "{text}");
    assert!(text.contains("kappa=2"), "{text}");
    assert!(text.contains("0.5000"), "{text}");
}

#[test]
fn witness_on_product_fixture() {
    let out = bin()
        .args([
            "witness",
            "--system",
            fixture("product-id2-odo2.sys").to_str().unwrap(),
            "--set",
            "atoms{0}",
            "--eps",
            "1/2",
            "--n0",
            "32",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["rows"][0]["lower"], "1/2"); // the jump
    assert_eq!(json["witness"]["guarantee"], "1/4");
    assert_eq!(json["witness"]["distance"], "1/64");
}

#[test]
fn phistar_witness_subcommand_reports_jumps() {
    let out = bin()
        .args([
            "phistar-witness",
            "--system",
            fixture("odometer2.sys").to_str().unwrap(),
            "--set",
            "cyl(\"0\")",
            "--delta",
            "1/16",
            "--exponents",
            "2,4,8",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for m in [2, 4, 8] {
        assert!(
            text.contains(&format!("phistar-witness,m={m},1/2,1/2,true")),
            "{text}"
        );
    }
    assert!(text.contains("guarantee=1/4"), "{text}");
}

#[test]
fn tower_subcommand_reports_residual() {
    let out = bin()
        .args([
            "tower",
            "--system",
            fixture("odometer2.sys").to_str().unwrap(),
            "--n0",
            "3",
            "--eps",
            "1/4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("tower,n0=3,1/16,1/16"), "{text}");
}

#[test]
fn decompose_lists_components() {
    let out = bin()
        .args([
            "decompose",
            "--system",
            fixture("odometer6-power4.sys").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    // Four invariant components of measure 1/4 each.
    assert_eq!(text.matches(",1/4,1/4,").count(), 4, "{text}");
}

#[test]
fn probe_runs_are_byte_identical() {
    let run = || {
        let out = bin()
            .args([
                "probe",
                "--system",
                fixture("odometer2.sys").to_str().unwrap(),
                "--set",
                "empty",
                "--radii",
                "1/4,1/16",
                "--samples",
                "4",
                "--seed",
                "42",
                "--format",
                "json",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        stdout(&out)
    };
    let a = run();
    let b = run();
    assert_eq!(a, b);
    assert!(a.contains("DiscontinuityWitnessed"), "{a}");
}

#[test]
fn check_suite_exits_zero_and_prints_lines() {
    let out = bin().args(["check", "tm1-suite"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("PASS: tm1-witness"), "{text}");
    assert!(text.contains("PASS: tm1-null"), "{text}");
}

#[test]
fn malformed_spec_exits_two() {
    let dir = std::env::temp_dir().join(format!("ergolab-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.sys");
    std::fs::write(&bad, "kind=odometer base=").unwrap();
    let out = bin()
        .args(["phi", "--system", bad.to_str().unwrap(), "--set", "full"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("1:"), "diagnostic should carry a position: {err}");

    let out = bin()
        .args([
            "phi",
            "--system",
            fixture("odometer2.sys").to_str().unwrap(),
            "--set",
            "cyl(\"2\")",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn plan_runner_writes_per_task_reports() {
    let dir = std::env::temp_dir().join(format!("ergolab-plan-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    let out = bin()
        .args([
            "run",
            fixture("plan.json").to_str().unwrap(),
            "--out-dir",
            dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    for expect in [
        "01-phi-table.csv",
        "02-phi.csv",
        "03-phistar.csv",
        "04-tower.csv",
    ] {
        assert!(names.contains(&expect.to_string()), "{names:?}");
    }
    let table = std::fs::read_to_string(dir.join("01-phi-table.csv")).unwrap();
    assert!(table.contains("phi-table,2,3/4,3/4"), "{table}");
    assert!(table.contains("# seed=7"), "{table}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn golden_rotation_phi_via_cli() {
    let out = bin()
        .args([
            "phi",
            "--system",
            fixture("golden-rotation.sys").to_str().unwrap(),
            "--set",
            "interval(0, 1/10)",
            "--m-max",
            "128",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains(",1,1,true,"), "{text}");
}
