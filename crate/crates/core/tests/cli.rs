use std::fs;
use std::path::PathBuf;
use std::process::Command;

fn dhl() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dhl"))
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("dhl-it-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    d
}

#[test]
fn ly_zeros_writes_roots_and_report() {
    let out = scratch("ly");
    let st = dhl()
        .args(["ly-zeros", "--t", "0.5", "--n", "3", "--seed", "7", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let csv = fs::read_to_string(out.join("ly-zeros.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "re,re_hex,im,im_hex,modulus_dev,modulus_dev_hex,residual,residual_hex"
    );
    assert_eq!(lines.count(), 128);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("ly-zeros.json")).unwrap()).unwrap();
    assert!(report["maxCircleDeviation"].as_f64().unwrap() < 1e-6);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("ly-zeros.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    assert!(meta["gitDescribe"].is_string());
    assert!(meta["wallSeconds"].as_f64().unwrap() >= 0.0);
    fs::remove_dir_all(out).unwrap();
}

#[test]
fn julia1d_writes_a_pgm() {
    let out = scratch("j1");
    let st = dhl()
        .args(["julia1d", "--rect", "-2,2,-2,2", "--res", "64", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let pgm = fs::read(out.join("julia1d.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n64 64\n255\n"));
    assert_eq!(pgm.len(), 13 + 64 * 64);
    fs::remove_dir_all(out).unwrap();
}

#[test]
fn argument_errors_exit_with_two() {
    let out = scratch("args");
    let code = |args: &[&str]| dhl().args(args).arg("--out").arg(&out).status().unwrap().code();
    assert_eq!(code(&["bogus"]), Some(2));
    assert_eq!(code(&["herm-decay", "--samples", "10"]), Some(2));
    assert_eq!(code(&["julia1d", "--rect", "1,2"]), Some(2));
    assert_eq!(code(&["herm-decay", "--samples", "10", "--seed", "1", "--form", "0,1,1"]), Some(2));
    let _ = fs::remove_dir_all(out);
}

#[test]
fn numeric_failures_exit_with_one() {
    let out = scratch("num");
    let o = dhl()
        .args(["slice-zeros", "--slice", "line=1,0,0/2,0,0", "--seed", "1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("slice_zeros"));
    let _ = fs::remove_dir_all(out);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs = [scratch("rep-a"), scratch("rep-b")];
    for dir in &runs {
        let st = dhl()
            .args(["mme", "--samples", "3000", "--burn-in", "20", "--chains", "3", "--seed", "99", "--out"])
            .arg(dir)
            .status()
            .unwrap();
        assert!(st.success());
    }
    for f in ["mme.csv", "mme.json"] {
        assert_eq!(fs::read(runs[0].join(f)).unwrap(), fs::read(runs[1].join(f)).unwrap(), "{f}");
    }
    for d in runs {
        fs::remove_dir_all(d).unwrap();
    }
}

#[test]
fn report_quick_emits_json() {
    let out = scratch("report");
    let o = dhl().args(["report", "--quick", "--out"]).arg(&out).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["criteria"].as_array().unwrap().len(), 14);
    assert_eq!(v["passed"], true);
    fs::remove_dir_all(out).unwrap();
}
