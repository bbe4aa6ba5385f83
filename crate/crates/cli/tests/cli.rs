use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn poissonbc(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poissonbc"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("POISSONBC_OUT")
        .output()
        .expect("binary runs")
}

fn json_file(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn classify_reports_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let out = poissonbc(dir.path(), &["classify", "--ay", "1", "--ly", "0.1", "--az", "2", "--lz", "0.1"]);
    assert!(out.status.success());
    let v = json_file(&dir.path().join("verdict.json"));
    assert_eq!(v["more_capable_y_over_z"], false);
    assert_eq!(v["more_capable_z_over_y"], true);

    let out = poissonbc(dir.path(), &["classify", "--ay", "1", "--ly", "0.3", "--az", "1", "--lz", "0.3"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in ["more_capable_y_over_z", "more_capable_z_over_y", "degraded_y_over_z", "degraded_z_over_y"] {
        assert_eq!(v[k], true, "{k}");
    }
}

#[test]
fn invalid_parameters_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["classify", "--ay", "-1"][..],
        &["capacity", "pp", "--lz", "nan"],
        &["codesim", "--alpha", "1.5"],
        &["verify", "identity", "--tau", "0"],
    ] {
        let out = poissonbc(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn noiseless_pp_capacity_is_one_over_e() {
    let dir = tempfile::tempdir().unwrap();
    let out = poissonbc(dir.path(), &["capacity", "pp", "--ay", "1", "--ly", "0"]);
    assert!(out.status.success());
    let v = json_file(&dir.path().join("summary.json"));
    let c = v["y"]["capacity"].as_f64().unwrap();
    assert!((c - (-1.0f64).exp()).abs() < 1e-9, "{c}");

    let out = poissonbc(dir.path(), &["--bits", "capacity", "pp", "--ay", "1", "--ly", "0"]);
    assert!(out.status.success());
    let v = json_file(&dir.path().join("summary.json"));
    assert_eq!(v["units"], "bits");
    let c = v["y"]["capacity"].as_f64().unwrap();
    assert!((c - (-1.0f64).exp() / std::f64::consts::LN_2).abs() < 1e-9);
}

#[test]
fn boundary_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = poissonbc(dir.path(), &["capacity", "bc", "--grid-cells", "30", "--angles", "7"]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_path(dir.path().join("boundary.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["r_y", "r_z_or_r0", "alpha", "p", "q", "support_angle"]);
    let rows: Vec<Vec<f64>> = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(!rows.is_empty());
    for w in rows.windows(2) {
        assert!(w[1][0] >= w[0][0] && w[1][1] <= w[0][1] + 1e-12);
    }
    let manifest = json_file(&dir.path().join("manifest.json"));
    assert_eq!(manifest["config"]["command"], "capacity bc");
    assert_eq!(manifest["config"]["args"]["resolution"]["grid_cells"], 30);
}

#[test]
fn dms_boundary_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = poissonbc(dir.path(), &["capacity", "dms", "--grid-cells", "6", "--angles", "5", "--starts", "2"]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_path(dir.path().join("boundary.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["r_y", "r_z_or_r0", "alpha1", "alpha2", "alpha3", "p1", "p2", "p3", "support_angle"]);
}

#[test]
fn sweep_csv_schema_and_zero_rates() {
    let dir = tempfile::tempdir().unwrap();
    let out = poissonbc(
        dir.path(),
        &["codesim", "--ry", "0", "--rz", "0", "--ns", "10,20", "--tau", "0.5", "--trials", "50"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_path(dir.path().join("sweep.csv")).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "setting", "n", "tau", "R_y", "R_z_or_R_0", "gamma_y", "gamma_z", "trials", "pe_y", "pe_z", "pe_total",
            "ci_lo", "ci_hi", "seed"
        ]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert_eq!(row[10].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn thread_count_does_not_change_outputs() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, t) in dirs.iter().zip(["1", "2", "4"]) {
        let out = poissonbc(
            d.path(),
            &["--threads", t, "codesim", "--ns", "20,40", "--tau", "0.5", "--trials", "60", "--seed", "7"],
        );
        assert!(out.status.success());
        let out = poissonbc(d.path(), &["--threads", t, "verify", "identity", "--n", "8", "--tau", "0.5", "--trials", "200"]);
        assert!(out.status.success());
    }
    for name in ["sweep.csv", "results.json", "report.json", "manifest.json"] {
        let first = std::fs::read(dirs[0].path().join(name)).unwrap();
        for d in &dirs[1..] {
            assert_eq!(first, std::fs::read(d.path().join(name)).unwrap(), "{name}");
        }
    }
}

#[test]
fn manifest_replays_byte_for_byte() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out = poissonbc(a.path(), &["codesim", "--ns", "20", "--tau", "0.5", "--trials", "40", "--seed", "3"]);
    assert!(out.status.success());
    let manifest = a.path().join("manifest.json");
    let out = poissonbc(b.path(), &["--config", manifest.to_str().unwrap(), "codesim"]);
    assert!(out.status.success());
    for name in ["sweep.csv", "results.json", "manifest.json"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap());
    }
    // a config for another command is refused
    let out = poissonbc(b.path(), &["--config", manifest.to_str().unwrap(), "classify"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"args": {"a_y": 1.0, "lambda_y": 0.0}}"#).unwrap();
    let out = poissonbc(dir.path(), &["--config", cfg.to_str().unwrap(), "capacity", "pp", "--ly", "5"]);
    assert!(out.status.success());
    let v = json_file(&dir.path().join("summary.json"));
    assert!((v["y"]["capacity"].as_f64().unwrap() - (-1.0f64).exp()).abs() < 1e-9);
}

#[test]
fn failed_verification_exits_with_3() {
    // z more capable than y: the inequality goes the wrong way
    let dir = tempfile::tempdir().unwrap();
    let out = poissonbc(
        dir.path(),
        &[
            "verify", "mc-inequality", "--ay", "0.2", "--ly", "1", "--az", "3", "--lz", "0.05", "--tau", "1", "--n", "10",
            "--alpha", "0.5", "--p", "0.7", "--q", "0.2", "--trials", "400",
        ],
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
    let report = json_file(&dir.path().join("report.json"));
    assert_eq!(report["pass"], false);
    assert!(dir.path().join("manifest.json").exists());
}
