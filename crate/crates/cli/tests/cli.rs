use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn qbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbound"))
        .args(args)
        .output()
        .expect("run qbound")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

#[test]
fn zero_dimension_is_bad_input() {
    let out = qbound(&["verify", "--dims", "2,0,1,1"]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn malformed_dims_are_bad_input() {
    for dims in ["2,2,1", "a,b,c,d", "2,2,1,1,1"] {
        assert_eq!(code(&qbound(&["verify", "--dims", dims])), 2, "{dims}");
    }
}

#[test]
fn zero_trials_is_an_empty_success() {
    let out = qbound(&["verify", "--dims", "2,2,1,1", "--trials", "0"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["trials"], 0);
    assert_eq!(v["violations"], 0);
    assert!(v["worst_case"].is_null());
}

#[test]
fn verify_json_and_csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("summary.json");
    let csv_path = dir.path().join("rows.csv");
    let out = qbound(&[
        "verify",
        "--dims",
        "2,2,1,1",
        "--trials",
        "200",
        "--seed",
        "7",
        "--out",
        json.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["trials"], 200);
    assert_eq!(v["violations"], 0);
    assert_eq!(v["integrity_failures"], 0);
    for key in ["max_power_sq", "min_slack", "mean_saturation_ratio"] {
        assert!(v[key].is_number(), "{key}");
    }
    let report = &v["worst_case"]["report"];
    for key in [
        "power",
        "power_sq",
        "term_fv",
        "term_vf",
        "term_cross",
        "corrected_bound",
        "loose_bound",
        "slack",
        "saturation_ratio",
    ] {
        assert!(report[key].is_number(), "{key}");
    }
    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("summary.json.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["subcommand"], "verify");
    assert_eq!(manifest["master_seed"], 7);

    let (header, rows) = read_csv(&csv_path);
    assert_eq!(header[0], "trial");
    assert_eq!(rows.len(), 200);
    let holds = col(&header, "bound_holds");
    assert!(rows.iter().all(|r| r[holds] == "true"));
}

#[test]
fn unknown_ensemble_is_bad_input() {
    let out = qbound(&["verify", "--dims", "2,2,1,1", "--ensemble", "wishart"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_is_seed_deterministic() {
    let args = [
        "verify", "--dims", "2,2,1,1", "--trials", "100", "--seed", "3", "--format", "csv",
    ];
    let a = qbound(&args);
    let b = qbound(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = qbound(&[
        "verify", "--dims", "2,2,1,1", "--trials", "100", "--seed", "4", "--format", "csv",
    ]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn evolve_exchange_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("traj.csv");
    let out = qbound(&[
        "evolve",
        "--config",
        scenario("exchange.json").to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = read_csv(&out_path);
    assert_eq!(
        header,
        [
            "t",
            "power",
            "power_sq",
            "corrected_bound",
            "loose_bound",
            "slack",
            "saturation_ratio",
            "mean_F",
            "battery_purity",
            "dFdt_fd"
        ]
    );
    assert_eq!(rows.len(), 1001);
    let num = |r: &Vec<String>, c: &str| -> f64 { r[col(&header, c)].parse().unwrap() };

    assert!(num(&rows[0], "power").abs() <= 1e-12);
    assert_eq!(rows[0][col(&header, "dFdt_fd")], "");
    assert_eq!(rows[1000][col(&header, "dFdt_fd")], "");

    let (argmax, pmax) = rows
        .iter()
        .enumerate()
        .map(|(k, r)| (k, num(r, "power").abs()))
        .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    assert!((pmax - 2.0).abs() <= 1e-6, "max power {pmax}");
    let t = num(&rows[argmax], "t");
    assert!(
        (t - std::f64::consts::FRAC_PI_4).abs() <= 1e-9
            || (t - 3.0 * std::f64::consts::FRAC_PI_4).abs() <= 1e-9
    );

    let min_purity = rows
        .iter()
        .map(|r| num(r, "battery_purity"))
        .fold(f64::INFINITY, f64::min);
    assert!((min_purity - 0.5).abs() <= 1e-6);
    for r in &rows {
        assert!(num(r, "slack") >= -1e-9 * (1.0 + num(r, "corrected_bound")));
    }

    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("traj.csv.manifest.json")).unwrap(),
    )
    .unwrap();
    let digests = manifest["input_digests"].as_object().unwrap();
    assert_eq!(digests.len(), 1);
    assert_eq!(digests.values().next().unwrap().as_str().unwrap().len(), 64);
}

#[test]
fn evolve_zero_interaction_has_no_power() {
    let out = qbound(&[
        "evolve",
        "--config",
        scenario("zero.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let power = r
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == "power")
        .unwrap();
    let mut n = 0;
    for rec in r.records() {
        let p: f64 = rec.unwrap()[power].parse().unwrap();
        assert_eq!(p, 0.0);
        n += 1;
    }
    assert_eq!(n, 101);
}

#[test]
fn evolve_json_format() {
    let out = qbound(&[
        "evolve",
        "--config",
        scenario("zero.json").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["records"].as_array().unwrap().len(), 101);
}

#[test]
fn malformed_scenarios_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(scenario("exchange.json")).unwrap();
    let cases = [
        (base.replace("exchange(1)", "swap(1)"), "`v`"),
        (base.replace("ground-excited", "thermal"), "`rho0`"),
        (base.replace("\"steps\": 1000", "\"steps\": 1"), "`grid`"),
        (base.replace("[2, 2, 1, 1]", "[2, 0, 1, 1]"), "`structure`"),
        ("{ not json".to_string(), "scenario"),
    ];
    for (k, (text, field)) in cases.iter().enumerate() {
        let path = dir.path().join(format!("bad{k}.json"));
        std::fs::write(&path, text).unwrap();
        let out = qbound(&["evolve", "--config", path.to_str().unwrap()]);
        assert_eq!(code(&out), 2, "case {k}");
        assert!(stderr(&out).contains(field), "case {k}: {}", stderr(&out));
    }
    let missing = qbound(&["evolve", "--config", "/nonexistent/scenario.json"]);
    assert_eq!(code(&missing), 2);
}

#[test]
fn search_zero_power_on_a_qubit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("found.json");
    let out = qbound(&[
        "search",
        "--mode",
        "zero-power",
        "--dims",
        "2,1,1,1",
        "--min-var-f",
        "0.5",
        "--min-abs-cov",
        "0.5",
        "--max-abs-power",
        "1e-8",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&path).unwrap();
    let record: qbattery::search::SearchRecord = serde_json::from_str(&text).unwrap();
    assert!(record.succeeded);
    let e = record.recheck().unwrap();
    assert!(e.report.power.abs() <= 1e-8);
    assert!(e.moments.var_f >= 0.5 && e.moments.cov.norm() >= 0.5);
}

#[test]
fn search_saturation_on_a_qubit() {
    let out = qbound(&["search", "--mode", "saturation", "--dims", "2,1,1,1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["report"]["saturation_ratio"].as_f64().unwrap() >= 0.999);
}

#[test]
fn search_bad_inputs() {
    let zero_budget = qbound(&[
        "search",
        "--mode",
        "zero-power",
        "--dims",
        "2,1,1,1",
        "--budget",
        "0",
    ]);
    assert_eq!(code(&zero_budget), 2);
    let infeasible = qbound(&[
        "search",
        "--mode",
        "zero-power",
        "--dims",
        "2,1,1,1",
        "--min-var-f",
        "2",
    ]);
    assert_eq!(code(&infeasible), 2);
    let csv = qbound(&[
        "search",
        "--mode",
        "saturation",
        "--dims",
        "2,1,1,1",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&csv), 2);
    let mode = qbound(&["search", "--mode", "fastest", "--dims", "2,1,1,1"]);
    assert_eq!(code(&mode), 2);
}

#[test]
fn search_unsuccessful_exits_one() {
    let out = qbound(&[
        "search",
        "--mode",
        "zero-power",
        "--dims",
        "2,2,1,1",
        "--require-entangled",
        "--min-var-f",
        "0.9",
        "--min-abs-cov",
        "0.9",
        "--budget",
        "8",
        "--restarts",
        "1",
    ]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn demo_cases() {
    for case in ["eigenstate", "saturating", "real-cov"] {
        let out = qbound(&["demo", "--case", case]);
        assert_eq!(code(&out), 0, "{case}: {}", stderr(&out));
        assert!(!stderr(&out).contains("FAIL"));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(v["report"]["corrected_bound"].is_number());
    }
    let sat: Value =
        serde_json::from_slice(&qbound(&["demo", "--case", "saturating"]).stdout).unwrap();
    assert!((sat["report"]["power"].as_f64().unwrap() - 2.0).abs() <= 1e-9);
    assert!((sat["report"]["saturation_ratio"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
}

#[test]
fn demo_csv_and_unknown_case() {
    let out = qbound(&["demo", "--case", "saturating", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("power,power_sq,term_fv,term_vf,term_cross,corrected_bound"));
    assert_eq!(code(&qbound(&["demo", "--case", "bogus"])), 2);
}

#[test]
fn missing_subcommand_is_bad_input() {
    assert_eq!(code(&qbound(&[])), 2);
}
