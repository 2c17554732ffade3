use std::path::Path;
use std::process::Output;

use crate::run_cli;

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// `value` column of the row whose first field is `bound`.
fn value_of(csv: &str, bound: &str) -> f64 {
    csv.lines()
        .find(|l| l.split(',').next() == Some(bound))
        .unwrap_or_else(|| panic!("no {bound} row in\n{csv}"))
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let k = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn exact_linear_on_two_points() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write(tmp.path(), "two.csv", "f0,f1\n1,0\n0,1\n");
    let o = run_cli(&["radbound", "linear", "--data", &data, "--exact"]);
    assert!(o.status.success());
    assert!((value_of(&stdout(&o), "rademacher_exact") - 0.5f64.sqrt()).abs() < 1e-12);
    let manifest: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(manifest["command"], "radbound linear");
    assert!(manifest["seed"].is_null());
}

#[test]
fn gap_closed_form() {
    let o = run_cli(&[
        "radbound",
        "gap",
        "--rad",
        "0",
        "--delta",
        "0.3678794",
        "--n",
        "2",
        "--variant",
        "expected",
    ]);
    assert!(o.status.success());
    assert!((value_of(&stdout(&o), "gap_expected") - 0.5).abs() < 1e-6);
}

#[test]
fn unit_weight_has_no_reduction() {
    let o = run_cli(&["radbound", "linear", "--gen-n", "40", "--gen-d", "3", "--lam", "1", "--seed", "9"]);
    assert!(o.status.success());
    assert_eq!(value_of(&stdout(&o), "linear_reduction"), 0.0);
}

#[test]
fn bregman_examples() {
    let args = [
        "bregman",
        "--family",
        "gaussian_unit_var",
        "--theta",
        "0",
        "--lam",
        "0.5",
        "--draws",
        "100000",
        "--seed",
        "1",
    ];
    let out = stdout(&run_cli(&args));
    let (ratio, se, hess) =
        (column(&out, "ratio")[0], column(&out, "std_err")[0], column(&out, "hess_original")[0]);
    assert!((ratio - 0.25).abs() <= 5.0 * se / hess);

    let out = stdout(&run_cli(&[
        "bregman", "--family", "poisson", "--theta", "-0.5", "--lam", "0", "--draws", "1000", "--seed", "2",
    ]));
    assert_eq!(column(&out, "hess_mixed_mc")[0], 0.0);

    let out = stdout(&run_cli(&[
        "bregman",
        "--family",
        "bernoulli",
        "--theta",
        "0",
        "--lam",
        "0.3",
        "--draws",
        "1000",
        "--seed",
        "3",
    ]));
    assert_eq!(column(&out, "hess_original")[0], 0.25);
    assert!(column(&out, "fd_hess_err")[0] < 1e-6);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run_cli(args).status.code().unwrap();
    assert_eq!(code(&["radbound", "linear", "--gen-n", "10"]), 2, "missing seed");
    assert_eq!(code(&["radbound", "linear", "--gen-n", "10", "--draws", "100"]), 2);
    assert_eq!(code(&["radbound", "linear", "--gen-n", "25", "--exact", "--seed", "1"]), 2, "n > 20");
    assert_eq!(code(&["radbound", "linear", "--gen-n", "5", "--lam", "1.5", "--seed", "1"]), 2);
    assert_eq!(
        code(&[
            "radbound", "nn", "--gen-n", "5", "--depth", "2", "--frob", "1", "--lam", "0.5", "--center",
            "1,2", "--seed", "1"
        ]),
        2
    );
    assert_eq!(code(&["radbound", "gap", "--rad", "0", "--n", "5", "--delta", "1.5"]), 2);
    assert_eq!(
        code(&[
            "bregman", "--family", "gamma", "--theta", "0", "--lam", "0", "--draws", "500", "--seed", "1"
        ]),
        2
    );
    assert_eq!(code(&["radbound", "linear", "--data", "/nonexistent/x.csv"]), 3);
    assert_eq!(code(&["sweep", "fig1", "--config", "/nonexistent/c.json"]), 3);
    assert_eq!(code(&["radbound", "linear"]), 2, "no data source");
    assert_eq!(code(&["--jobs", "0", "radbound", "gap", "--rad", "0", "--n", "5", "--delta", "0.5"]), 2);

    let bad = write(tmp.path(), "bad.csv", "f0,f1\n1,x\n");
    assert_eq!(code(&["radbound", "linear", "--data", &bad]), 2);
}

#[test]
fn malformed_config_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"grid": {"n_values": [10], "sigma2_values": [1], "repeatz": 3}, "lam": 0.5, "seed": 1}"#,
    );
    let o = run_cli(&["sweep", "fig1", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("repeatz"));

    let cfg =
        write(tmp.path(), "d.json", r#"{"grid": {"n_values": [10], "sigma2_values": [1]}, "lam": 0.5}"#);
    let o = run_cli(&["sweep", "fig1", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn degenerate_fig1_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"grid": {"n_values": [30], "sigma2_values": [1e-12], "repeats": 5, "mc_draws": 0}, "lam": 0.5, "seed": 1}"#,
    );
    let out = stdout(&run_cli(&["sweep", "fig1", "--config", &cfg]));
    assert!(column(&out, "bound_diff_mean")[0].abs() < 1e-6);
}

#[test]
fn fig2_column_doubles_with_eps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"grid": {"n_values": [40], "eps_values": [0.75, 1.5]}, "depth": 2, "frob": 1, "lam": 0.5, "seed": 2}"#,
    );
    let red = column(&stdout(&run_cli(&["sweep", "fig2", "--config", &cfg])), "nn_reduction");
    assert_eq!(red[1], 2.0 * red[0]);
}

#[test]
fn rerun_writes_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"alphas": [0.5, 1], "n_seeds": 2, "epochs": 30, "seed": 8}"#);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for out in [&a, &b] {
        assert!(run_cli(&["sweep", "gap-alpha", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .success());
    }
    for name in ["results.csv", "summary.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["artifact_paths"], serde_json::json!(["results.csv", "summary.csv"]));
    assert_eq!(manifest["resolved_config"]["n_seeds"], 2);
    assert_eq!(manifest["resolved_config"]["model"]["hidden_width"], 64);
}

#[test]
fn divergent_training_exits_numerical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"data": {"separation": 1e150}, "alphas": [1], "n_seeds": 1, "model": {"kind": "logistic"}, "epochs": 5, "learning_rate": 1e10, "seed": 1}"#,
    );
    let out = tmp.path().join("o");
    let o = run_cli(&["sweep", "gap-alpha", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(out.join("summary.csv").exists());
}
