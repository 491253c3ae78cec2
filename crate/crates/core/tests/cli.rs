use std::path::PathBuf;
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fredholm-colloc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn text_cell(table: &str, n: usize, column: usize) -> String {
    table
        .lines()
        .find(|l| l.split_whitespace().next() == Some(&n.to_string()))
        .and_then(|l| {
            l.split_whitespace()
                .filter(|tok| *tok != "|")
                .nth(column)
                .map(str::to_string)
        })
        .unwrap_or_else(|| panic!("row {n} missing in\n{table}"))
}

#[test]
fn reference_values() {
    let o = bin(&["reference", "--kernel", "exp_st"]);
    assert!(o.status.success());
    let first = stdout(&o).lines().next().unwrap().to_string();
    let lambda: f64 = first.parse().unwrap();
    assert!((lambda - 1.3530301647457353).abs() < 1e-14, "{first}");

    let o = bin(&["reference", "--kernel", "cos_pi"]);
    assert_eq!(stdout(&o).lines().next(), Some("0.5000000000000000"));

    let o = bin(&["reference", "--kernel", "const_one", "--N", "64"]);
    let lambda: f64 = stdout(&o).lines().next().unwrap().parse().unwrap();
    assert!((lambda - 1.0).abs() < 1e-14);
}

#[test]
fn reference_errors_exit_nonzero() {
    let o = bin(&["reference", "--kernel", "s+*t"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("offset 2"), "{}", stderr(&o));

    let o = bin(&["reference", "--kernel", "exp_st", "--N", "8"]);
    assert!(!o.status.success());
}

#[test]
fn example_two_text_table() {
    let o = bin(&[
        "study",
        "--config",
        bundled("example2.toml").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = stdout(&o);
    // Eigenvalue block columns: n, C err, δ_C, MC err, δ_MC.
    assert_eq!(text_cell(&table, 16, 3), "1.29e-06");
    assert_eq!(text_cell(&table, 2, 1), "4.98e-02");
}

#[test]
fn example_one_runs_and_is_deterministic() {
    let config = bundled("example1.toml");
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = bin(&[
            "study",
            "--config",
            config.to_str().unwrap(),
            "--format",
            "csv",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let csv = String::from_utf8(first).unwrap();
    assert!(csv.starts_with("n,collocation_eig_err,collocation_eig_order,"));
    assert_eq!(csv.lines().count(), 8);
}

#[test]
fn json_output_carries_metadata() {
    let o = bin(&[
        "study",
        "--config",
        bundled("example2.toml").to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["metadata"]["reference_points"], 128);
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn non_doubling_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "r = 0\nn_list = [2, 3]\nmethods = [\"collocation\"]\n[kernel]\nbuiltin = \"exp_st\"\n",
    )
    .unwrap();
    let o = bin(&["study", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("n_list must double"), "{}", stderr(&o));
}

#[test]
fn missing_config_is_an_io_error() {
    let o = bin(&["study", "--config", "/nonexistent/study.toml"]);
    assert!(!o.status.success());
}

#[test]
fn props_pass_on_example_kernels() {
    for kernel in ["exp_st", "cos_pi"] {
        let o = bin(&["props", "--kernel", kernel, "--n", "8,16,32,64"]);
        assert!(o.status.success(), "{kernel}: {}", stdout(&o));
    }
}

#[test]
fn props_on_reproduced_polynomial() {
    let o = bin(&[
        "props",
        "--kernel",
        "exp_st",
        "--r",
        "1",
        "--x",
        "1 + t - 2*t^2",
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
}
