use std::process::{Command, Output};

fn tfimw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfimw"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

fn fit_field(csv: &str, key: &str) -> f64 {
    let line = csv.lines().rev().find(|l| l.starts_with("# fit")).unwrap();
    line.split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn plateau_distance() {
    let out = stdout(&tfimw(&[
        "--no-cache",
        "distance",
        "--g-rho",
        "0",
        "--g-sigma",
        "2",
        "--L",
        "500",
    ]));
    let d = column(&out, "d_squared_over_l2")[0];
    assert!((d - 0.5).abs() < 0.005, "{d}");
}

#[test]
fn fully_ordered_qfi_is_zero() {
    let out = stdout(&tfimw(&["--no-cache", "qfi", "--g", "0", "--L", "10"]));
    assert_eq!(column(&out, "qfi"), vec![0.0]);
}

#[test]
fn flag_errors_exit_two() {
    assert_eq!(
        tfimw(&["qfi", "--g", "x", "--L", "10"]).status.code(),
        Some(2)
    );
    assert_eq!(
        tfimw(&["oracle", "--g", "1", "--L", "15"]).status.code(),
        Some(2)
    );
    assert_eq!(
        tfimw(&["--no-cache", "fit", "--mode", "d2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        tfimw(&["--parallelism", "0", "qfi", "--g", "1", "--L", "10"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn numerical_failure_exits_three() {
    // no g_sigma in the window satisfies xi < L/10 on such a short ring
    let out = tfimw(&["--no-cache", "fit", "--mode", "subleading", "--L", "20"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("window"));
}

#[test]
fn output_independent_of_parallelism() {
    let args = |p: &'static str| {
        vec![
            "--no-cache",
            "--parallelism",
            p,
            "reproduce",
            "fig2a",
            "--sizes",
            "20,40,80",
            "--points",
            "9",
        ]
    };
    for format in ["csv", "json"] {
        let mut a = args("1");
        a.extend(["--format", format]);
        let mut b = args("8");
        b.extend(["--format", format]);
        assert_eq!(stdout(&tfimw(&a)), stdout(&tfimw(&b)));
    }
}

#[test]
fn cache_reuse_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let run = || {
        stdout(&tfimw(&[
            "--cache-dir",
            d,
            "correlator",
            "--g",
            "0.7",
            "--n-max",
            "40",
        ]))
    };
    let first = run();
    assert!(std::fs::read_dir(dir.path()).unwrap().count() >= 1);
    assert_eq!(first, run());
    let direct = stdout(&tfimw(&[
        "--no-cache",
        "correlator",
        "--g",
        "0.7",
        "--n-max",
        "40",
    ]));
    assert_eq!(first, direct);
}

#[test]
fn cache_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tfimw"))
        .args(["observables", "--g", "1.3", "--L", "30"])
        .env("WCACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn json_mirrors_csv() {
    let base = [
        "--no-cache",
        "fit",
        "--mode",
        "qfi",
        "--sizes",
        "20,40,80,160",
    ];
    let csv = stdout(&tfimw(&base));
    let mut with_json = base.to_vec();
    with_json.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&tfimw(&with_json))).unwrap();
    let ys = column(&csv, "y");
    let rows = json["rows"].as_array().unwrap();
    assert_eq!(rows.len(), ys.len());
    for (row, y) in rows.iter().zip(&ys) {
        assert_eq!(row["y"].as_f64().unwrap().to_bits(), y.to_bits());
    }
    assert_eq!(
        json["fit"][0]["exponent"].as_f64().unwrap(),
        fit_field(&csv, "exponent")
    );
    let keys: Vec<&String> = json.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["fit", "rows"]);
}

#[test]
fn oracle_emits_decaying_correlators() {
    let out = stdout(&tfimw(&["oracle", "--g", "2", "--L", "10"]));
    let c = column(&out, "c_ed");
    assert_eq!(c.len(), 5);
    assert!(c.windows(2).all(|w| w[0] > w[1]));
    assert!(out
        .lines()
        .last()
        .unwrap()
        .starts_with("# ground boundary=periodic"));
}

#[test]
fn subleading_figure_exponent() {
    let out = stdout(&tfimw(&["--no-cache", "reproduce", "fig3a", "--L", "700"]));
    let p = fit_field(&out, "exponent");
    assert!((-0.78..=-0.71).contains(&p), "{p}");
}
