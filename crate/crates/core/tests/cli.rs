use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rilab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rilab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn no_arguments_prints_usage_and_fails() {
    let out = Command::new(env!("CARGO_BIN_EXE_rilab")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr) + String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("Usage"), "{text}");
}

#[test]
fn validate_harmonic_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = rilab(&["validate", "--model", "harmonic"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
    assert_eq!(summary["subcommand"], "validate");
    for key in ["version", "config_hash", "master_seed", "wall_clock_seconds", "effective_config"] {
        assert!(summary.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn converge_writes_one_row_per_step_and_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["converge", "--model", "charged", "--tau", "1", "--h", "2^-4..2^-9", "--paths", "2000"];
    let out = rilab(&[&args[..], &["--p", "2,4", "--seed", "42", "--plot"]].concat(), dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("h,p,error,ci_low,ci_high,n_paths,n_blowups"));
    assert_eq!(lines.count(), 12);
    let plot = fs::read_to_string(dir.path().join("plot.gp")).unwrap();
    assert!(plot.contains("results.csv"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["master_seed"], 42);
    assert!(summary["checks"].as_array().unwrap().iter().all(|c| c.get("threshold").is_some()));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# strong error\nmodel = charged\ntau = 1.0\n[converge]\npaths = 100\nh_list = 2^-3..2^-5\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = rilab(&["converge", "--config", cfg.to_str().unwrap(), "--tau", "0.5"], &out_dir);
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let effective = &summary["effective_config"];
    assert_eq!(effective["tau"], "0.5");
    assert_eq!(effective["paths"], "100");
}

#[test]
fn config_errors_name_line_and_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "tau = 1\nbogus = 3\n").unwrap();
    let out = rilab(&["converge", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("bogus"), "{err}");

    fs::write(&cfg, "h_list = 2^-4,2^-5\noracle_step = 2^-6\n").unwrap();
    let out = rilab(&["converge", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("oracle_step"));
}

#[test]
fn inapplicable_flag_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = rilab(&["flow-demo", "--paths", "10"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_check_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = rilab(
        &["converge", "--h", "2^-3..2^-5", "--paths", "100", "--slope-min", "0.9", "--slope-max", "1.0"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
