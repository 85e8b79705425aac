use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const APPENDIX_SWEEP: &str = r#"
experiment = "appendix_rotation"
coefficients = [[0.6, 0.0], [0.8, 0.0]]
thetas = { count = 64, start = 0, end = "2pi" }
checks = ["mixed_record"]
"#;

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn branchsim(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_branchsim"))
        .arg("run")
        .arg(config)
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn appendix_sweep_gives_64_passing_rows() {
    let dir = TempDir::new().unwrap();
    let out = branchsim(&[], &write(&dir, "sweep.toml", APPENDIX_SWEEP));
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let report = json(&out);
    assert_eq!(report["schema_version"], 1);
    let rows: Vec<&Value> = report["points"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|p| p["checks"].as_array().unwrap())
        .collect();
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|c| c["status"] == "pass" && c["name"] == "mixed_record"));
    assert_eq!(report["summary"]["all_passed"], true);
}

#[test]
fn negative_control_fails_mixed_record() {
    let dir = TempDir::new().unwrap();
    let out = branchsim(&["--negative-control"], &write(&dir, "sweep.toml", APPENDIX_SWEEP));
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert!(report["summary"]["failed"].as_u64().unwrap() > 0);
    assert!(stderr(&out).contains("mixed_record failed"));
}

#[test]
fn text_report_has_branch_table() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "sg.toml", "experiment = \"stern_gerlach\"\ncoefficients = [[0.6, 0], [0.8, 0]]\n");
    let out = branchsim(&["--format", "text"], &config);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let header = lines.iter().position(|l| l.split_whitespace().collect::<Vec<_>>() == ["label", "weight", "message"]);
    let header = header.expect("branch table header");
    assert!(lines[header + 1].contains("I see only classical state 1"));
    assert!(lines[header + 2].contains("0.640000000000"));
    // the message column starts at the same offset on every row
    let column = lines[header].find("message").unwrap();
    assert_eq!(lines[header + 1].find("I see").unwrap(), column);
}

#[test]
fn chain_run_reports_every_check() {
    let dir = TempDir::new().unwrap();
    let config = write(
        &dir,
        "gen.toml",
        "experiment = \"generalized\"\nn_versions = 3\nobservers = 2\nphoton_model = true\nrandom_draws = 2\nseed = 5\n",
    );
    let out = branchsim(&[], &config);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = json(&out);
    let names: Vec<&str> = report["points"][1]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, branchsim_core::experiments::check_names::CHAIN);
    assert_eq!(report["layout"].as_array().unwrap().len(), 1 + 3 + 3 + 2);
}

#[test]
fn check_filter_and_out_flag() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "sg.toml", "experiment = \"stern_gerlach\"\ncoefficients = [[0.6, 0], [0.8, 0]]\n");
    let target = dir.path().join("report.json");
    let out = branchsim(
        &["--check", "no_signaling", "--check", "born_weights", "--out", target.to_str().unwrap()],
        &config,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    let names: Vec<&str> = report["points"][0]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["born_weights", "no_signaling"]);
}

#[test]
fn config_errors_exit_2_with_key_and_line() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "bad.toml", "experiment = \"stern_gerlach\"\ncoefficients = [[0.6, 0], [0.9, 0]]\n");
    let out = branchsim(&[], &config);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 2") && err.contains("`coefficients`"), "{err}");

    let config = write(&dir, "unknown.toml", "experiment = \"stern_gerlach\"\nshots = 10\n");
    let out = branchsim(&[], &config);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`shots`"));

    let config = write(&dir, "ok.toml", "experiment = \"stern_gerlach\"\n");
    assert_eq!(branchsim(&["--check", "primed_evolution"], &config).status.code(), Some(2));
    assert_eq!(branchsim(&["--tolerance", "-1"], &config).status.code(), Some(2));
    assert_eq!(branchsim(&["--format", "xml"], &config).status.code(), Some(2));
    assert_eq!(branchsim(&[], &dir.path().join("missing.toml")).status.code(), Some(2));
}

#[test]
fn capacity_error_exits_3() {
    let dir = TempDir::new().unwrap();
    // 8 * 2^8 * 10^4 basis states, above the 2^24 cap
    let config = write(&dir, "big.toml", "experiment = \"generalized\"\nn_versions = 8\nobservers = 4\n");
    let out = branchsim(&[], &config);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("too large"));
}

#[test]
fn seed_controls_random_draws() {
    let dir = TempDir::new().unwrap();
    let config = write(&dir, "rand.toml", "experiment = \"stern_gerlach\"\nrandom_draws = 3\nseed = 1\n");
    let coefficients = |args: &[&str]| json(&branchsim(args, &config))["points"][2]["coefficients"].clone();
    assert_eq!(coefficients(&[]), coefficients(&["--seed", "1"]));
    assert_ne!(coefficients(&[]), coefficients(&["--seed", "2"]));
}

#[test]
fn shipped_configs_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let out = branchsim(&[], &path);
        assert_eq!(out.status.code(), Some(0), "{}: {}", path.display(), stderr(&out));
    }
}
