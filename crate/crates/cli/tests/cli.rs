use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nlmetro_cli::ScenarioConfig;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlmetro"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn nlmetro")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

/// Runs with `--out dir/stem.csv` and returns (csv, parsed json, exit code).
fn run_to(dir: &Path, stem: &str, args: &[&str]) -> (String, Value, i32) {
    let csv = dir.join(format!("{stem}.csv"));
    let mut all: Vec<&str> = args.to_vec();
    let csv_str = csv.to_str().unwrap().to_string();
    all.extend(["--out", &csv_str]);
    let o = run(&all);
    let text =
        std::fs::read_to_string(&csv).unwrap_or_else(|_| panic!("no csv; stderr: {}", stderr(&o)));
    let json = std::fs::read_to_string(csv.with_extension("json")).unwrap();
    (text, serde_json::from_str(&json).unwrap(), code(&o))
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header
        .iter()
        .position(|h| *h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    lines
        .map(|l| l.split(',').nth(i).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = run(&["qfi"]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    let o = run(&["sweep", "--config", "/definitely/not/here.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("not/here.json"));
}

#[test]
fn unknown_flags_and_keys_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["sweep", "--bogus"])), 2);
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"n_sites": 3, "x1": 1, "x2": 0.1, "colour": "red"}"#,
    );
    let o = run(&["qfi", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
}

#[test]
fn validation_names_the_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "short.json",
        r#"{"n_range": [4, 5, 6], "hamiltonian": {"kind": "spin_chain_uniform", "k": 1},
            "lindblad": {"kind": "uncorrelated_p_body", "p": 1}, "probe": {"kind": "ghz"}, "x1": 1, "x2": 0.1}"#,
    );
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`n_range`"), "{}", stderr(&o));

    let cfg = write_config(
        dir.path(),
        "neg.json",
        r#"{"two_level": {"eps": 1, "lambda_sq": 1}, "x1": 1, "x2": -0.5}"#,
    );
    let o = run(&["qfi", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("`x2`"), "{}", stderr(&o));
}

#[test]
fn bundled_configs_round_trip() {
    let mut seen = 0;
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            let cfg = ScenarioConfig::load(&path).unwrap();
            let text = serde_json::to_string(&cfg).unwrap();
            let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cfg, "{}", path.display());
            seen += 1;
        }
    }
    assert!(seen >= 5);
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = configs().join("ghz_sweep.json");
    let sweep = sweep.to_str().unwrap();
    let qfi = configs().join("dense_qfi.json");
    let qfi = qfi.to_str().unwrap();
    for (cmd, cfg) in [("sweep", sweep), ("qfi", qfi)] {
        let a = run_to(
            dir.path(),
            &format!("{cmd}_a"),
            &[cmd, "--config", cfg, "--threads", "1", "--seed", "abc"],
        );
        let b = run_to(
            dir.path(),
            &format!("{cmd}_b"),
            &[cmd, "--config", cfg, "--threads", "3", "--seed", "abc"],
        );
        assert_eq!(a.0, b.0, "{cmd} csv");
        assert_eq!(a.1, b.1, "{cmd} json");
        let ja = std::fs::read(dir.path().join(format!("{cmd}_a.json"))).unwrap();
        let jb = std::fs::read(dir.path().join(format!("{cmd}_b.json"))).unwrap();
        assert_eq!(ja, jb, "{cmd} json bytes");
    }
}

#[test]
fn injected_fault_is_reported_as_a_violation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("verify_fault.json");
    let (csv, json, exit) = run_to(
        dir.path(),
        "fault",
        &["verify", "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(exit, 1);
    assert_eq!(json["passed"], false);
    let failed: Vec<&Value> = json["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["passed"] == false)
        .collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["suite"], "bound_sandwich");
    assert!(csv
        .lines()
        .any(|l| l.starts_with("bound_sandwich,") && l.contains(",false,")));
}

#[test]
fn verify_passes_on_the_default_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "v.json",
        r#"{"corpus": "default", "spectrum": false}"#,
    );
    let (_, json, exit) = run_to(
        dir.path(),
        "verify",
        &[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "0x1234",
        ],
    );
    assert_eq!(exit, 0, "{json}");
    assert_eq!(json["checks"], 37);
    assert_eq!(json["seed"], "0x1234");
}

#[test]
fn slope_assertions_set_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let ghz = configs().join("ghz_sweep.json");
    let ghz = ghz.to_str().unwrap();
    let (_, json, exit) = run_to(
        dir.path(),
        "pass",
        &["sweep", "--config", ghz, "--assert-slope", "-1.5:0.05"],
    );
    assert_eq!(exit, 0);
    assert_eq!(json["assertion"]["passed"], true);
    let (_, json, exit) = run_to(
        dir.path(),
        "fail",
        &["sweep", "--config", ghz, "--assert-slope", "-1.0:0.05"],
    );
    assert_eq!(exit, 1);
    assert_eq!(json["assertion"]["passed"], false);
    // δx2 is shot-noise limited for p = 1.
    let (_, _, exit) = run_to(
        dir.path(),
        "x2",
        &[
            "sweep",
            "--config",
            ghz,
            "--assert-slope",
            "-0.5:0.05",
            "--slope-param",
            "x2",
        ],
    );
    assert_eq!(exit, 0);

    let ising = configs().join("ising_sweep.json");
    let (csv, json, exit) = run_to(
        dir.path(),
        "ising",
        &[
            "ising",
            "--config",
            ising.to_str().unwrap(),
            "--assert-slope",
            "-1.0:0.07",
        ],
    );
    assert_eq!(exit, 0, "{json}");
    assert_eq!(json["argmax_is_half_chain"], true);
    let n = column(&csv, "n");
    let q = column(&csv, "argmax_q");
    assert!(n.iter().zip(&q).all(|(n, q)| *q == (n / 2.0).floor()));
}

#[test]
fn shot_noise_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "k1.json",
        r#"{"n_range": [20, 40, 60, 100, 150, 200], "hamiltonian": {"kind": "spin_chain_uniform", "k": 1},
            "lindblad": {"kind": "uncorrelated_p_body", "p": 1}, "probe": {"kind": "ghz"}, "x1": 1, "x2": 0.1}"#,
    );
    let (csv, json, exit) = run_to(
        dir.path(),
        "k1",
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--assert-slope",
            "-0.5:0.05",
        ],
    );
    assert_eq!(exit, 0, "{json}");
    assert!(csv.lines().skip(1).all(|l| l.contains(",ghz_closed_form,")));
}

#[test]
fn two_level_rows_follow_the_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("two_level.json");
    let (csv, json, exit) = run_to(
        dir.path(),
        "tl",
        &["qfi", "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(exit, 0);
    // eps = 2, λ² = 4, x1 = 1, x2 = 1/4: τ_Z = 1/2, τ_D = 4.
    let (tau_z, tau_d) = (0.5, 4.0);
    let t = column(&csv, "t");
    let f1 = column(&csv, "qfi_x1");
    let f2 = column(&csv, "qfi_x2");
    let cm = column(&csv, "c_m");
    let c_big = column(&csv, "c_M");
    for i in 0..t.len() {
        let decay = (-4.0 * t[i] / tau_d).exp();
        let want1 = t[i] * t[i] / (tau_z * tau_z) * decay;
        assert!(
            (f1[i] - want1).abs() <= 1e-9 * want1.max(1.0),
            "F1 at t = {}",
            t[i]
        );
        if t[i] > 0.0 {
            // β = λ²t/2, F = β²/(e^{2βx2} − 1).
            let beta = 2.0 * t[i];
            let want2 = beta * beta / (2.0 * beta * 0.25f64).exp_m1();
            assert!((f2[i] - want2).abs() <= 1e-9 * want2, "F2 at t = {}", t[i]);
        }
        assert!((cm[i] - decay).abs() < 1e-10 && (c_big[i] - decay).abs() < 1e-10);
    }
    assert!(json["analytic"]["max_rel_dev_x1"].as_f64().unwrap() < 1e-9);
}

#[test]
fn closed_system_keeps_both_constants_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "unitary.json",
        r#"{"n_sites": 3, "hamiltonian": {"kind": "spin_chain_uniform", "k": 1},
            "lindblad": {"kind": "uncorrelated_p_body", "p": 1}, "probe": {"kind": "product", "phi": 0.3},
            "x1": 1.0, "x2": 0.0}"#,
    );
    let (csv, _, exit) = run_to(dir.path(), "u", &["qfi", "--config", cfg.to_str().unwrap()]);
    assert_eq!(exit, 0);
    for c in ["c_m", "c_M", "purity"] {
        assert!(
            column(&csv, c).iter().all(|v| (v - 1.0).abs() < 1e-12),
            "{c}"
        );
    }
}

#[test]
fn dense_rows_agree_with_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("dense_qfi.json");
    let (csv, json, exit) = run_to(
        dir.path(),
        "dq",
        &["qfi", "--config", cfg.to_str().unwrap(), "--oracle"],
    );
    assert_eq!(exit, 0, "{json}");
    assert_eq!(json["oracle"]["passed"], true);
    assert!(json["oracle"]["max_state_diff"].as_f64().unwrap() < 1e-8);
    let exact = column(&csv, "qfi_x1");
    let fd = column(&csv, "oracle_qfi_x1");
    for (a, b) in exact.iter().zip(&fd) {
        assert!((a - b).abs() <= 1e-6 * a.abs() + 1e-9);
    }
}

#[test]
fn flags_outside_their_command_are_rejected() {
    let cfg = configs().join("ghz_sweep.json");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--oracle"]);
    assert_eq!(code(&o), 2);
    let o = run(&["verify", "--assert-slope", "-1:0.1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn degenerate_probe_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "even.json",
        r#"{"n_range": [10, 20, 30, 40, 50], "hamiltonian": {"kind": "spin_chain_uniform", "k": 2},
            "lindblad": {"kind": "uncorrelated_p_body", "p": 1}, "probe": {"kind": "ghz"}, "x1": 1, "x2": 0.1}"#,
    );
    let o = run(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("degenerate probe"), "{}", stderr(&o));
}
