//! End-to-end tests of the `greenlab` binary: exit codes, error wording,
//! output files, the `GREENLAB_SEED` override, and byte-level determinism
//! across worker counts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_greenlab"))
}

fn run_in(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = bin();
    cmd.current_dir(dir).args(args).env_remove("GREENLAB_SEED");
    for (key, value) in env {
        cmd.env(key, value);
    }
    cmd.output().expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const GRID_CONFIG: &str = r#"{
  "experiment": "green-grid",
  "map": {"family": "power", "k": 1, "d": 2},
  "params": {"chart": 0, "x_min": -2.0, "x_max": 2.0,
             "y_min": -2.0, "y_max": 2.0, "nx": 8, "ny": 8},
  "seed": 3
}"#;

const PULLBACK_CONFIG: &str = r#"{
  "experiment": "pullback-converge",
  "map": {"family": "perturbed-power", "k": 1, "d": 2, "epsilon": 0.05},
  "params": {
    "hypersurface": {"polynomial": "z0^1 + (-1,0)*z1^1"},
    "n_list": [0, 1, 2, 3],
    "sample_count": 150
  },
  "seed": 42
}"#;

#[test]
fn a_successful_run_writes_the_advertised_files() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("grid.json"), GRID_CONFIG).unwrap();
    let out = run_in(
        dir.path(),
        &["green-grid", "--config", "grid.json", "--out", "run"],
        &[],
    );
    assert!(out.status.success(), "{}", stderr_of(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in ["green-grid.csv", "green-grid.ppm", "manifest.json"] {
        assert!(dir.path().join("run").join(name).is_file(), "missing {name}");
        assert!(stdout.contains(name), "stdout must mention {name}: {stdout}");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["seed_source"], "config");
    assert_eq!(manifest["experiment"], "green-grid");
}

#[test]
fn the_out_field_of_the_config_is_honored_without_a_flag() {
    let dir = tempfile::tempdir().unwrap();
    let config = GRID_CONFIG.replacen("\"seed\": 3", "\"out\": \"from-config\", \"seed\": 3", 1);
    fs::write(dir.path().join("grid.json"), config).unwrap();
    let out = run_in(dir.path(), &["green-grid", "--config", "grid.json"], &[]);
    assert!(out.status.success(), "{}", stderr_of(&out));
    assert!(dir.path().join("from-config/green-grid.csv").is_file());
}

#[test]
fn invalid_parameters_fail_with_the_field_path_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{
      "experiment": "lelong",
      "map": {"family": "power", "k": 1, "d": 2},
      "params": {
        "hypersurface": {"coordinate": 0},
        "center": [[0.0, 0.0], [1.0, 0.0]],
        "r_max": 0.5, "levels": 6, "samples_per_radius": 600
      },
      "seed": 1
    }"#;
    fs::write(dir.path().join("lelong.json"), config).unwrap();
    let out = run_in(dir.path(), &["lelong", "--config", "lelong.json"], &[]);
    assert!(!out.status.success());
    let stderr = stderr_of(&out);
    assert!(stderr.contains("lelong.r_max"), "stderr: {stderr}");
    assert!(stderr.contains("(0, 0.25]"), "stderr: {stderr}");
}

#[test]
fn the_experiment_argument_must_match_the_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("grid.json"), GRID_CONFIG).unwrap();

    let out = run_in(dir.path(), &["lelong", "--config", "grid.json"], &[]);
    assert!(!out.status.success());
    let stderr = stderr_of(&out);
    assert!(
        stderr.contains("lelong") && stderr.contains("green-grid"),
        "stderr: {stderr}"
    );

    let out = run_in(dir.path(), &["green-gird", "--config", "grid.json"], &[]);
    assert!(!out.status.success());
    let stderr = stderr_of(&out);
    assert!(
        stderr.contains("green-gird") && stderr.contains("contraction-probe"),
        "an unknown name lists the valid ones: {stderr}"
    );
}

#[test]
fn the_seed_environment_variable_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pb.json"), PULLBACK_CONFIG).unwrap();

    let base = run_in(
        dir.path(),
        &["pullback-converge", "--config", "pb.json", "--out", "a"],
        &[],
    );
    assert!(base.status.success(), "{}", stderr_of(&base));
    let over = run_in(
        dir.path(),
        &["pullback-converge", "--config", "pb.json", "--out", "b"],
        &[("GREENLAB_SEED", "9")],
    );
    assert!(over.status.success(), "{}", stderr_of(&over));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("b/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 9);
    assert_eq!(manifest["seed_source"], "override");
    // The override reaches the sampler, not just the manifest.
    let csv_a = fs::read_to_string(dir.path().join("a/pullback-converge.csv")).unwrap();
    let csv_b = fs::read_to_string(dir.path().join("b/pullback-converge.csv")).unwrap();
    assert_ne!(csv_a, csv_b);

    let bad = run_in(
        dir.path(),
        &["pullback-converge", "--config", "pb.json", "--out", "c"],
        &[("GREENLAB_SEED", "7.5")],
    );
    assert!(!bad.status.success());
    assert!(stderr_of(&bad).contains("GREENLAB_SEED"));
}

#[test]
fn worker_counts_and_reruns_produce_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("pb.json"), PULLBACK_CONFIG).unwrap();
    fs::write(dir.path().join("grid.json"), GRID_CONFIG).unwrap();

    let mut runs: Vec<(String, String)> = Vec::new();
    for (label, workers) in [("w1", "1"), ("w4", "4"), ("w4b", "4")] {
        for (kind, config) in [("pullback-converge", "pb.json"), ("green-grid", "grid.json")] {
            let out_dir = format!("{label}-{kind}");
            let out = run_in(
                dir.path(),
                &[kind, "--config", config, "--workers", workers, "--out", &out_dir],
                &[],
            );
            assert!(out.status.success(), "{}", stderr_of(&out));
        }
        let pb = fs::read_to_string(
            dir.path().join(format!("{label}-pullback-converge/pullback-converge.csv")),
        )
        .unwrap();
        let grid =
            fs::read_to_string(dir.path().join(format!("{label}-green-grid/green-grid.csv")))
                .unwrap();
        let ppm =
            fs::read_to_string(dir.path().join(format!("{label}-green-grid/green-grid.ppm")))
                .unwrap();
        runs.push((pb, format!("{grid}\u{0}{ppm}")));
    }
    assert_eq!(runs[0], runs[1], "1 worker vs 4 workers");
    assert_eq!(runs[1], runs[2], "rerun with 4 workers");
}
