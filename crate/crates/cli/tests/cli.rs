use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn jostspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jostspec")).args(args).output().expect("binary runs")
}

fn run_in(dir: &Path, experiment: &str, cfg: &Path, extra: &[&str]) -> Output {
    let mut args = vec![experiment, "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    jostspec(&args)
}

/// Data rows as parsed floats, header and column rows skipped.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(2).map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect()
}

#[test]
fn free_block_bands_is_minus_two_to_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "bands", &config("free.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("bands.csv")).unwrap();
    assert!(csv.starts_with("# model_hash="));
    assert_eq!(csv.lines().nth(1), Some("lo,hi"));
    let r = rows(&csv);
    assert_eq!(r.len(), 1);
    assert!((r[0][0] + 2.0).abs() < 1e-10 && (r[0][1] - 2.0).abs() < 1e-10);
}

#[test]
fn two_band_block_edges() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "bands", &config("two_band.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = rows(&std::fs::read_to_string(dir.path().join("bands.csv")).unwrap());
    let expected = [[-3.0, -1.0], [1.0, 3.0]];
    assert_eq!(r.len(), 2);
    for (got, want) in r.iter().zip(expected) {
        assert!((got[0] - want[0]).abs() < 1e-10 && (got[1] - want[1]).abs() < 1e-10);
    }
}

#[test]
fn compare_on_perturbed_model_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "compare", &config("finite.toml"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("E,density_key,density_oracle,rel_err"));
    let r = rows(&csv);
    assert_eq!(r.len(), 101);
    assert!(r.iter().all(|row| row[3] < 1e-5));
}

#[test]
fn compare_above_tolerance_exits_three_with_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "compare", &config("finite.toml"), &["--set", "experiment.compare_tol=1e-12"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(dir.path().join("compare.csv").exists());
}

#[test]
fn negative_a_is_rejected_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[block]\nq = 1\na = [-1.0]\nb = [0.0]\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = run_in(&out_dir, "bands", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
    let record: serde_json::Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert_eq!(record["kind"], "validation");
    assert_eq!(record["exit_code"], 2);
}

#[test]
fn perturbation_driving_a_negative_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = run_in(&out_dir, "density", &config("finite.toml"), &["--set", "perturbation.alpha=[-1.5]"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "bands", &config("free.toml"), &["--set", "experiment.resolution=3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("bands.csv").exists());
}

#[test]
fn output_is_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(run_in(a.path(), "density", &config("finite.toml"), &["--threads", "1"]).status.code(), Some(0));
    assert_eq!(run_in(b.path(), "density", &config("finite.toml"), &["--threads", "3"]).status.code(), Some(0));
    let x = std::fs::read(a.path().join("density.csv")).unwrap();
    let y = std::fs::read(b.path().join("density.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn seed_selects_the_random_model() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let cfg = config("random_decay.toml");
    let extra = ["--set", "experiment.n_list=[10, 20]", "--set", "experiment.quad_order=64"];
    for (d, seed) in dirs.iter().zip(["5", "5", "6"]) {
        let mut args = extra.to_vec();
        args.extend(["--seed", seed]);
        assert_eq!(run_in(d.path(), "entropy", &cfg, &args).status.code(), Some(0));
    }
    let read = |i: usize| std::fs::read_to_string(dirs[i].path().join("entropy.csv")).unwrap();
    assert_eq!(read(0), read(1));
    assert_ne!(read(0), read(2));
    assert!(read(0).contains("seed=5"));
}

#[test]
fn entropy_schema_and_finite_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "entropy", &config("oscillatory.toml"), &["--set", "experiment.n_list=[10, 20]"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("entropy.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("N,I_lo,I_hi,value,quad_order"));
    let r = rows(&csv);
    assert_eq!(r.len(), 2);
    assert!(r.iter().all(|row| row[3].is_finite() && row[4] == 1024.0));
}

#[test]
fn certify_on_weak_finite_perturbation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), "certify", &config("finite.toml"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("certify.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("name,passed,constant_name,constant_value,worst_E,worst_y"));
    for name in ["floquet_bound#0", "w_summability#0", "diagonal_products#0", "harmonic_hypotheses#0"] {
        assert!(csv.lines().any(|l| l.starts_with(&format!("{name},true,"))), "{name} missing or failed");
    }
}

#[test]
fn certify_failure_exits_three() {
    // W sums of the oscillatory family keep growing past the last cut-off.
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(
        dir.path(),
        "certify",
        &config("oscillatory.toml"),
        &["--set", "experiment.w_tol=1e-6", "--set", "experiment.n_list=[20, 40]"],
    );
    assert_eq!(out.status.code(), Some(3));
    let csv = std::fs::read_to_string(dir.path().join("certify.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("w_summability#0,false,")));
}
