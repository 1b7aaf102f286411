//! End-to-end runs of the compiled binary: exit codes, artifact layout,
//! and byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

const BIN: &str = env!("CARGO_BIN_EXE_statwave");

static STAMP: AtomicUsize = AtomicUsize::new(0);

/// Fresh scratch directory per call; the config and all artifacts live
/// under it so tests cannot see each other.
fn scratch() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "statwave-cli-{}-{}",
        std::process::id(),
        STAMP.fetch_add(1, Ordering::Relaxed)
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("exp.cfg");
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], workers: &str) -> Output {
    Command::new(BIN)
        .args(args)
        .env("STATWAVE_WORKERS", workers)
        .output()
        .unwrap()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn unknown_command_exits_1() {
    let out = run(&["frobnicate", "nowhere.cfg"], "1");
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr_of(&out).contains("unknown command"));
}

#[test]
fn missing_config_exits_2() {
    let dir = scratch();
    let missing = dir.join("absent.cfg");
    let out = run(&["norms", missing.to_str().unwrap()], "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("cannot read config"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn malformed_config_names_the_line_and_leaves_no_outputs() {
    let dir = scratch();
    let cfg = write_config(
        &dir,
        &format!(
            "[grid]\nn = 2\nN sixty four\nL = 2.0\n\n[output]\ndir = {}\n",
            dir.join("out").display()
        ),
    );
    let out = run(&["herglotz", cfg.to_str().unwrap()], "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains(":3:"), "stderr: {}", stderr_of(&out));
    assert!(!dir.join("out").exists());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn unrecognized_keys_fail_before_any_artifact() {
    let dir = scratch();
    let cfg = write_config(
        &dir,
        &format!(
            "[grid]\nn = 2\nN = 64\nL = 2.0\n\n[herglotz]\nlambda = 12\nepz = 0.3\n\n[output]\ndir = {}\n",
            dir.join("out").display()
        ),
    );
    let out = run(&["herglotz", cfg.to_str().unwrap()], "1");
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("epz") && err.contains(":8"), "stderr: {err}");
    assert!(!dir.join("out").join("herglotz_wave.ssfld").exists());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn unknown_flags_are_refused() {
    let dir = scratch();
    let cfg = write_config(&dir, "[grid]\nn = 2\nN = 64\nL = 2.0\n");
    let out = run(&["propagate", cfg.to_str().unwrap(), "--frobnicate", "3"], "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("unknown flag --frobnicate"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn norms_prints_the_three_norms_as_json() {
    let dir = scratch();
    let cfg = write_config(
        &dir,
        "[grid]\nn = 2\nN = 64\nL = 2.0\n\n[potential]\npreset = gaussian\namplitude = 0.5\nwidth = 0.3\n",
    );
    let out = run(&["norms", cfg.to_str().unwrap()], "1");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let record = json_of(&out);
    let triple = record["triple_norm"].as_f64().unwrap();
    assert!((triple - 0.5).abs() < 0.01, "triple norm {triple}");
    assert!(record["b_norm"].as_f64().unwrap() > 0.0);
    assert!(record["b_star_norm"].as_f64().unwrap() > 0.0);
    assert_eq!(record["config"].as_str().unwrap().len(), 16);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn herglotz_flags_override_the_config_and_write_a_loadable_field() {
    let dir = scratch();
    let cfg = write_config(
        &dir,
        &format!(
            "[grid]\nn = 2\nN = 96\nL = 2.0\n\n[herglotz]\nlambda = 16\neps = 0.3\ndirection = 1,0\n\n[output]\ndir = {}\n",
            dir.join("out").display()
        ),
    );
    let base = run(&["herglotz", cfg.to_str().unwrap()], "1");
    assert_eq!(base.status.code(), Some(0), "stderr: {}", stderr_of(&base));
    let overridden = run(
        &["herglotz", cfg.to_str().unwrap(), "--lambda", "12"],
        "1",
    );
    assert_eq!(overridden.status.code(), Some(0));

    let a = json_of(&base);
    let b = json_of(&overridden);
    assert_eq!(a["lambda"].as_f64(), Some(16.0));
    assert_eq!(b["lambda"].as_f64(), Some(12.0));
    assert_ne!(a["config"], b["config"], "digest tracks the effective config");

    let field = statwave::field_io::load_field(&dir.join("out").join("herglotz_wave.ssfld")).unwrap();
    assert_eq!(field.grid().size(), 96);
    assert!(field.max_abs() > 0.0);
    std::fs::remove_dir_all(dir).ok();
}

fn recover_config(dir: &Path, second: &str) -> PathBuf {
    write_config(
        dir,
        &format!(
            "[grid]\nn = 2\nN = 64\nL = 2.0\n\n[potential]\npreset = gaussian\namplitude = 0.5\nwidth = 0.3\n{second}\n[recover]\nlambdas = 12\nper_axis = 3\nmax_abs = 2.0\neps = 0.2\n\n[output]\ndir = {}\n",
            dir.join("out").display()
        ),
    )
}

#[test]
fn recover_with_identical_potentials_emits_zero_estimates() {
    let dir = scratch();
    let cfg = recover_config(
        &dir,
        "\n[potential2]\npreset = gaussian\namplitude = 0.5\nwidth = 0.3\n",
    );
    let out = run(&["recover", cfg.to_str().unwrap()], "2");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let csv = std::fs::read_to_string(dir.join("out").join("recover_modes.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(2) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[4], "0.000000000000e0", "estimate_re in {line}");
        assert_eq!(cells[5], "0.000000000000e0", "estimate_im in {line}");
        rows += 1;
    }
    assert_eq!(rows, 5);

    let field = statwave::field_io::load_field(&dir.join("out").join("reconstruction.ssfld")).unwrap();
    assert_eq!(field.max_abs(), 0.0);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn reruns_are_byte_identical_whatever_the_worker_count() {
    let dir = scratch();
    let cfg = recover_config(&dir, "");
    let first = run(&["recover", cfg.to_str().unwrap()], "1");
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr_of(&first));
    let csv_1 = std::fs::read(dir.join("out").join("recover_modes.csv")).unwrap();
    let field_1 = std::fs::read(dir.join("out").join("reconstruction.ssfld")).unwrap();

    let second = run(&["recover", cfg.to_str().unwrap()], "3");
    assert_eq!(second.status.code(), Some(0));
    let csv_2 = std::fs::read(dir.join("out").join("recover_modes.csv")).unwrap();
    let field_2 = std::fs::read(dir.join("out").join("reconstruction.ssfld")).unwrap();

    assert_eq!(first.stdout, second.stdout);
    assert_eq!(csv_1, csv_2);
    assert_eq!(field_1, field_2);

    let header = String::from_utf8_lossy(&csv_1);
    let mut lines = header.lines();
    assert!(lines.next().unwrap().starts_with("# statwave recover v1 config="));
    assert!(lines.next().unwrap().starts_with("kappa_0[1/len],kappa_1[1/len],lambda[1/len]"));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn propagate_conserves_mass_and_roundtrips_the_state() {
    let dir = scratch();
    let cfg = write_config(
        &dir,
        &format!(
            "[grid]\nn = 2\nN = 32\nL = 4.0\n\n[potential]\npreset = gaussian\namplitude = 0.3\nwidth = 1.0\n\n[initial]\npreset = gaussian\namplitude = 1.0\nwidth = 1.0\n\n[propagate]\nT = 0.05\ndt = 1e-3\n\n[output]\ndir = {}\n",
            dir.join("out").display()
        ),
    );
    let out = run(&["propagate", cfg.to_str().unwrap()], "1");
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let record = json_of(&out);
    assert_eq!(record["steps"].as_u64(), Some(50));
    assert!(record["mass_drift"].as_f64().unwrap() < 1e-10);

    let field = statwave::field_io::load_field(&dir.join("out").join("final_state.ssfld")).unwrap();
    let reported = record["l2_final"].as_f64().unwrap();
    assert!((field.l2_norm() - reported).abs() < 1e-12 * reported.max(1.0));
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn verify_validates_its_config_before_running_anything() {
    let dir = scratch();
    let cfg = write_config(&dir, "[verify]\nseed = not-a-number\n");
    let out = run(&["verify-estimates", cfg.to_str().unwrap()], "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("seed"));
    assert!(out.stdout.is_empty(), "no table before validation");
    std::fs::remove_dir_all(dir).ok();
}
