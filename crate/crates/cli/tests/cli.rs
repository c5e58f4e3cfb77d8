use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = "[truncation]\nm = 1\np = 1\n\n[time]\ndt = 0.01\n\n[experiment]\ntrials = 2\nkicks = 6\nensemble_size = 6\ncoupling_seeds = 2\nnsamples = 10\n";

fn pesat(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pesat"));
    cmd.current_dir(dir).args(args);
    for (k, _) in std::env::vars() {
        if k.starts_with("PESAT_") {
            cmd.env_remove(k);
        }
    }
    cmd.envs(env.iter().copied());
    cmd.output().unwrap()
}

fn write_config(dir: &Path, text: &str) {
    fs::write(dir.join("run.toml"), text).unwrap();
}

fn error_record(dir: &Path, out: &str) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join(out).join("error.json")).unwrap()).unwrap()
}

#[test]
fn verify_identities_reports_every_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out = pesat(dir.path(), &["verify-identities", "--out", "o"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let names = pesat_core::identities::names();
    for name in &names {
        assert!(stdout.contains(&format!("PASS {name}")), "{name}");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("o/identities.json")).unwrap()).unwrap();
    assert_eq!(report.as_array().unwrap().len(), names.len());
    assert!(dir.path().join("o/manifest.json").exists());
}

#[test]
fn malformed_configs_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("[physics]\nnu3 = 1.0\n", "physics.nu3"),
        ("[physic]\nnu1 = 1.0\n", "physic"),
        ("[physics]\nnu1 = -1.0\n", "physics.nu1"),
        ("[[experiment.u0]]\nkind = \"phi\"\nindex = 11\ncoeff = 1.0\n", "experiment.u0"),
        ("[noise]\nq = 0.5\n", "noise"),
    ];
    for (text, key) in cases {
        write_config(dir.path(), text);
        let out = pesat(dir.path(), &["saturate", "--config", "run.toml", "--out", "o"], &[]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert_eq!(error_record(dir.path(), "o")["key"], key, "{text}");
        let stderr: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(stderr["error"], "ConfigError");
    }
    write_config(dir.path(), "[physics\n");
    assert_eq!(pesat(dir.path(), &["saturate", "--config", "run.toml", "--out", "o"], &[]).status.code(), Some(2));
    assert_eq!(pesat(dir.path(), &["saturate", "--config", "missing.toml", "--out", "o"], &[]).status.code(), Some(2));
    assert_eq!(pesat(dir.path(), &["saturate", "--threads", "0", "--out", "o"], &[]).status.code(), Some(2));
}

#[test]
fn experiment_failures_exit_1_with_a_record() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "[time]\nhorizon = 0.01\n");
    let out = pesat(dir.path(), &["steer", "--config", "run.toml", "--out", "o"], &[]);
    assert_eq!(out.status.code(), Some(1));
    let record = error_record(dir.path(), "o");
    assert_eq!(record["error"], "PreconditionViolation");
    assert_eq!(record["exit_code"], 1);
}

#[test]
fn same_config_and_seed_give_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), SMALL);
    for run in ["a", "b"] {
        let out = pesat(dir.path(), &["mix", "--config", "run.toml", "--seed", "9", "--out", run], &[]);
        assert_eq!(out.status.code(), Some(0));
    }
    for f in ["mix.json", "mix_distances.csv", "manifest.json"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
    pesat(dir.path(), &["mix", "--config", "run.toml", "--seed", "10", "--out", "c"], &[]);
    assert_ne!(fs::read(dir.path().join("a/mix.json")).unwrap(), fs::read(dir.path().join("c/mix.json")).unwrap());
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), SMALL);
    let first = pesat(dir.path(), &["simulate", "--config", "run.toml", "--seed", "4", "--out", "a"], &[("PESAT_TIME__HORIZON", "0.5")]);
    assert_eq!(first.status.code(), Some(0));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["versions"]["pesat_core"], pesat_core::VERSION);
    // The override is part of the recorded config; the replay needs nothing else.
    fs::remove_file(dir.path().join("run.toml")).unwrap();
    let replay = pesat(dir.path(), &["--manifest", "a/manifest.json", "--out", "b"], &[]);
    assert_eq!(replay.status.code(), Some(0));
    for f in ["simulate.json", "trajectory.csv", "manifest.json"] {
        assert_eq!(fs::read(dir.path().join("a").join(f)).unwrap(), fs::read(dir.path().join("b").join(f)).unwrap(), "{f}");
    }
    let tampered = fs::read_to_string(dir.path().join("a/manifest.json")).unwrap().replace("horizon = 0.5", "horizon = 0.25");
    fs::write(dir.path().join("t.json"), tampered).unwrap();
    assert_eq!(pesat(dir.path(), &["--manifest", "t.json", "--out", "c"], &[]).status.code(), Some(2));
}

#[test]
fn environment_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let out = pesat(dir.path(), &["saturate"], &[("PESAT_TRUNCATION__M", "1"), ("PESAT_TRUNCATION__P", "1"), ("PESAT_OUT", "env-out")]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("env-out/saturation.json")).unwrap()).unwrap();
    assert_eq!(report["full_dim"], 35);
    assert_eq!(report["reached_full"], true);
    let bad = pesat(dir.path(), &["saturate", "--out", "o"], &[("PESAT_PHYSICS__NU9", "2.0")]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(error_record(dir.path(), "o")["key"], "physics.nu9");
}
