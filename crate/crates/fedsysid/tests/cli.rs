//! End-to-end checks of the command-line interface: exit codes, output
//! files, determinism, and seed precedence.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fedsysid"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("fedsysid_cli_{name}"));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_small_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("small.conf");
    let body = format!("clients = 3\nrounds = 5\ntrials = 2\nrollouts = 6\nhorizon = 4\n{extra}");
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn bound_preset_prints_the_report_fields() {
    let out = bin()
        .args(["bound", "--config", "paper_defaults", "--quiet"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    for field in [
        "C0 =",
        "C1 =",
        "C2 =",
        "term_noise =",
        "term_hetero =",
        "total =",
        "sample_ok =",
    ] {
        assert!(text.contains(field), "missing '{field}' in:\n{text}");
    }
}

#[test]
fn run_is_byte_identical_for_a_fixed_seed() {
    let dir = tmp_dir("run_determinism");
    let config = write_small_config(&dir, "");
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    for out_path in [&a, &b] {
        let out = bin()
            .args([
                "run",
                "--config",
                config.to_str().unwrap(),
                "--seed",
                "321",
                "--quiet",
                "--out",
                out_path.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{out:?}");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    // The CSV embeds the resolved configuration as comment lines.
    let text = std::fs::read_to_string(&a).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# seed = 321")));
    assert!(text.lines().any(|l| l.starts_with("# clients = 3")));
}

#[test]
fn sweep_emits_both_rules_and_a_plot_script() {
    let dir = tmp_dir("sweep_rules");
    let config = write_small_config(&dir, "sweep_rule = fedavg fedlin\n");
    let csv = dir.join("compare.csv");
    let out = bin()
        .args([
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--quiet",
            "--out",
            csv.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.lines().any(|l| l.starts_with("fedavg,")));
    assert!(text.lines().any(|l| l.starts_with("fedlin,")));

    let script = csv.with_extension("py");
    let script_text = std::fs::read_to_string(&script).unwrap();
    assert!(script_text.contains(csv.to_str().unwrap()));

    // If a Python interpreter with matplotlib is around, the script runs and
    // renders the figure.
    if let Ok(probe) = Command::new("python3")
        .args(["-c", "import matplotlib"])
        .output()
    {
        if probe.status.success() {
            let run = Command::new("python3").arg(&script).output().unwrap();
            assert!(
                run.status.success(),
                "plot script failed: {}",
                String::from_utf8_lossy(&run.stderr)
            );
            assert!(csv.with_extension("png").exists());
        }
    }
}

#[test]
fn unknown_subcommand_exits_one_with_usage() {
    let out = bin().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("usage"), "{err}");
}

#[test]
fn unknown_flag_exits_one() {
    let out = bin().args(["run", "--frob", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_errors_exit_one() {
    let dir = tmp_dir("bad_config");
    let path = dir.join("bad.conf");
    std::fs::write(&path, "cleints = 3\n").unwrap();
    let out = bin()
        .args(["run", "--config", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cleints"));

    let out = bin()
        .args(["run", "--config", "no_such_preset"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_two() {
    let dir = tmp_dir("divergence");
    // A step size far past the stability limit blows up the local updates.
    let config = write_small_config(&dir, "alpha0 = 10\n");
    let out = bin()
        .args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--quiet",
            "--out",
            dir.join("x.csv").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{out:?}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("step size too large"));
}

#[test]
fn env_seed_is_the_lowest_precedence_default() {
    let dir = tmp_dir("env_seed");
    let config = write_small_config(&dir, "");
    let run = |args: &[&str], env_seed: Option<&str>, out_name: &str| -> Vec<u8> {
        let out_path = dir.join(out_name);
        let mut cmd = bin();
        cmd.args([
            "run",
            "--config",
            config.to_str().unwrap(),
            "--quiet",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .args(args);
        match env_seed {
            Some(seed) => cmd.env("FEDSYSID_SEED", seed),
            None => cmd.env_remove("FEDSYSID_SEED"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{out:?}");
        std::fs::read(out_path).unwrap()
    };

    // The env seed applies when nothing else pins one...
    let via_env = run(&[], Some("777"), "env.csv");
    let via_flag = run(&["--seed", "777"], None, "flag.csv");
    assert_eq!(via_env, via_flag);

    // ...and the explicit flag wins over the environment.
    let flag_over_env = run(&["--seed", "42"], Some("777"), "both.csv");
    let plain_42 = run(&["--seed", "42"], None, "plain42.csv");
    assert_eq!(flag_over_env, plain_42);
    assert_ne!(via_env, plain_42);
}

#[test]
fn simulate_reports_the_generated_batch() {
    let dir = tmp_dir("simulate");
    let config = write_small_config(&dir, "");
    let out = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("clients = 3"));
    assert!(text.contains("measured heterogeneity"));
    assert!(text.contains("reconstruction residual"));
}

#[test]
fn diagnose_prints_measured_and_bound_pairs() {
    let dir = tmp_dir("diagnose");
    let config = write_small_config(&dir, "");
    let out = bin()
        .args(["diagnose", "--config", config.to_str().unwrap(), "--quiet"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    for field in ["wz_norm =", "wz_bound =", "dz_norm", "beta ="] {
        assert!(text.contains(field), "missing '{field}' in:\n{text}");
    }
}
