use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sselab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sselab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("SSELAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

const SMALL: &str = r#"
name = "small"

[[scenario]]
name = "pauli"
kind = "pauli"
noise = { kind = "ornstein-uhlenbeck", gamma = 0.3, k = 0.5, init = "stationary" }
system = { noise_operator = "X", initial_state = "0" }
sim = { dt = 0.01, horizon = 1.0, paths = 200, seed = 9, record_every = 10 }
output = { distribution_times = [1.0], distribution_samples = 500, trajectories = 1 }
check = { times = [0.5, 1.0], max_ks = 0.3 }
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let res = sselab(&["run", &cfg, "--check"], &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    for f in [
        "summary.csv",
        "law.json",
        "distribution_t1.csv",
        "trajectory_0.csv",
        "run.json",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("t,analytic_mean,analytic_var,mc_mean,mc_stderr,mc_var")
    );
    assert_eq!(lines.count(), 11);

    // A finished run can be repeated from its run.json.
    let again = dir.path().join("again");
    let run_json = out.join("run.json").display().to_string();
    assert_eq!(sselab(&["run", &run_json], &again).status.code(), Some(0));
    assert_eq!(
        fs::read(out.join("summary.csv")).unwrap(),
        fs::read(again.join("summary.csv")).unwrap()
    );
}

#[test]
fn seed_and_paths_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    sselab(&["run", &cfg, "--seed", "1", "--paths", "50"], &a);
    sselab(&["run", &cfg, "--seed", "2", "--paths", "50"], &b);
    let run: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["scenarios"][0]["paths"], 50);
    assert_eq!(run["scenarios"][0]["seed"], 1);
    assert_ne!(
        fs::read(a.join("summary.csv")).unwrap(),
        fs::read(b.join("summary.csv")).unwrap()
    );
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(sselab(&["run", "no-such-preset"], &out).status.code(), Some(1));

    let unknown_key = SMALL.replace("record_every = 10", "record_every = 10, stride = 3");
    let cfg = write_config(dir.path(), &unknown_key);
    assert_eq!(sselab(&["run", &cfg], &out).status.code(), Some(1));

    let bad_state = SMALL.replace("initial_state = \"0\"", "initial_state = \"q\"");
    let cfg = write_config(dir.path(), &bad_state);
    assert_eq!(sselab(&["run", &cfg], &out).status.code(), Some(1));

    let not_multiple = SMALL.replace("horizon = 1.0", "horizon = 1.005");
    let cfg = write_config(dir.path(), &not_multiple);
    assert_eq!(sselab(&["run", &cfg], &out).status.code(), Some(1));
}

#[test]
fn check_breach_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let strict = SMALL.replace("max_ks = 0.3", "max_ks = 0.3, max_z = 1e-6");
    let cfg = write_config(dir.path(), &strict);
    let out = dir.path().join("out");
    let res = sselab(&["run", &cfg, "--check"], &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stdout).contains("FAIL"));
    // Without --check the same run succeeds.
    assert_eq!(sselab(&["run", &cfg], &out).status.code(), Some(0));
}

#[test]
fn presets_are_listed() {
    let res = Command::new(env!("CARGO_BIN_EXE_sselab"))
        .arg("presets")
        .output()
        .unwrap();
    assert!(res.status.success());
    let text = String::from_utf8_lossy(&res.stdout);
    for name in ["fig3", "fig4", "fig5", "fig6", "fig7a", "fig7b"] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let res = Command::new(env!("CARGO_BIN_EXE_sselab"))
            .args(["run", &cfg, "--out"])
            .arg(&out)
            .env("SSELAB_THREADS", threads)
            .output()
            .unwrap();
        assert!(res.status.success());
        outputs
            .push(["summary.csv", "distribution_t1.csv", "trajectory_0.csv"].map(|f| fs::read(out.join(f)).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}
