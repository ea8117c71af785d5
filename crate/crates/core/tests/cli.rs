use std::path::Path;
use std::process::{Command, Output};

fn wickflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wickflow"))
        .args(args)
        .current_dir(dir)
        .env_remove("WICKFLOW_WORKERS")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn csv_records(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

/// Drops the wall time column so timed runs can be compared.
fn without_timing(path: &Path) -> Vec<Vec<String>> {
    csv_records(path)
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .filter(|(i, _)| *i != 8)
                .map(|(_, s)| s.to_string())
                .collect()
        })
        .collect()
}

#[test]
fn hermite_check_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = wickflow(&["hermite-check", "--out", "res"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("res/hermite-check.csv");
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("experiment,label,n,reps,mean,stderr,oracle,z_score,wall_time_ms,seed\n"));
    let rows = csv_records(&csv);
    let iterates: Vec<_> = rows.iter().filter(|r| r[1].starts_with("iterate")).collect();
    assert_eq!(iterates.len(), 9);
    for r in iterates {
        let residual: f64 = r[4].parse().unwrap();
        assert!(residual.abs() <= 1e-9, "{r:?}");
    }
    assert!(dir.path().join("res/hermite-check.json").exists());
}

#[test]
fn malformed_config_exits_2_without_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", "{\"experiment\": \"hermite-check\",");
    let out = wickflow(&["run", &cfg, "--out", "res"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(!dir.path().join("res").exists());
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let top = write_config(dir.path(), "top.json", r#"{"experiment": "hermite-check", "sead": 3}"#);
    let inner = write_config(dir.path(), "inner.json", r#"{"experiment": "hermite-check", "params": {"kmax": 3}}"#);
    for cfg in [top, inner] {
        let out = wickflow(&["run", &cfg, "--out", "res"], dir.path());
        assert_eq!(code(&out), 2, "{cfg}");
    }
    assert!(!dir.path().join("res").exists());
}

#[test]
fn unknown_experiment_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"experiment": "nope"}"#);
    assert_eq!(code(&wickflow(&["run", &cfg], dir.path())), 2);
}

#[test]
fn config_for_another_subcommand_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"experiment": "lattice"}"#);
    assert_eq!(code(&wickflow(&["gram", "--config", &cfg], dir.path())), 2);
}

#[test]
fn invalid_workers_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for w in ["0", "many", "-1"] {
        let out = wickflow(&["hermite-check", "--workers", w, "--out", "res"], dir.path());
        assert_eq!(code(&out), 2, "workers {w}");
    }
}

#[test]
fn oversized_lattice_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"experiment": "lattice", "params": {"n_steps": 25}}"#);
    let out = wickflow(&["run", &cfg, "--out", "res"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(!dir.path().join("res").exists());
}

#[test]
fn violated_contract_exits_1_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"experiment": "hermite-check", "params": {"tol": -1.0}}"#);
    let out = wickflow(&["run", &cfg, "--out", "res"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(dir.path().join("res/hermite-check.csv").exists());
}

#[test]
fn rerun_is_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let args = |o: &'static str| ["lattice", "--seed", "11", "--reps", "500", "--out", o];
    assert_eq!(code(&wickflow(&args("a"), dir.path())), 0);
    assert_eq!(code(&wickflow(&args("b"), dir.path())), 0);
    let a = without_timing(&dir.path().join("a/lattice.csv"));
    assert_eq!(a, without_timing(&dir.path().join("b/lattice.csv")));
}

#[test]
fn untimed_runs_are_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"experiment": "gmc-circle", "seed": 5, "reps": 3000, "timing": false, "params": {"n": 64}}"#,
    );
    let mut bytes = Vec::new();
    for (w, o) in [("1", "w1"), ("4", "w4"), ("16", "w16"), ("auto", "wa")] {
        let out = wickflow(&["run", &cfg, "--workers", w, "--out", o], dir.path());
        assert!(code(&out) <= 1, "{}", String::from_utf8_lossy(&out.stderr));
        bytes.push(std::fs::read(dir.path().join(o).join("gmc-circle.csv")).unwrap());
    }
    assert!(bytes.windows(2).all(|p| p[0] == p[1]));
}

#[test]
fn workers_env_is_the_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"experiment": "zn", "seed": 9, "reps": 400, "timing": false, "params": {"n": 8, "q_reps": 4}}"#,
    );
    let flag = wickflow(&["run", &cfg, "--workers", "3", "--out", "flag"], dir.path());
    let env = Command::new(env!("CARGO_BIN_EXE_wickflow"))
        .args(["run", &cfg, "--out", "env"])
        .current_dir(dir.path())
        .env("WICKFLOW_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&flag), code(&env));
    let a = std::fs::read(dir.path().join("flag/zn.csv")).unwrap();
    let b = std::fs::read(dir.path().join("env/zn.csv")).unwrap();
    assert_eq!(a, b);

    let bad = Command::new(env!("CARGO_BIN_EXE_wickflow"))
        .args(["run", &cfg, "--out", "bad"])
        .current_dir(dir.path())
        .env("WICKFLOW_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn seed_override_changes_the_sample() {
    let dir = tempfile::tempdir().unwrap();
    for (s, o) in [("1", "s1"), ("2", "s2")] {
        assert!(code(&wickflow(&["lattice", "--seed", s, "--reps", "300", "--out", o], dir.path())) <= 1);
    }
    let a = without_timing(&dir.path().join("s1/lattice.csv"));
    let b = without_timing(&dir.path().join("s2/lattice.csv"));
    assert_ne!(a, b);
}

#[test]
fn shipped_configs_are_valid() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let dir = tempfile::tempdir().unwrap();
    let mut seen = 0;
    for entry in std::fs::read_dir(configs).unwrap() {
        let path = entry.unwrap().path();
        let p = path.to_string_lossy().into_owned();
        let out = wickflow(&["run", &p, "--reps", "20", "--out", "res"], dir.path());
        assert!(code(&out) <= 1, "{p}: {}", String::from_utf8_lossy(&out.stderr));
        seen += 1;
    }
    assert_eq!(seen, 13);
}
