use std::path::Path;
use std::process::{Command, Output};

fn adamdo(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adamdo"))
        .args(args)
        .current_dir(dir)
        .env_remove("ADAMDO_OUTPUT_DIR")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    std::fs::write(dir.join(name), body).unwrap();
    name.to_string()
}

const BASE: &str = "topology = ring\nnodes = 4\ndataset.synthetic.n = 20\ndataset.synthetic.d = 5\nseed = 1\nT = 40\n";

#[test]
fn run_writes_trace_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", &format!("algorithm = adamdos\noutput = a.csv\n{BASE}"));
    let out = adamdo(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("adamdos"));
    assert!(dir.path().join("a.csv").exists());
}

#[test]
fn output_directory_override_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", &format!("algorithm = adamdof\noutput = a.csv\n{BASE}"));
    let out = Command::new(env!("CARGO_BIN_EXE_adamdo"))
        .args(["run", &cfg])
        .current_dir(dir.path())
        .env("ADAMDO_OUTPUT_DIR", dir.path().join("elsewhere"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("elsewhere/a.csv").exists());
    assert!(!dir.path().join("a.csv").exists());
}

#[test]
fn compare_ranks_two_runs() {
    let dir = tempfile::tempdir().unwrap();
    for alg in ["adamdos", "dpsgd"] {
        let cfg = write_config(dir.path(), &format!("{alg}.cfg"), &format!("algorithm = {alg}\noutput = {alg}.csv\n{BASE}"));
        assert_eq!(adamdo(&["run", &cfg], dir.path()).status.code(), Some(0));
    }
    let out = adamdo(&["compare", "adamdos.csv", "dpsgd.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("ranking by final gap"));
}

#[test]
fn validation_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", &format!("algorithm = adamdof\nbatch = 0\n{BASE}"));
    let out = adamdo(&["validate", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("batch"));
    let good = write_config(dir.path(), "good.cfg", &format!("algorithm = adamdof\n{BASE}"));
    assert_eq!(adamdo(&["validate", &good], dir.path()).status.code(), Some(0));
}

#[test]
fn divergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "d.cfg",
        "algorithm = adamdof\ntopology = ring\nnodes = 3\ndataset.quadratic.n = 2\ndataset.quadratic.d = 3\n\
         adaptive = identity\nrho = 1e-6\ngamma = 1000\nbatch = 2\nT = 500\noutput = d.csv\n",
    );
    assert_eq!(adamdo(&["run", &cfg], dir.path()).status.code(), Some(2));
    assert!(dir.path().join("d.csv.diverged").exists());
}

#[test]
fn missing_files_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(adamdo(&["run", "absent.cfg"], dir.path()).status.code(), Some(3));
    assert_eq!(adamdo(&["compare", "x.csv", "y.csv"], dir.path()).status.code(), Some(3));
}

#[test]
fn nu_prints_the_mixing_rate() {
    let dir = tempfile::tempdir().unwrap();
    let out = adamdo(&["nu", "ring", "5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let nu: f64 = String::from_utf8_lossy(&out.stdout).trim().parse().unwrap();
    assert!((nu - 0.539345).abs() < 1e-6);
    assert_eq!(adamdo(&["nu", "torus", "5"], dir.path()).status.code(), Some(1));
}
