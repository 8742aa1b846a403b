use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pinhole(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pinhole"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn fields_writes_one_file_per_frame() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pinhole(&[
        "fields",
        "--scenario",
        "uwea",
        "--which",
        "qpotential",
        "--grid-n",
        "5",
        "--frames",
        "3",
        "--out",
        out,
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(files.len(), 3);
    for f in &files {
        assert_eq!(data_rows(Path::new(f)), 25);
        assert!(f.contains("qpotential_"));
    }
    assert!(stderr(&o).contains("masked cells"));
}

#[test]
fn fields_default_frames_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(&cfg, "[grid]\nnx = 3\nnz = 2\nframes = 0, 1e-10\n").unwrap();
    let out = dir.path().join("f");
    let o = pinhole(&[
        "fields",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
    assert_eq!(data_rows(&out.join("intensity_000.csv")), 6);
}

#[test]
fn trajectories_lattice_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pinhole(&["trajectories", "--scenario", "ewea", "--grid-init", "3", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let path = dir.path().join("trajectories_ewea.csv");
    assert_eq!(data_rows(&path), 18 * 151);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "traj_id,t,x,y,z,vx,vy,vz,status");
}

#[test]
fn born_trajectories_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = pinhole(&[
            "trajectories",
            "--scenario",
            "ewua",
            "--born",
            "12",
            "--seed",
            "4",
            "--t-final",
            "3e-10",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        fs::read(out.join("trajectories_ewua.csv")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count() - 1, 12 * 31);
}

#[test]
fn visibility_reports_value() {
    let o = pinhole(&["visibility", "--scenario", "ewua"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let v: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("visibility="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((v - 0.6).abs() < 0.05, "{text}");
}

#[test]
fn config_typo_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "[packet.pos]\nkx_ = 1\n").unwrap();
    let o = pinhole(&["visibility", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("kx_") && err.contains("line 2"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(pinhole(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pinhole(&["visibility", "--scenario", "abc"]).status.code(), Some(2));
    assert_eq!(pinhole(&["fields", "--grid-n", "1"]).status.code(), Some(2));
    assert_eq!(
        pinhole(&["visibility", "--config", "/nonexistent/x.ini"]).status.code(),
        Some(2)
    );
    assert_eq!(
        pinhole(&["trajectories", "--grid-init", "2", "--born", "3"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_exit_status_matches_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let o = pinhole(&[
        "verify",
        "--scenario",
        "ewua",
        "--n-traj",
        "300",
        "--kv",
        "--out",
        out.to_str().unwrap(),
    ]);
    let kv = stdout(&o);
    assert_eq!(kv.matches(".status=").count(), 9);
    let all_passed = kv.contains("all_passed=true");
    assert_eq!(o.status.code(), Some(if all_passed { 0 } else { 1 }), "{kv}");
    assert!(out.join("report.txt").exists());
    assert_eq!(fs::read_to_string(out.join("report.kv")).unwrap(), kv);
}
