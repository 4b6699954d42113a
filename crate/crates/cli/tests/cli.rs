use std::path::Path;
use std::process::{Command, Output};

fn rmhd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmhd")).args(args).output().unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    assert!(!out.status.success());
    let line = String::from_utf8_lossy(&out.stderr);
    let line = line.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("not JSON ({e}): {line}"))
}

fn run_brio_wu(out: &Path, extra: &[&str]) -> Output {
    let mut args =
        vec!["run", "--scenario", "brio-wu", "--nx", "20", "--t-end", "0.05", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    rmhd(&args)
}

#[test]
fn presets_lists_every_scenario() {
    let out = rmhd(&["presets"]);
    assert!(out.status.success());
    let names: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(names, rmhd_core::PRESETS.map(String::from).to_vec());
}

#[test]
fn run_writes_the_final_and_intermediate_frames() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bw.csv");
    let steps = dir.path().join("steps.csv");
    let out = run_brio_wu(&path, &["--frames", "0.02", "--steps", steps.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["frames"].as_array().unwrap().len(), 2);
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,rho,vx,vy,vz,By,Bz,p,T,T_r,J,R,|<Q>|,|<nQ>|");
    assert_eq!(text.lines().count(), 21);
    assert!(dir.path().join("bw_t0.02.csv").is_file());
    let steps = std::fs::read_to_string(&steps).unwrap();
    assert!(steps.starts_with("step,time,dt,iterations"));
}

#[test]
fn identical_runs_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(run_brio_wu(&a, &[]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_rmhd"))
        .env("RMHD_THREADS", "1")
        .args(["run", "--scenario", "brio-wu", "--nx", "20", "--t-end", "0.05", "--out", b.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn config_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bw.cfg");
    let dump = rmhd(&["presets", "--dump", "brio-wu"]);
    assert!(dump.status.success());
    std::fs::write(&cfg, &dump.stdout).unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(run_brio_wu(&a, &[]).status.success());
    let out = rmhd(&[
        "run",
        "--scenario",
        cfg.to_str().unwrap(),
        "--nx",
        "20",
        "--t-end",
        "0.05",
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    std::fs::write(&cfg, format!("{}colour = red\n", String::from_utf8_lossy(&dump.stdout))).unwrap();
    let out = rmhd(&[
        "run",
        "--scenario",
        cfg.to_str().unwrap(),
        "--nx",
        "20",
        "--t-end",
        "0.05",
        "--out",
        b.to_str().unwrap(),
    ]);
    let e = error_json(&out);
    assert_eq!(e["kind"], "config");
    assert!(e["message"].as_str().unwrap().contains("colour"));
}

#[test]
fn failures_exit_nonzero_with_a_json_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    let p = path.to_str().unwrap();

    let e = error_json(&rmhd(&["run", "--scenario", "sod", "--nx", "20", "--t-end", "0.1", "--out", p]));
    assert_eq!(e["kind"], "unknown-preset");
    assert!(e["message"].as_str().unwrap().contains("brio-wu"));

    // the explicit solver refuses steps beyond the light-speed limit
    let e = error_json(&run_brio_wu(&path, &["--mode", "explicit"]));
    assert_eq!(e["kind"], "config");

    let e = error_json(&run_brio_wu(&path, &["--mode", "fast"]));
    assert_eq!(e["kind"], "usage");

    let e = error_json(&run_brio_wu(&path, &["--cfl", "0.1", "--dt", "0.01"]));
    assert_eq!(e["kind"], "usage");

    let e = error_json(&rmhd(&["run", "--scenario", "brio-wu", "--nx", "2", "--t-end", "0.1", "--out", p]));
    assert_eq!(e["kind"], "invalid-argument");

    let e = error_json(&run_brio_wu(&dir.path().join("no/such/dir.csv"), &[]));
    assert_eq!(e["kind"], "io");

    let e = error_json(&rmhd(&[
        "run",
        "--scenario",
        "opaque-blob",
        "--eps",
        "0.1",
        "--nx",
        "8",
        "--t-end",
        "0",
        "--out",
        p,
    ]));
    assert_eq!(e["kind"], "config");

    let out = Command::new(env!("CARGO_BIN_EXE_rmhd")).env("RMHD_THREADS", "zero").args(["presets"]).output().unwrap();
    assert_eq!(error_json(&out)["kind"], "config");
}

#[test]
fn converge_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.csv");
    let out = rmhd(&[
        "converge",
        "--scenario",
        "brio-wu",
        "--nx-list",
        "10,20",
        "--t-end",
        "0.05",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("nx,error_rho,"));
    assert_eq!(text.lines().count(), 3);
}
