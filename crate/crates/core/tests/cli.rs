//! End-to-end tests of the command-line interface and its exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use toolpath_core::geometry::PointCloud;
use toolpath_core::trajectory::{GeneratedTrajectory, PoseTrajectory};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toolpath"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

/// Optimizer settings small enough to keep these tests quick.
fn write_fast_config(dir: &Path) -> String {
    let path = dir.join("fast.cfg");
    fs::write(
        &path,
        "lambda_c = 0.0\nreset_step_size = 0.05\nnum_inits = 4\n\
         reset_iterations = 80\ndelta_iterations = 50\n",
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

fn gen_scenario(dir: &Path) {
    let out = run(&[
        "gen-scenario",
        "--task",
        "cut",
        "--seed",
        "5",
        "--horizon",
        "3",
        "--tool-points",
        "96",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn gen_scenario_writes_parseable_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("scn");
    gen_scenario(&dir);

    for name in ["tool.xyz", "obs.xyz", "goal.xyz"] {
        let cloud = PointCloud::read_xyz(dir.join(name)).unwrap();
        assert!(cloud.len() > 0, "{name}");
    }
    for i in 0..3 {
        PointCloud::read_xyz(dir.join(format!("distractor_{i}.xyz"))).unwrap();
    }
    let generated = GeneratedTrajectory::read(dir.join("gen_traj.txt")).unwrap();
    assert_eq!(generated.horizon(), 3);
    let truth = PoseTrajectory::read_csv(dir.join("truth_poses.csv")).unwrap();
    assert_eq!(truth.horizon(), 3);
}

#[test]
fn align_and_evaluate_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = tmp.path().join("scn");
    gen_scenario(&scn);
    let cfg = write_fast_config(tmp.path());

    let aln = tmp.path().join("aln");
    let out = run(&[
        "align",
        "--tool",
        scn.join("tool.xyz").to_str().unwrap(),
        "--obs",
        scn.join("obs.xyz").to_str().unwrap(),
        "--gen",
        scn.join("gen_traj.txt").to_str().unwrap(),
        "--config",
        &cfg,
        "--out",
        aln.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let poses = PoseTrajectory::read_csv(aln.join("opt_poses.csv")).unwrap();
    assert_eq!(poses.horizon(), 3);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(aln.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["per_frame_chamfer"].as_array().unwrap().len(), 4);
    assert!(report.get("wall_time_ms").is_none());

    let out = run(&[
        "evaluate",
        "--report",
        aln.to_str().unwrap(),
        "--scenario",
        scn.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let evaluation: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("evaluation is JSON");
    for key in ["flow_error", "score", "initial_divergence", "final_divergence"] {
        assert!(evaluation[key].is_number(), "missing {key}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_fast_config(tmp.path());
    let mut artifacts: Vec<(Vec<u8>, Vec<u8>, Vec<u8>)> = Vec::new();
    for label in ["a", "b"] {
        let scn = tmp.path().join(format!("scn_{label}"));
        gen_scenario(&scn);
        let aln = tmp.path().join(format!("aln_{label}"));
        let out = run(&[
            "align",
            "--tool",
            scn.join("tool.xyz").to_str().unwrap(),
            "--obs",
            scn.join("obs.xyz").to_str().unwrap(),
            "--gen",
            scn.join("gen_traj.txt").to_str().unwrap(),
            "--config",
            &cfg,
            "--out",
            aln.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        artifacts.push((
            fs::read(scn.join("gen_traj.txt")).unwrap(),
            fs::read(aln.join("opt_poses.csv")).unwrap(),
            fs::read(aln.join("report.json")).unwrap(),
        ));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0);
    assert_eq!(artifacts[0].1, artifacts[1].1);
    assert_eq!(artifacts[0].2, artifacts[1].2);
}

#[test]
fn sweep_writes_the_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let csv_path = tmp.path().join("grid.csv");
    let cfg = write_fast_config(tmp.path());
    let out = run(&[
        "sweep",
        "--task",
        "cut",
        "--lambda-c",
        "0.0,0.1",
        "--lambda-r",
        "0.1,1.0",
        "--seeds",
        "1",
        "--horizon",
        "2",
        "--config",
        &cfg,
        "--out",
        csv_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("lambda_c,lambda_r,failures,mean_frame_chamfer"));
}

#[test]
fn grad_check_passes_with_sane_step() {
    let out = run(&["grad-check", "--seed", "3", "--trials", "10"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
}

#[test]
fn grad_check_fails_with_a_coarse_step() {
    // A huge finite-difference step makes the comparison meaningless, which
    // is exactly what the failure exit code is for.
    let out = run(&["grad-check", "--seed", "3", "--trials", "10", "--fd-step", "0.09"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn argument_errors_exit_with_one() {
    // Unknown subcommand.
    assert_eq!(code(&run(&["polish"])), 1);
    // Unknown flag.
    assert_eq!(code(&run(&["grad-check", "--bogus"])), 1);
    // Unknown task name.
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&[
        "gen-scenario",
        "--task",
        "juggle",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    // Missing input file.
    let out = run(&[
        "align",
        "--tool",
        "/nonexistent/tool.xyz",
        "--obs",
        "/nonexistent/obs.xyz",
        "--gen",
        "/nonexistent/gen.txt",
        "--out",
        tmp.path().join("x").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn bad_config_keys_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = tmp.path().join("scn");
    gen_scenario(&scn);
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "step_size = 0.1\n").unwrap();
    let out = run(&[
        "align",
        "--tool",
        scn.join("tool.xyz").to_str().unwrap(),
        "--obs",
        scn.join("obs.xyz").to_str().unwrap(),
        "--gen",
        scn.join("gen_traj.txt").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("aln").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn optimization_failure_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let scn = tmp.path().join("scn");
    gen_scenario(&scn);
    // Inits sampled at astronomical distances overflow every distance
    // computation, so all of them diverge.
    let cfg = tmp.path().join("doomed.cfg");
    fs::write(
        &cfg,
        "num_inits = 3\nreset_iterations = 20\n\
         init_bounds_min = 1e200 1e200 1e200\ninit_bounds_max = 2e200 2e200 2e200\n",
    )
    .unwrap();
    let out = run(&[
        "align",
        "--tool",
        scn.join("tool.xyz").to_str().unwrap(),
        "--obs",
        scn.join("obs.xyz").to_str().unwrap(),
        "--gen",
        scn.join("gen_traj.txt").to_str().unwrap(),
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("aln").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn help_exits_with_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["align", "--help"])), 0);
}
