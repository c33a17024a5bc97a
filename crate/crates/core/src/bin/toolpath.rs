//! Command-line front end for scenario generation, alignment, evaluation,
//! parameter sweeps, and gradient checking.
//!
//! Exit codes: 0 success, 1 argument or input errors, 2 optimization
//! failure, 3 gradient check over threshold.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use toolpath_core::error::Error;
use toolpath_core::geometry::PointCloud;
use toolpath_core::metrics::SinkhornConfig;
use toolpath_core::optimizer::OptimizerConfig;
use toolpath_core::pipeline::{
    evaluate, run_alignment, run_grad_check, run_sweep, sweep_to_csv, SweepRequest,
};
use toolpath_core::scenario::{make_scenario, TaskKind, DEFAULT_TOOL_POINTS};
use toolpath_core::trajectory::{GeneratedTrajectory, PoseTrajectory};

#[derive(Parser)]
#[command(name = "toolpath", version, about = "Tool trajectory alignment toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario and write its files to a directory.
    GenScenario(GenScenarioArgs),
    /// Align candidate tools to a generated trajectory.
    Align(AlignArgs),
    /// Score an alignment directory against a scenario directory.
    Evaluate(EvaluateArgs),
    /// Sweep the objective weights over a grid of scenarios.
    Sweep(SweepArgs),
    /// Compare analytic optimizer gradients with finite differences.
    GradCheck(GradCheckArgs),
}

#[derive(Args)]
struct GenScenarioArgs {
    /// Task to stage: roll, cut, scoop-small, or scoop-large.
    #[arg(long)]
    task: TaskKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of motion steps (the trajectory has horizon + 1 frames).
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    /// Points sampled on each tool surface.
    #[arg(long, default_value_t = DEFAULT_TOOL_POINTS)]
    tool_points: usize,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AlignArgs {
    /// Candidate tool cloud; repeat to let the pipeline choose among several.
    #[arg(long = "tool", required = true)]
    tools: Vec<PathBuf>,
    /// Observed scene cloud.
    #[arg(long)]
    obs: PathBuf,
    /// Generated trajectory file.
    #[arg(long = "gen")]
    generated: PathBuf,
    /// Optimizer configuration file (key=value lines); defaults apply if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory written by `align`.
    #[arg(long)]
    report: PathBuf,
    /// Directory written by `gen-scenario`.
    #[arg(long)]
    scenario: PathBuf,
    /// Iteration cap for the divergence solves.
    #[arg(long, default_value_t = 2000)]
    sinkhorn_iterations: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    task: TaskKind,
    /// Comma-separated collision weights.
    #[arg(long = "lambda-c", value_delimiter = ',', required = true)]
    lambda_c: Vec<f64>,
    /// Comma-separated regularizer weights.
    #[arg(long = "lambda-r", value_delimiter = ',', required = true)]
    lambda_r: Vec<f64>,
    /// Comma-separated scenario seeds shared by every grid cell.
    #[arg(long, value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 10)]
    horizon: usize,
    /// Optimizer configuration file for the fixed settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GradCheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Central finite-difference step.
    #[arg(long, default_value_t = 1e-6)]
    fd_step: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are successes; everything else is an
            // argument error.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            if let Error::OptimizationFailed { diagnostics, .. } = &err {
                for line in diagnostics {
                    eprintln!("  {line}");
                }
            }
            match err {
                Error::OptimizationFailed { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::GenScenario(args) => gen_scenario(args),
        Command::Align(args) => align(args),
        Command::Evaluate(args) => evaluate_cmd(args),
        Command::Sweep(args) => sweep(args),
        Command::GradCheck(args) => grad_check(args),
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<OptimizerConfig, Error> {
    match path {
        Some(p) => OptimizerConfig::from_file(p),
        None => Ok(OptimizerConfig::default()),
    }
}

fn gen_scenario(args: GenScenarioArgs) -> Result<ExitCode, Error> {
    let scenario = make_scenario(args.task, args.seed, args.horizon, args.tool_points)?;
    std::fs::create_dir_all(&args.out)?;
    scenario.tool.write_xyz(args.out.join("tool.xyz"))?;
    for (i, d) in scenario.distractors.iter().enumerate() {
        d.write_xyz(args.out.join(format!("distractor_{i}.xyz")))?;
    }
    scenario.obs.write_xyz(args.out.join("obs.xyz"))?;
    scenario.goal.write_xyz(args.out.join("goal.xyz"))?;
    scenario.generated.write(args.out.join("gen_traj.txt"))?;
    scenario.truth.write_csv(args.out.join("truth_poses.csv"))?;
    println!(
        "wrote scenario task={} seed={} horizon={} to {}",
        scenario.task,
        scenario.seed,
        scenario.horizon(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn align(args: AlignArgs) -> Result<ExitCode, Error> {
    let candidates = args
        .tools
        .iter()
        .map(PointCloud::read_xyz)
        .collect::<Result<Vec<_>, Error>>()?;
    let obs = PointCloud::read_xyz(&args.obs)?;
    let generated = GeneratedTrajectory::read(&args.generated)?;
    let config = load_config(&args.config)?;

    let outcome = run_alignment(&candidates, &obs, &generated, &config)?;

    std::fs::create_dir_all(&args.out)?;
    outcome.poses.write_csv(args.out.join("opt_poses.csv"))?;
    write_json(&args.out.join("report.json"), &outcome.report)?;
    let mean = outcome.report.per_frame_chamfer.iter().sum::<f64>()
        / outcome.report.per_frame_chamfer.len() as f64;
    println!(
        "aligned tool {} over {} steps: mean frame chamfer {:.3e}, {:.0} ms",
        outcome.report.selection.index,
        outcome.poses.horizon(),
        mean,
        outcome.report.wall_time_ms
    );
    Ok(ExitCode::SUCCESS)
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<ExitCode, Error> {
    let predicted = PoseTrajectory::read_csv(args.report.join("opt_poses.csv"))?;
    let tool = PointCloud::read_xyz(args.scenario.join("tool.xyz"))?;
    let obs = PointCloud::read_xyz(args.scenario.join("obs.xyz"))?;
    let goal = PointCloud::read_xyz(args.scenario.join("goal.xyz"))?;
    let reference = PoseTrajectory::read_csv(args.scenario.join("truth_poses.csv"))?;
    let sinkhorn = SinkhornConfig {
        max_iterations: args.sinkhorn_iterations,
        ..Default::default()
    };
    let result = evaluate(&tool, &obs, &goal, &predicted, &reference, &sinkhorn)?;
    println!("{}", serde_json::to_string_pretty(&result).expect("evaluation serializes"));
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: SweepArgs) -> Result<ExitCode, Error> {
    let request = SweepRequest {
        task: args.task,
        horizon: args.horizon,
        lambda_c: args.lambda_c,
        lambda_r: args.lambda_r,
        seeds: args.seeds,
        base: load_config(&args.config)?,
    };
    let cells = run_sweep(&request)?;
    let csv = sweep_to_csv(&cells);
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&args.out, csv)?;
    println!("wrote {} sweep cells to {}", cells.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn grad_check(args: GradCheckArgs) -> Result<ExitCode, Error> {
    let report = run_grad_check(args.seed, args.trials, args.fd_step)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    if report.passed {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "gradient check failed: max relative error {:.3e} exceeds {:.1e}",
            report.max_relative_error, report.threshold
        );
        Ok(ExitCode::from(3))
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
