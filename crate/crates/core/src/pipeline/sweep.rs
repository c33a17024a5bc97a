//! Grid sweeps over the two objective weights.
//!
//! Each cell of the grid re-runs the full alignment on the same scenario
//! seeds, so cells differ only in the weights under study.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::sig9;
use crate::optimizer::OptimizerConfig;
use crate::pipeline::run_alignment;
use crate::scenario::{make_scenario, TaskKind, DEFAULT_TOOL_POINTS};

/// What to sweep: the weight grids, the scenario seeds shared by every cell,
/// and the fixed optimizer settings.
#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub task: TaskKind,
    pub horizon: usize,
    pub lambda_c: Vec<f64>,
    pub lambda_r: Vec<f64>,
    pub seeds: Vec<u64>,
    pub base: OptimizerConfig,
}

/// Aggregate results for one `(lambda_c, lambda_r)` cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepCell {
    pub lambda_c: f64,
    pub lambda_r: f64,
    /// Runs that returned an optimization error instead of a result.
    pub failures: usize,
    /// Mean over seeds of the per-run mean frame Chamfer distance.
    pub mean_frame_chamfer: f64,
    /// Population standard deviation of the same quantity across seeds.
    pub std_frame_chamfer: f64,
    /// Mean over seeds and steps of the per-step translation magnitude.
    pub mean_delta_translation: f64,
}

/// Runs the grid row-major: `lambda_c` outer, `lambda_r` inner.
pub fn run_sweep(request: &SweepRequest) -> Result<Vec<SweepCell>> {
    if request.lambda_c.is_empty() || request.lambda_r.is_empty() || request.seeds.is_empty() {
        return Err(Error::argument(
            "a sweep needs at least one value per weight and one seed",
        ));
    }
    let scenarios = request
        .seeds
        .iter()
        .map(|&seed| make_scenario(request.task, seed, request.horizon, DEFAULT_TOOL_POINTS))
        .collect::<Result<Vec<_>>>()?;

    let mut cells = Vec::with_capacity(request.lambda_c.len() * request.lambda_r.len());
    for &lambda_c in &request.lambda_c {
        for &lambda_r in &request.lambda_r {
            let config = OptimizerConfig { lambda_c, lambda_r, ..request.base.clone() };
            let mut chamfers = Vec::new();
            let mut delta_norm_sum = 0.0;
            let mut delta_norm_count = 0usize;
            let mut failures = 0;
            for s in &scenarios {
                match run_alignment(&[s.tool.clone()], &s.obs, &s.generated, &config) {
                    Ok(out) => {
                        let m = mean(&out.report.per_frame_chamfer);
                        chamfers.push(m);
                        for t in 1..=out.poses.horizon() {
                            delta_norm_sum += out.poses.delta(t).translation().norm();
                            delta_norm_count += 1;
                        }
                    }
                    Err(Error::OptimizationFailed { .. }) => failures += 1,
                    Err(other) => return Err(other),
                }
            }
            let m = if chamfers.is_empty() { f64::NAN } else { mean(&chamfers) };
            let sd = if chamfers.is_empty() {
                f64::NAN
            } else {
                (chamfers.iter().map(|x| (x - m).powi(2)).sum::<f64>()
                    / chamfers.len() as f64)
                    .sqrt()
            };
            cells.push(SweepCell {
                lambda_c,
                lambda_r,
                failures,
                mean_frame_chamfer: m,
                std_frame_chamfer: sd,
                mean_delta_translation: if delta_norm_count == 0 {
                    f64::NAN
                } else {
                    delta_norm_sum / delta_norm_count as f64
                },
            });
        }
    }
    Ok(cells)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Renders sweep cells as CSV with nine-significant-digit numbers.
pub fn sweep_to_csv(cells: &[SweepCell]) -> String {
    let mut out = String::from(
        "lambda_c,lambda_r,failures,mean_frame_chamfer,std_frame_chamfer,mean_delta_translation\n",
    );
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            sig9(c.lambda_c),
            sig9(c.lambda_r),
            c.failures,
            sig9(c.mean_frame_chamfer),
            sig9(c.std_frame_chamfer),
            sig9(c.mean_delta_translation),
        ));
    }
    out
}
