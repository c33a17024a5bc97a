//! Native payload builders behind the browser bindings.

use nalgebra::{UnitQuaternion, Vector3};
use serde::Serialize;

use toolpath_core::flow::{rigid_fit, PointFlow};
use toolpath_core::geometry::{PointCloud, RigidTransform};
use toolpath_core::metrics::{sinkhorn_divergence, normalized_score, SinkhornConfig};
use toolpath_core::optimizer::OptimizerConfig;
use toolpath_core::pipeline::run_alignment;
use toolpath_core::scenario::{make_scenario, Scenario, TaskKind};
use toolpath_core::trajectory::PoseTrajectory;
use toolpath_core::{contact, Error, Result};

/// Caps keeping in-browser runs responsive.
const MAX_HORIZON: usize = 20;
const DEMO_TOOL_POINTS: usize = 160;

fn parse_task(task: &str) -> Result<TaskKind> {
    task.parse()
        .map_err(|_| Error::argument(format!("unknown task '{task}'")))
}

fn checked_scenario(task: &str, seed: u64, horizon: usize) -> Result<Scenario> {
    if horizon == 0 || horizon > MAX_HORIZON {
        return Err(Error::argument(format!(
            "horizon must be in 1..={MAX_HORIZON}, got {horizon}"
        )));
    }
    make_scenario(parse_task(task)?, seed, horizon, DEMO_TOOL_POINTS)
}

/// Points rounded for transport; 0.01 mm is far below anything the canvas
/// can show.
fn round_cloud(cloud: &PointCloud) -> Vec<[f64; 3]> {
    let r = |v: f64| (v * 1e5).round() / 1e5;
    cloud.points().iter().map(|p| [r(p.x), r(p.y), r(p.z)]).collect()
}

#[derive(Debug, Serialize)]
pub struct PoseView {
    pub translation: [f64; 3],
    /// Rotation as `(w, x, y, z)`.
    pub quaternion: [f64; 4],
}

fn pose_view(t: &RigidTransform) -> PoseView {
    let q = t.quaternion_vector();
    let tr = t.translation();
    PoseView {
        translation: [tr.x, tr.y, tr.z],
        quaternion: [q.x, q.y, q.z, q.w],
    }
}

#[derive(Debug, Serialize)]
pub struct ScenarioView {
    pub task: String,
    pub seed: u64,
    pub horizon: usize,
    pub tool: Vec<[f64; 3]>,
    pub obs: Vec<[f64; 3]>,
    pub goal: Vec<[f64; 3]>,
    /// Generated target frames `t = 0..=H`.
    pub frames: Vec<Vec<[f64; 3]>>,
    pub truth: Vec<PoseView>,
}

pub fn scenario_view(task: &str, seed: u64, horizon: usize) -> Result<ScenarioView> {
    let s = checked_scenario(task, seed, horizon)?;
    Ok(ScenarioView {
        task: s.task.name().to_string(),
        seed,
        horizon: s.horizon(),
        tool: round_cloud(&s.tool),
        obs: round_cloud(&s.obs),
        goal: round_cloud(&s.goal),
        frames: s.generated.frames().iter().map(round_cloud).collect(),
        truth: s.truth.poses().iter().map(pose_view).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct AlignView {
    pub task: String,
    pub seed: u64,
    pub horizon: usize,
    pub reset_cost: f64,
    pub reset_converged: bool,
    pub per_frame_chamfer: Vec<f64>,
    pub poses: Vec<PoseView>,
    /// The real tool carried through the fitted poses, for overlay drawing.
    pub fitted_frames: Vec<Vec<[f64; 3]>>,
    /// Fraction of the goal gap closed by the fitted motion (1 = perfect).
    pub score: f64,
    pub sinkhorn_converged: bool,
}

pub fn align_view(task: &str, seed: u64, horizon: usize, thorough: bool) -> Result<AlignView> {
    let s = checked_scenario(task, seed, horizon)?;
    let config = if thorough {
        OptimizerConfig {
            lambda_c: 0.0,
            lambda_r: 1e-3,
            reset_step_size: 0.5,
            num_inits: 16,
            reset_iterations: 300,
            delta_iterations: 200,
            ..Default::default()
        }
    } else {
        OptimizerConfig {
            lambda_c: 0.0,
            lambda_r: 1e-3,
            reset_step_size: 0.5,
            num_inits: 8,
            reset_iterations: 120,
            delta_iterations: 80,
            ..Default::default()
        }
    };
    let out = run_alignment(&[s.tool.clone()], &s.obs, &s.generated, &config)?;

    let fitted: Vec<PointCloud> = out
        .poses
        .poses()
        .iter()
        .map(|pose| pose.apply(&s.tool))
        .collect();
    let swept = contact::displaced_by_sweep(&s.obs, &fitted, contact::CONTACT_RADIUS)?;
    let sinkhorn = SinkhornConfig {
        max_iterations: 300,
        ..Default::default()
    };
    let initial = sinkhorn_divergence(&s.obs, &s.goal, &sinkhorn)?;
    let achieved = sinkhorn_divergence(&swept, &s.goal, &sinkhorn)?;
    // An untouched observation scores 0 by definition; guard the degenerate
    // case where the goal already equals the observation.
    let score = if initial.value > 0.0 {
        normalized_score(initial.value, achieved.value)?
    } else {
        0.0
    };

    Ok(AlignView {
        task: s.task.name().to_string(),
        seed,
        horizon: s.horizon(),
        reset_cost: out.report.reset_cost,
        reset_converged: out.report.reset_converged,
        per_frame_chamfer: out.report.per_frame_chamfer.clone(),
        poses: out.poses.poses().iter().map(pose_view).collect(),
        fitted_frames: fitted.iter().map(round_cloud).collect(),
        score,
        sinkhorn_converged: initial.converged && achieved.converged,
    })
}

#[derive(Debug, Serialize)]
pub struct FlowView {
    pub base: Vec<[f64; 3]>,
    pub displaced: Vec<[f64; 3]>,
    pub true_pose: PoseView,
    pub fitted_pose: PoseView,
    pub rotation_error_deg: f64,
    pub translation_error: f64,
    pub determinant: f64,
}

/// A fixed demonstration cloud: the scoop-small tool gives the fit an
/// asymmetric, recognizably tool-like silhouette.
fn flow_base() -> Result<PointCloud> {
    let shape = TaskKind::ScoopSmall.tool_shape();
    toolpath_core::scenario::make_tool(&shape, 120)
}

pub fn flow_view(angle_deg: f64, tx: f64, ty: f64, tz: f64) -> Result<FlowView> {
    for v in [angle_deg, tx, ty, tz] {
        if !v.is_finite() {
            return Err(Error::argument("motion parameters must be finite"));
        }
    }
    let base = flow_base()?;
    let truth = RigidTransform::from_parts(
        UnitQuaternion::from_axis_angle(&Vector3::y_axis(), angle_deg.to_radians()),
        Vector3::new(tx, ty, tz),
    );
    let vectors: Vec<Vector3<f64>> = base
        .points()
        .iter()
        .map(|p| truth.apply_point(p) - p)
        .collect();
    let flow = PointFlow::new(base.clone(), vectors)?;
    let fitted = rigid_fit(&flow)?;

    let residual = fitted.compose(&truth.inverse());
    Ok(FlowView {
        base: round_cloud(&base),
        displaced: round_cloud(&flow.displaced()),
        true_pose: pose_view(&truth),
        fitted_pose: pose_view(&fitted),
        rotation_error_deg: residual.rotation_angle().to_degrees(),
        translation_error: residual.translation().norm(),
        determinant: fitted.rotation_matrix().determinant(),
    })
}

/// Poses rendered by the page come straight from a [`PoseTrajectory`]; this
/// keeps the dependency used and documents the source of `PoseView` rows.
pub fn poses_of(trajectory: &PoseTrajectory) -> Vec<PoseView> {
    trajectory.poses().iter().map(pose_view).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_view_is_deterministic_and_complete() {
        let a = scenario_view("cut", 7, 5).unwrap();
        let b = scenario_view("cut", 7, 5).unwrap();
        assert_eq!(a.horizon, 5);
        assert_eq!(a.frames.len(), 6);
        assert_eq!(a.truth.len(), 6);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn align_view_tracks_and_scores() {
        let view = align_view("cut", 3, 4, false).unwrap();
        assert_eq!(view.per_frame_chamfer.len(), 5);
        assert_eq!(view.fitted_frames.len(), 5);
        let mean = view.per_frame_chamfer.iter().sum::<f64>() / 5.0;
        assert!(mean < 5e-3, "mean frame chamfer {mean:.2e}");
        assert!(view.score.is_finite());
    }

    #[test]
    fn flow_view_recovers_the_motion_exactly() {
        let view = flow_view(25.0, 0.02, -0.01, 0.03).unwrap();
        assert!(view.rotation_error_deg < 1e-8);
        assert!(view.translation_error < 1e-10);
        assert!((view.determinant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_arguments_are_rejected() {
        assert!(scenario_view("weld", 0, 5).is_err());
        assert!(scenario_view("cut", 0, 0).is_err());
        assert!(scenario_view("cut", 0, 999).is_err());
        assert!(flow_view(f64::NAN, 0.0, 0.0, 0.0).is_err());
    }
}
