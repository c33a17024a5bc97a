//! Scoring an alignment against scenario ground truth.

use serde::{Deserialize, Serialize};

use crate::contact::{displaced_by_sweep, CONTACT_RADIUS};
use crate::error::Result;
use crate::flow::flow_matching_error;
use crate::geometry::PointCloud;
use crate::metrics::{normalized_score, sinkhorn_divergence, SinkhornConfig};
use crate::trajectory::PoseTrajectory;

/// Alignment quality relative to the known-good trajectory and goal state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Evaluation {
    /// Mean squared point displacement error against the reference chain.
    pub flow_error: f64,
    pub mean_translation_error: f64,
    pub max_translation_error: f64,
    /// Rotation errors in radians.
    pub mean_rotation_error: f64,
    pub max_rotation_error: f64,
    /// Divergence between the untouched observation and the goal.
    pub initial_divergence: f64,
    /// Divergence between the predicted final state and the goal.
    pub final_divergence: f64,
    /// Fraction of the initial divergence the motion removed; 1 is perfect,
    /// negative means the predicted motion made things worse.
    pub score: f64,
    pub sinkhorn_converged: bool,
    /// Contact radius of the displacement model behind the final state.
    pub contact_radius: f64,
}

/// Compares a predicted pose chain with the reference chain and scores the
/// predicted material outcome against the goal cloud.
pub fn evaluate(
    tool: &PointCloud,
    obs: &PointCloud,
    goal: &PointCloud,
    predicted: &PoseTrajectory,
    reference: &PoseTrajectory,
    sinkhorn: &SinkhornConfig,
) -> Result<Evaluation> {
    let flow_error = flow_matching_error(predicted, reference, tool)?;

    let mut translation = Vec::with_capacity(predicted.poses().len());
    let mut rotation = Vec::with_capacity(predicted.poses().len());
    for (p, r) in predicted.poses().iter().zip(reference.poses()) {
        translation.push((p.translation() - r.translation()).norm());
        rotation.push(p.compose(&r.inverse()).rotation_angle());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let max = |v: &[f64]| v.iter().fold(0.0, |a: f64, b| a.max(*b));

    let frames: Vec<PointCloud> =
        predicted.poses().iter().map(|pose| pose.apply(tool)).collect();
    let final_state = displaced_by_sweep(obs, &frames, CONTACT_RADIUS)?;

    let initial = sinkhorn_divergence(obs, goal, sinkhorn)?;
    let final_ = sinkhorn_divergence(&final_state, goal, sinkhorn)?;
    let score = normalized_score(initial.value, final_.value)?;

    Ok(Evaluation {
        flow_error,
        mean_translation_error: mean(&translation),
        max_translation_error: max(&translation),
        mean_rotation_error: mean(&rotation),
        max_rotation_error: max(&rotation),
        initial_divergence: initial.value,
        final_divergence: final_.value,
        score,
        sinkhorn_converged: initial.converged && final_.converged,
        contact_radius: CONTACT_RADIUS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RigidTransform;
    use crate::scenario::{make_scenario, TaskKind};
    use nalgebra::Vector3;

    fn config() -> SinkhornConfig {
        SinkhornConfig { max_iterations: 2000, ..Default::default() }
    }

    #[test]
    fn reference_chain_scores_perfectly() {
        let s = make_scenario(TaskKind::Cut, 1, 10, 128).unwrap();
        let e = evaluate(&s.tool, &s.obs, &s.goal, &s.truth, &s.truth, &config()).unwrap();
        assert_eq!(e.flow_error, 0.0);
        assert_eq!(e.mean_translation_error, 0.0);
        assert_eq!(e.max_rotation_error, 0.0);
        // The predicted final state rebuilds the goal bit for bit, so the
        // divergence against it is exactly zero and the score exactly one.
        assert_eq!(e.final_divergence, 0.0);
        assert_eq!(e.score, 1.0);
        assert!(e.initial_divergence > 0.0);
    }

    #[test]
    fn idle_chain_scores_zero() {
        // A trajectory that never moves the tool near the mass leaves the
        // observation untouched: the final divergence equals the initial one.
        let s = make_scenario(TaskKind::Cut, 2, 5, 128).unwrap();
        let far = RigidTransform::from_translation(Vector3::new(50.0, 0.0, 0.0));
        let idle = PoseTrajectory::from_absolute(vec![far; s.horizon() + 1]).unwrap();
        let e = evaluate(&s.tool, &s.obs, &s.goal, &idle, &s.truth, &config()).unwrap();
        assert_eq!(e.initial_divergence, e.final_divergence);
        assert_eq!(e.score, 0.0);
        assert!(e.flow_error > 0.0);
        assert!(e.max_translation_error > 1.0);
    }

    #[test]
    fn pose_errors_track_an_offset_chain() {
        let s = make_scenario(TaskKind::Cut, 3, 4, 96).unwrap();
        let nudge = RigidTransform::from_translation(Vector3::new(0.02, 0.0, 0.0));
        let shifted = PoseTrajectory::from_absolute(
            s.truth.poses().iter().map(|p| nudge.compose(p)).collect(),
        )
        .unwrap();
        let e = evaluate(&s.tool, &s.obs, &s.goal, &shifted, &s.truth, &config()).unwrap();
        assert!((e.mean_translation_error - 0.02).abs() < 1e-12);
        assert!((e.max_translation_error - 0.02).abs() < 1e-12);
        assert!(e.mean_rotation_error < 1e-12);
    }

    #[test]
    fn horizon_mismatch_is_an_error() {
        let s = make_scenario(TaskKind::Cut, 4, 4, 96).unwrap();
        let short =
            PoseTrajectory::from_absolute(s.truth.poses()[..3].to_vec()).unwrap();
        assert!(evaluate(&s.tool, &s.obs, &s.goal, &short, &s.truth, &config()).is_err());
    }
}
