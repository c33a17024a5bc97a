//! Joint gradient descent over the per-step delta poses.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{EulerDelta, PointCloud, RigidTransform};
use crate::metrics::{chamfer, NnIndex};
use crate::trajectory::{GeneratedTrajectory, PoseTrajectory};

use super::frozen::{collect_pairs, DeltaSurrogate, Pair};
use super::{delta_objective, ConvergenceTracker, DeltaResult, OptimizerConfig, STEP_FLOOR};

/// Optimizes the `6H` delta parameters tracking generated frames `1..=H`
/// from the fixed reset pose. Frame 0 is the reset target and is not
/// revisited here; collisions with the scene are allowed during execution,
/// so no observation term appears.
pub fn optimize_deltas(
    tool: &PointCloud,
    reset: &RigidTransform,
    gen: &GeneratedTrajectory,
    config: &OptimizerConfig,
) -> Result<DeltaResult> {
    config.validate()?;
    let horizon = gen.horizon();
    if horizon == 0 {
        return Ok(DeltaResult {
            deltas: Vec::new(),
            cost: 0.0,
            per_step_residuals: Vec::new(),
        });
    }

    // The generated frames never move; index them once.
    let frame_indices: Vec<NnIndex<'_>> = (1..=horizon)
        .map(|t| NnIndex::build(gen.frame(t).points()))
        .collect();

    let base_rotation = reset.rotation_matrix();
    let base_translation = reset.translation();
    let mut params = vec![EulerDelta::zero(); horizon];
    let mut tracker = ConvergenceTracker::new();
    let mut pairs_per_frame: Vec<Vec<Pair>> = vec![Vec::new(); horizon];

    for iteration in 0..config.delta_iterations {
        // Chain the current deltas and refresh correspondences per frame.
        let transforms: Vec<RigidTransform> =
            params.iter().map(EulerDelta::to_transform).collect();
        let poses = PoseTrajectory::from_deltas(*reset, &transforms);
        let mut objective = 0.0;
        for t in 1..=horizon {
            let pose = &poses.poses()[t];
            let rot = pose.rotation_matrix();
            let tr = pose.translation();
            let transformed: Vec<Vector3<f64>> =
                tool.points().iter().map(|p| rot * p + tr).collect();
            pairs_per_frame[t - 1].clear();
            objective += collect_pairs(
                &transformed,
                gen.frame(t).points(),
                &frame_indices[t - 1],
                1.0,
                &mut pairs_per_frame[t - 1],
            );
        }
        objective += config.lambda_r
            * params
                .iter()
                .map(|d| d.translation.norm() + d.rotation.norm())
                .sum::<f64>();
        if !objective.is_finite() {
            return Err(Error::OptimizationFailed {
                message: "delta objective became non-finite".into(),
                diagnostics: vec![format!(
                    "iteration {iteration}: objective {objective}"
                )],
            });
        }
        if tracker.push(objective) {
            break;
        }

        let surrogate = DeltaSurrogate {
            tool: tool.points(),
            base_rotation,
            base_translation,
            pairs_per_frame: &pairs_per_frame,
            lambda_r: config.lambda_r,
        };
        let anchor = surrogate.value(&params);
        let grads = surrogate.gradient(&params);

        let mut step = config.delta_step_size;
        loop {
            let trial: Vec<EulerDelta> = params
                .iter()
                .zip(&grads)
                .map(|(p, g)| {
                    EulerDelta::new(
                        p.rotation - step * g.rotation,
                        p.translation - step * g.translation,
                    )
                })
                .collect();
            let value = surrogate.value(&trial);
            if value.is_finite() && value <= anchor {
                params = trial;
                break;
            }
            step *= 0.5;
            if step < STEP_FLOOR {
                break; // keep the current iterate
            }
        }
    }

    let cost = delta_objective(&params, reset, tool, gen, config.lambda_r)?;
    let transforms: Vec<RigidTransform> = params.iter().map(EulerDelta::to_transform).collect();
    let poses = PoseTrajectory::from_deltas(*reset, &transforms);
    let per_step_residuals: Vec<f64> = (1..=horizon)
        .map(|t| chamfer(&poses.poses()[t].apply(tool), gen.frame(t)))
        .collect();
    Ok(DeltaResult {
        deltas: params,
        cost,
        per_step_residuals,
    })
}
